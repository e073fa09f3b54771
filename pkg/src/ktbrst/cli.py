"""``ktbrst`` command line: check, dump-el, list-models, render."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .brst import ModelError
from .dsl import DslError, parse_model_with_diagnostics, render_model
from .models import BUILTIN_MODELS, builtin_model
from .report import CHECKS, emit_report, run_checks

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


def load_model(ref: str):
    """A built-in name or a path to a ``.ktb`` source."""
    if ref in BUILTIN_MODELS or (":" in ref and not Path(ref).exists()):
        try:
            return builtin_model(ref)
        except ModelError as exc:
            raise _UsageError(str(exc)) from None
    path = Path(ref)
    try:
        src = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {ref}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise _UsageError(f"{ref}: not UTF-8 text") from None
    try:
        model, diags = parse_model_with_diagnostics(src)
    except DslError as exc:
        raise _UsageError(f"{ref}:{exc}") from None
    for d in diags:
        print(f"{ref}:{d}", file=sys.stderr)
    return model


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ktbrst", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)
    c = sub.add_parser("check", help="run verification checks on a model")
    c.add_argument("model", help="built-in model name or .ktb file")
    c.add_argument("--only", help=f"comma-separated subset of: {', '.join(CHECKS)}")
    c.add_argument("--format", choices=("text", "structured"), default="text")
    c.add_argument("--jobs", type=int, default=1, help="worker processes")
    c.add_argument("--no-timing", action="store_true", help="omit the timing section")
    e = sub.add_parser("dump-el", help="print Euler-Lagrange components")
    e.add_argument("model")
    sub.add_parser("list-models", help="list built-in models")
    r = sub.add_parser("render", help="print a model as DSL source")
    r.add_argument("model")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    out = sys.stdout
    try:
        if args.verb == "list-models":
            for name in BUILTIN_MODELS:
                out.write(f"{name}\t{builtin_model(name).description}\n")
            return EXIT_OK
        model = load_model(args.model)
        if args.verb == "render":
            out.write(render_model(model))
            return EXIT_OK
        if args.verb == "dump-el":
            for name, v in model.el.items():
                out.write(f"E[{name}] = {v.render(model.coord_names)}\n")
            return EXIT_OK
        if args.jobs < 1:
            raise _UsageError("--jobs must be at least 1")
        selection = None
        if args.only is not None:
            selection = [s.strip() for s in args.only.split(",") if s.strip()]
        try:
            report = run_checks(model, selection, jobs=args.jobs)
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
        sys.stdout.buffer.write(emit_report(report, args.format, timing=not args.no_timing))
        sys.stdout.flush()
        return EXIT_OK if report.passed else EXIT_FAIL
    except _UsageError as exc:
        print(f"ktbrst: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
