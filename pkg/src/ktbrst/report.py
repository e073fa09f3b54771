"""Check orchestration and deterministic report emission."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import __version__
from .algebra import AlgebraError
from .brst import (
    EQUIVALENCE_CHECKS,
    Model,
    ModelError,
    antibracket_equivalence_suite,
    build_brst_operator,
    build_extended_lagrangian,
    build_gauge_operator,
    build_kt_operator,
    build_proper_solution,
    check_gauge_symmetry_conditions,
    check_master_equation,
    check_noether_identity,
    check_stage_identity,
    extended_lagrangian_residual,
)
from .derivations import is_nilpotent
from .jets import Verdict, is_dH_exact

REPORT_FORMAT = "ktbrst-report"
REPORT_VERSION = 1

PASS = "pass"
FAIL = "fail"
SKIPPED = "not evaluated"

CHECKS = (
    "euler_lagrange",
    "noether_identity",
    "stage_identity",
    "kt_nilpotency",
    "gauge_symmetry",
    "extended_lagrangian",
    "brst_nilpotency",
    "master_equation",
    "equivalence_suite",
)

MAX_WITNESSES = 20


@dataclass(frozen=True)
class CheckRecord:
    check: str
    status: str
    detail: str = ""
    witnesses: tuple = ()  # ((key, rendered), ...)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def comparable(self) -> dict:
        return {"check": self.check, "status": self.status, "detail": self.detail,
                "witnesses": [list(w) for w in self.witnesses]}


@dataclass(frozen=True)
class CheckReport:
    model: str
    description: str = ""
    notes: tuple = ()
    records: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(sorted(self.records, key=lambda r: r.check)))

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def record(self, check: str) -> CheckRecord:
        for r in self.records:
            if r.check == check:
                return r
        raise KeyError(check)

    def by_prefix(self, prefix: str) -> list:
        return [r for r in self.records if r.check == prefix or r.check.startswith(prefix + "/")]


def _witnesses(v: Verdict, coord_names) -> tuple:
    items = sorted(v.witness.items())
    out = [(str(k), p.render(coord_names)) for k, p in items[:MAX_WITNESSES]]
    if len(items) > MAX_WITNESSES:
        out.append(("...", f"{len(items) - MAX_WITNESSES} more"))
    return tuple(out)


def _from_verdict(check: str, v: Verdict, m: Model, detail: str = "") -> CheckRecord:
    return CheckRecord(check, PASS if v else FAIL, detail or v.reason, _witnesses(v, m.coord_names))


# individual checks ---------------------------------------------------------------

def _euler_lagrange(m: Model) -> list:
    wit = tuple((k, v.render(m.coord_names)) for k, v in sorted(m.el.items()) if v)
    return [CheckRecord("euler_lagrange", PASS, f"{len(wit)} nonzero components", wit)]


def _noether(m: Model) -> list:
    if not m.stages:
        return []
    if not m.lagrangian:
        return [CheckRecord("noether_identity", SKIPPED, "zero Lagrangian")]
    return [_from_verdict(f"noether_identity/{g}", check_noether_identity(m, m.linear_part(0, g)), m)
            for g in sorted(m.stages[0].generators)]


def _stages(m: Model) -> list:
    if len(m.stages) < 2:
        return [CheckRecord("stage_identity", SKIPPED, "no higher stages")]
    return [_from_verdict(f"stage_identity/{k}", check_stage_identity(m, k), m)
            for k in range(1, len(m.stages))]


def _kt(m: Model) -> list:
    return [_from_verdict("kt_nilpotency", is_nilpotent(build_kt_operator(m)), m)]


def _gauge(m: Model) -> list:
    u = build_gauge_operator(m)
    out = []
    for k, v in sorted(check_gauge_symmetry_conditions(m, u).items()):
        out.append(_from_verdict(f"gauge_symmetry/{k}", v, m))
    return out


def _extended(m: Model) -> list:
    Le = build_extended_lagrangian(m)
    v = is_dH_exact(extended_lagrangian_residual(m), m.fields)
    return [_from_verdict("extended_lagrangian", v, m,
                          f"{len(Le.coeff.terms)} terms" if v else "")]


def _brst(m: Model) -> list:
    return [_from_verdict("brst_nilpotency", is_nilpotent(build_brst_operator(m)), m)]


def _master(m: Model) -> list:
    return [_from_verdict("master_equation", check_master_equation(m, build_proper_solution(m)), m)]


def _suite(m: Model) -> list:
    res = antibracket_equivalence_suite(m, build_proper_solution(m))
    out = [_from_verdict(f"equivalence_suite/{k}", res[k], m) for k in EQUIVALENCE_CHECKS]
    agree = len({bool(v) for v in res.values()}) == 1
    out.append(CheckRecord("equivalence_suite/agreement", PASS if agree else FAIL,
                           "all four agree" if agree else "verdicts disagree"))
    return out


_RUNNERS = {
    "euler_lagrange": _euler_lagrange,
    "noether_identity": _noether,
    "stage_identity": _stages,
    "kt_nilpotency": _kt,
    "gauge_symmetry": _gauge,
    "extended_lagrangian": _extended,
    "brst_nilpotency": _brst,
    "master_equation": _master,
    "equivalence_suite": _suite,
}


def run_check(m: Model, check: str) -> list:
    """Records of one check; configuration errors become failed records."""
    t0 = time.perf_counter()
    try:
        recs = _RUNNERS[check](m)
    except (ModelError, AlgebraError, KeyError, ValueError) as exc:
        recs = [CheckRecord(check, FAIL, f"error: {exc}")]
    dt = time.perf_counter() - t0
    share = dt / max(len(recs), 1)
    return [CheckRecord(r.check, r.status, r.detail, r.witnesses, share) for r in recs]


def _run_from_source(args) -> list:
    from .dsl import parse_model

    src, check = args
    return run_check(parse_model(src), check)


def normalize_selection(selection: Optional[Iterable[str]]) -> list:
    if selection is None:
        return list(CHECKS)
    sel = []
    for s in selection:
        if s not in _RUNNERS:
            raise ValueError(f"unknown check {s!r}; choose from {', '.join(CHECKS)}")
        if s not in sel:
            sel.append(s)
    return sel


def run_checks(m: Model, selection: Optional[Sequence[str]] = None, jobs: int = 1) -> CheckReport:
    """Run the selected checks (all when ``selection`` is None).

    With ``jobs > 1`` checks run in worker processes; the model travels as
    its rendered source.
    """
    sel = normalize_selection(selection)
    records: list = []
    if jobs > 1 and len(sel) > 1:
        from .dsl import render_model

        src = render_model(m)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for recs in pool.map(_run_from_source, [(src, c) for c in sel]):
                records.extend(recs)
    else:
        for c in sel:
            records.extend(run_check(m, c))
    return CheckReport(m.name, m.description, m.notes, tuple(records))


# emission ---------------------------------------------------------------------

def comparable_section(r: CheckReport) -> dict:
    return {
        "model": r.model,
        "description": r.description,
        "notes": list(r.notes),
        "engine_version": __version__,
        "passed": r.passed,
        "records": [rec.comparable() for rec in r.records],
    }


def emit_report(r: CheckReport, fmt: str = "text", timing: bool = True) -> bytes:
    """Deterministic rendering; only the ``timing`` section varies between runs."""
    if fmt == "structured":
        doc = {"format": REPORT_FORMAT, "version": REPORT_VERSION,
               "comparable": comparable_section(r)}
        if timing:
            doc["timing"] = {rec.check: round(rec.seconds, 6) for rec in r.records}
        return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [f"model {r.model}  (engine {__version__})"]
    if r.description:
        lines.append(f"  {r.description}")
    lines.extend(f"  note: {n}" for n in r.notes)
    for rec in r.records:
        tag = {PASS: "PASS", FAIL: "FAIL", SKIPPED: "SKIP"}[rec.status]
        lines.append(f"{tag}  {rec.check}" + (f"  ({rec.detail})" if rec.detail else ""))
        for k, w in rec.witnesses:
            lines.append(f"      {k}: {w}")
    n_fail = sum(1 for rec in r.records if not rec.passed)
    lines.append(f"{len(r.records)} records, {n_fail} failed")
    if timing:
        lines.append("-- timing --")
        lines.extend(f"{rec.seconds:10.4f}s  {rec.check}" for rec in r.records)
    return ("\n".join(lines) + "\n").encode()
