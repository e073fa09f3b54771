import json
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from ktbrst.cli import main
from ktbrst.dsl import DslError, DslWarning, parse_model, parse_model_with_diagnostics, render_model
from ktbrst.models import BUILTIN_MODELS, build_yang_mills, builtin_model, su2
from ktbrst.report import CHECKS, FAIL, PASS, emit_report, run_checks

FREE = """\
model "free"
base 1
coords t
field y parity=even
antifield ybar of y
lagrangian: 0
"""

SMALL = ["yang-mills:u1:n2", "bf:n3p1q1"]


def _ym_without_xi(n=2):
    src = render_model(build_yang_mills(su2(), n))
    return "\n".join(line for line in src.splitlines() if not line.startswith("xi "))


# parsing ---------------------------------------------------------------------------

def test_minimal_source():
    m = parse_model(FREE)
    assert m.base_dim == 1 and m.coord_names == ("t",)
    assert not m.lagrangian and not m.stages
    assert [f.name for f in m.fields] == ["y", "ybar"]


def test_expression_grammar():
    src = FREE.replace("lagrangian: 0", "let k = y[t]^2\nlagrangian: 1/2*k - d(y*y, t)\n  + (y - 3)*(y + 3)")
    m = parse_model(src)
    y = m.field("y")
    assert m.lagrangian == y(0) ** 2 * __import__("fractions").Fraction(1, 2) \
        - 2 * y() * y(0) + y() * y() - 9


@pytest.mark.parametrize("name", BUILTIN_MODELS)
def test_round_trip_builtins(name):
    m = builtin_model(name)
    src = render_model(m)
    again = parse_model(src)
    assert again == m
    assert render_model(again) == src


def test_yang_mills_source_matches_constructor():
    m = build_yang_mills(su2(), 3)
    assert render_model(parse_model(render_model(m))) == render_model(m)


def test_odd_square_warns_and_vanishes():
    src = FREE.replace("lagrangian: 0",
                       "ghost c parity=odd gh=1\nantifield cbar of c\nlagrangian: c*c + y")
    m, diags = parse_model_with_diagnostics(src)
    assert m.lagrangian == m.field("y")()
    assert diags and "odd" in diags[0].message
    with pytest.warns(DslWarning):
        parse_model(src)


@pytest.mark.parametrize("src,line,kind", [
    ("model \"x\"\nbase 1\ncoords t\nfield y parity=even\nlagrangian: y*)\n", 5, "syntax"),
    ("model \"x\"\nbase 1\ncoords t\nlagrangian: z\n", 4, "semantic"),
    ("model \"x\"\nbase 1\ncoords t\nfield y parity=even\nlagrangian: y[s]\n", 5, "semantic"),
    ("model \"x\"\nbase 2\ncoords t\n", 3, "semantic"),
    ("model \"x\"\nbase 1\ncoords t\nfield y parity=even\nfield y parity=odd\n", 5, "semantic"),
    ("model \"x\"\nbase 1\ncoords t\nfield y parity=even\nlagrangian: 1/0*y\n", 5, "semantic"),
    ("model \"x\"\nfrobnicate 3\n", 2, "syntax"),
    ("model \"x\"\nbase 1\ncoords t\nfield y parity=even\nlagrangian: y $ y\n", 5, "lexical"),
])
def test_errors_carry_positions(src, line, kind):
    with pytest.raises(DslError) as info:
        parse_model(src)
    assert info.value.line == line
    assert info.value.kind == kind
    assert info.value.col is not None


def test_grading_mismatch_is_reported():
    src = FREE.replace("lagrangian: 0",
                       "ghost c parity=odd gh=1\nantifield cbar of c\nlagrangian: 0\nstage 0 cbar: y")
    with pytest.raises(DslError):
        parse_model(src)


_ALPHABET = "abcy[]()*+-^/=:,.\n #\"01239 tdlmxgfob_"


@given(st.text(alphabet=_ALPHABET, max_size=120))
@settings(max_examples=300, deadline=None)
def test_fuzz_only_diagnostics(text):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            parse_model(text)
        except DslError:
            pass


@given(st.integers(0, len(FREE)), st.text(alphabet=_ALPHABET, min_size=1, max_size=8))
@settings(max_examples=200, deadline=None)
def test_fuzz_mutations_of_valid_source(pos, junk):
    text = FREE[:pos] + junk + FREE[pos:]
    try:
        parse_model(text)
    except DslError:
        pass


# reports --------------------------------------------------------------------------------

def test_empty_selection():
    r = run_checks(builtin_model("bf:n3p1q1"), [])
    assert r.records == () and r.passed


def test_unknown_check_rejected():
    with pytest.raises(ValueError):
        run_checks(builtin_model("bf:n3p1q1"), ["nope"])


@pytest.mark.parametrize("name", SMALL)
def test_all_checks_pass_on_small_models(name):
    r = run_checks(builtin_model(name))
    assert r.passed, emit_report(r).decode()
    assert {rec.check.split("/")[0] for rec in r.records} == set(CHECKS)


def test_missing_xi_fails_master_equation_with_witness():
    m = parse_model(_ym_without_xi())
    r = run_checks(m, ["master_equation", "brst_nilpotency", "noether_identity"])
    assert r.record("master_equation").status == FAIL
    assert r.record("master_equation").witnesses
    assert r.record("brst_nilpotency").status == FAIL
    assert all(rec.status == PASS for rec in r.by_prefix("noether_identity"))


def test_structured_report_is_deterministic():
    m = builtin_model("yang-mills:u1:n2")
    a = json.loads(emit_report(run_checks(m), "structured"))
    b = json.loads(emit_report(run_checks(m), "structured"))
    assert a["format"] == "ktbrst-report" and a["version"] == 1
    assert json.dumps(a["comparable"], sort_keys=True) == json.dumps(b["comparable"], sort_keys=True)
    assert "timing" in a
    assert emit_report(run_checks(m), "structured", timing=False) == \
        emit_report(run_checks(m), "structured", timing=False)


def test_parallel_matches_serial():
    m = builtin_model("bf:n3p1q1")
    serial = emit_report(run_checks(m), "structured", timing=False)
    parallel = emit_report(run_checks(m, jobs=2), "structured", timing=False)
    assert serial == parallel


# CLI ---------------------------------------------------------------------------------------

def test_cli_list_models(capsys):
    assert main(["list-models"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in BUILTIN_MODELS)


def test_cli_check_pass(capsys):
    assert main(["check", "yang-mills:u1:n2", "--no-timing"]) == 0
    out = capsys.readouterr().out
    assert "0 failed" in out and "timing" not in out


def test_cli_check_fail(tmp_path, capsys):
    path = tmp_path / "ym.ktb"
    path.write_text(_ym_without_xi(), encoding="utf-8")
    code = main(["check", str(path), "--only", "master_equation,brst_nilpotency",
                 "--format", "structured"])
    assert code == 1
    doc = json.loads(capsys.readouterr().out)
    recs = doc["comparable"]["records"]
    assert [r["status"] for r in recs] == ["fail", "fail"]
    assert all(r["witnesses"] for r in recs)


def test_cli_usage_errors(tmp_path, capsys):
    assert main([]) == 2
    assert main(["check", "no-such-file.ktb"]) == 2
    assert main(["check", "bf:n3p1q1", "--only", "bogus"]) == 2
    assert main(["check", "bf:n3p1q1", "--jobs", "0"]) == 2
    bad = tmp_path / "bad.ktb"
    bad.write_text("model \"x\"\nbase 1\ncoords t\nlagrangian: q\n", encoding="utf-8")
    assert main(["check", str(bad)]) == 2
    assert "4:" in capsys.readouterr().err


def test_cli_render_and_dump(tmp_path, capsys):
    assert main(["render", "bf:n3p1q1"]) == 0
    src = capsys.readouterr().out
    path = tmp_path / "bf.ktb"
    path.write_text(src, encoding="utf-8")
    assert parse_model(src) == builtin_model("bf:n3p1q1")
    assert main(["dump-el", str(path)]) == 0
    out = capsys.readouterr().out
    assert out.count("E[") == len(builtin_model("bf:n3p1q1").fields)


def test_cli_empty_only(capsys):
    assert main(["check", "bf:n3p1q1", "--only", "", "--no-timing"]) == 0
    assert "0 records" in capsys.readouterr().out
