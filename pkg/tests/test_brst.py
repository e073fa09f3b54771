from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings

from ktbrst.algebra import GHOST, FieldDecl, GradedPoly, antifield_for
from ktbrst.brst import (
    EQUIVALENCE_CHECKS,
    Model,
    ModelError,
    NoetherStage,
    antibracket,
    antibracket_equivalence_suite,
    antifield_derivation,
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
    field_derivation,
    koszul_differential,
    proper_solution_residual,
)
from ktbrst.derivations import Derivation, is_nilpotent
from ktbrst.jets import LinearDiffOp, is_dH_exact
from ktbrst.models import BFSpec, build_bf
from strategies import PAIRED, homogeneous_polys

Y = FieldDecl("y")
YB = antifield_for(Y, "ybar")
C = FieldDecl("c", 1, 1, 0, GHOST)
CB = antifield_for(C, "cbar")
y, yb, c, cb = Y(), YB(), C(), CB()
L_FREE = Fraction(1, 2) * Y(0) ** 2 - Fraction(1, 2) * y * y


def scalar_model(**kw):
    return Model("scalar", 1, (Y, YB), L_FREE, **kw)


def pure_gauge_model():
    # L = 0 with the trivial generator Δ = ybar
    return Model("pure-gauge", 1, (Y, C, YB, CB), GradedPoly(),
                 stages=(NoetherStage(0, {"cbar": yb}),))


# model structure -------------------------------------------------------------------

def test_model_validation():
    with pytest.raises(ModelError):
        Model("m", 1, (Y, Y), GradedPoly())
    with pytest.raises(ModelError):
        Model("m", 1, (Y,), c * c + yb)  # undeclared fields
    with pytest.raises(ModelError):
        Model("m", 1, (Y, C), c)  # odd Lagrangian
    with pytest.raises(ModelError):
        Model("m", 1, (Y, YB), Y(1))  # coordinate beyond the base
    with pytest.raises(ModelError):
        Model("m", 1, (Y, C, YB, CB), GradedPoly(), stages=(NoetherStage(0, {"cbar": y}),))
    with pytest.raises(ModelError):
        Model("m", 1, (Y, C, YB, CB), GradedPoly(), stages=(NoetherStage(1, {"cbar": yb}),))
    with pytest.raises(ModelError):
        Model("m", 1, (Y, C, YB, CB), GradedPoly(), brst_xi=Derivation({Y: c}))
    bad_bar = FieldDecl("ybar", 0, 0, 1, "antifield", "y")
    with pytest.raises(ModelError):
        Model("m", 1, (Y, bad_bar), GradedPoly())


def test_dual_pairs_and_lookup():
    m = pure_gauge_model()
    assert [(a.name, b.name) for a, b in m.dual_pairs()] == [("y", "ybar"), ("c", "cbar")]
    assert m.antifield_of("c") == CB
    assert m.ghost_for("cbar") == C
    assert m.stage_antifields(-1) == [YB]
    with pytest.raises(ModelError):
        Model("m", 1, (Y,), GradedPoly()).dual_pairs()
    with pytest.raises(ModelError):
        m.field("nope")


# Noether identities and the KT operator ----------------------------------------------

def test_noether_identity_examples():
    m = scalar_model()
    assert check_noether_identity(m, LinearDiffOp())
    v = check_noether_identity(m, LinearDiffOp({("y", ()): GradedPoly.const(1)}))
    assert not v and v.witness["residual"] == -Y(0, 0) - y
    with pytest.raises(ModelError):
        check_noether_identity(pure_gauge_model(), LinearDiffOp({("c", ()): y}))


def test_kt_operator_without_stages_is_koszul():
    m = scalar_model()
    kt = build_kt_operator(m)
    assert kt == koszul_differential(m)
    assert kt.by_name() == {"ybar": -Y(0, 0) - y}
    assert is_nilpotent(kt)


def test_stage_identity_needs_data():
    with pytest.raises(ModelError):
        check_stage_identity(pure_gauge_model(), 1)


def test_trivial_gauge_operator():
    m = pure_gauge_model()
    assert build_gauge_operator(m).by_name() == {"y": c}
    assert check_noether_identity(m, m.linear_part(0, "cbar"))
    assert is_nilpotent(build_kt_operator(m))
    assert check_master_equation(m, build_proper_solution(m))


def test_extended_lagrangian_without_stages_is_l():
    m = scalar_model()
    assert build_extended_lagrangian(m).coeff == L_FREE
    assert build_proper_solution(m).coeff == L_FREE


def test_gauge_conditions_with_alpha_witnesses():
    m = build_bf(BFSpec(4, 1, 2))
    zero_alpha = replace(m, stages=(m.stages[0], NoetherStage(1, m.stages[1].generators,
                                                              {"A_0": GradedPoly()})))
    res = check_gauge_symmetry_conditions(zero_alpha)
    assert res[1] and "witnesses" in res[1].reason
    wrong = replace(m, stages=(m.stages[0], NoetherStage(1, m.stages[1].generators,
                                                         {"B_01": m.field("Abar_0")() * m.field("A_1")()})))
    res = check_gauge_symmetry_conditions(wrong)
    assert res[0] and not res[1]


# antibracket -----------------------------------------------------------------------

def test_antibracket_of_antifield_free_densities_vanishes():
    m = pure_gauge_model()
    assert not antibracket(L_FREE, y * c * C(0), m)
    assert check_master_equation(scalar_model(), L_FREE)


def test_original_lagrangian_derivations():
    m = scalar_model()
    assert not field_derivation(m, L_FREE)
    assert antifield_derivation(m, L_FREE) == koszul_differential(m)
    res = antibracket_equivalence_suite(m, L_FREE)
    assert tuple(res) == EQUIVALENCE_CHECKS and all(res.values())


def test_breaking_term_fails_uniformly():
    m = Model("broken", 1, (Y, C, YB, CB), L_FREE)
    res = antibracket_equivalence_suite(m, L_FREE + c * yb)
    assert not any(res.values())
    assert all(v.witness for v in res.values())


@given(homogeneous_polys(parity=0, pool=PAIRED), homogeneous_polys(parity=1, pool=PAIRED))
@settings(max_examples=40)
def test_antibracket_symmetry(p, q):
    m = Model("pool", 2, PAIRED, GradedPoly())
    for a, b in ((p, q), (p, p), (q, q)):
        # the sign factor (-1)^{[Q]([Q]+1)} is +1, so the bracket is symmetric
        assert antibracket(a, b, m) == antibracket(b, a, m)


# consistency of the extended Lagrangians ----------------------------------------------

@pytest.mark.parametrize("spec", [(3, 1, 1), (4, 1, 2), (5, 2, 2)])
def test_bf_lagrangian_identities(spec):
    m = build_bf(BFSpec(*spec))
    assert is_dH_exact(extended_lagrangian_residual(m), m.fields)
    assert is_dH_exact(proper_solution_residual(m), m.fields)
    assert build_brst_operator(m) == build_gauge_operator(m)
