from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ktbrst.algebra import (
    MIXED,
    AlgebraError,
    Density,
    FieldDecl,
    GradedPoly,
    MultiIndex,
    antifield_for,
    mul,
    normalize,
    partial_left,
    partial_right,
    renormalize,
)
from strategies import (
    C1,
    C2,
    Y,
    YBAR,
    Z,
    homogeneous_polys,
    jet_vars,
    oracle_partial,
    oracle_sort,
    polys,
    raw_terms,
)

y, z, c1, c2 = Y(), Z(), C1(), C2()


# examples --------------------------------------------------------------------

def test_even_factors_commute():
    assert normalize([(1, [C1.var(), Y.var()])]) == normalize([(1, [Y.var(), C1.var()])])
    assert list(normalize([(1, [C1.var(), Y.var()])]).items())[0][0] == (Y.var(), C1.var())


def test_odd_transposition_flips_sign():
    p = normalize([(1, [C2.var(), C1.var()])])
    assert p == -normalize([(1, [C1.var(), C2.var()])])


def test_odd_square_vanishes():
    assert normalize([(1, [C1.var(), C1.var()])]).is_zero
    assert (c1 * c1).is_zero


def test_mul_examples():
    assert mul(y, y) == y ** 2
    assert mul(c1, c2) + mul(c2, c1) == 0
    assert mul(Fraction(2, 3) * Y(0), 3 * c1) == 2 * Y(0) * c1


def test_partial_examples():
    assert partial_left(y * y, Y.var()) == 2 * y
    assert partial_left(c1 * c2, C2.var()) == -c1
    assert partial_left(Y(0) * c1, Y.var()).is_zero
    assert partial_right(y * y, Y.var()) == 2 * y
    assert partial_right(c1 * c2, C1.var()) == -c2
    assert partial_right(c1 * c2, C2.var()) == c1


def test_render_format():
    assert Y(0, 0).render() == "y[x0,x0]"
    assert (2 * y * Y(0) - Fraction(1, 2) * c1).render() == "-1/2*c1 + 2*y*y[x0]"
    assert GradedPoly().render() == "0"
    assert (Y(1) ** 2).render(["t", "s"]) == "y[s]^2"


def test_gradings():
    assert (y * c1).parity() == 1
    assert (y * c1).ghost_number() == 1
    assert (y + c1).parity() == MIXED
    assert GradedPoly().parity() == 0
    assert (c1 * YBAR()).total_ghost_number() == 0
    assert YBAR().antifield_number() == 1


def test_multi_index():
    m = MultiIndex((1, 0, 0))
    assert m == MultiIndex((0, 0, 1))
    assert m.counts(2) == (2, 1)
    assert m.order == 3
    assert MultiIndex.from_counts((2, 1)) == m
    assert m + MultiIndex((1,)) == MultiIndex((1, 1, 0, 0))
    assert m.minus(MultiIndex((0, 1))) == MultiIndex((0,))
    assert m.minus(MultiIndex((1, 1))) is None
    with pytest.raises(AlgebraError):
        m.counts(1)


def test_field_decl_validation():
    with pytest.raises(AlgebraError):
        FieldDecl("y", parity=2)
    with pytest.raises(AlgebraError):
        FieldDecl("not an identifier")
    with pytest.raises(AlgebraError):
        FieldDecl("yb", 1, 0, 1, "antifield")  # no dual
    ghost = FieldDecl("c", 1, 2, 0, "ghost")
    bar = antifield_for(ghost, "cbar")
    assert (bar.parity, bar.antifield_number, bar.role) == (0, 3, "ghost_antifield")


def test_density_is_additive_and_immutable():
    d = Density(y) + Density(c1 * c2)
    assert d.coeff == y + c1 * c2
    assert (d * 2).coeff == 2 * y + 2 * c1 * c2
    with pytest.raises(AttributeError):
        d.coeff = y


def test_monomial_view():
    p = 3 * y ** 2 * c1
    (m,) = list(p.monomials())
    assert m.coeff == 3
    assert m.factors == ((Y.var(), 2), (C1.var(), 1))
    assert m.parity == 1


def test_non_rational_coefficients_rejected():
    with pytest.raises(TypeError):
        normalize([(0.5, [Y.var()])])


# properties --------------------------------------------------------------------

@given(raw_terms())
def test_normalize_matches_bubble_sort_oracle(raw):
    expected = {}
    for c, fs in raw:
        r = oracle_sort(fs)
        if r is not None:
            expected[r[1]] = expected.get(r[1], 0) + r[0] * c
    assert normalize(raw).terms == {m: c for m, c in expected.items() if c}


@given(polys())
def test_normalize_idempotent(p):
    assert renormalize(p) == p
    assert renormalize(renormalize(p)) == renormalize(p)


@given(homogeneous_polys(), homogeneous_polys())
def test_graded_commutativity(a, b):
    sign = -1 if a.parity() == 1 and b.parity() == 1 else 1
    assert mul(a, b) - sign * mul(b, a) == 0


@given(polys(max_terms=3), polys(max_terms=3), polys(max_terms=3))
@settings(max_examples=50)
def test_associative_and_distributive(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(homogeneous_polys(), polys(), jet_vars())
def test_graded_leibniz(a, b, v):
    sign = -1 if v.parity and a.parity() == 1 else 1
    assert partial_left(a * b, v) == partial_left(a, v) * b + sign * a * partial_left(b, v)


@given(polys(), jet_vars())
def test_partials_match_position_oracle(p, v):
    assert partial_left(p, v) == oracle_partial(p, v)
    assert partial_right(p, v) == oracle_partial(p, v, right=True)


@given(homogeneous_polys(), jet_vars())
def test_right_partial_conversion_rule(p, v):
    # partial_right = (-1)^{[v]([p]+1)} partial_left on homogeneous p
    sign = -1 if v.parity and (p.parity() + 1) % 2 else 1
    assert partial_right(p, v) == sign * partial_left(p, v)


@given(raw_terms(max_terms=1))
def test_odd_monomials_square_to_zero(raw):
    p = normalize(raw)
    if p and p.parity() == 1:
        assert (p * p).is_zero


@given(homogeneous_polys(), homogeneous_polys())
def test_grading_additivity(a, b):
    prod = a * b
    if not prod:
        return
    if MIXED not in (a.ghost_number(), b.ghost_number()):
        assert prod.ghost_number() == a.ghost_number() + b.ghost_number()
    if MIXED not in (a.antifield_number(), b.antifield_number()):
        assert prod.antifield_number() == a.antifield_number() + b.antifield_number()
    assert prod.parity() == (a.parity() + b.parity()) % 2


@given(polys(), st.permutations(range(4)))
def test_render_is_order_independent(p, perm):
    items = list(p.items())
    shuffled = GradedPoly(dict(items[i] for i in perm if i < len(items)) |
                          dict(items[len(perm):]))
    assert shuffled.render() == p.render()
