"""Hypothesis strategies and brute-force oracles shared by the test modules."""

from hypothesis import strategies as st

from ktbrst.algebra import GHOST, FieldDecl, GradedPoly, MultiIndex, antifield_for, normalize
from ktbrst.jets import LinearDiffOp

Y = FieldDecl("y")
Z = FieldDecl("z")
C1 = FieldDecl("c1", 1, 1, 0, GHOST)
C2 = FieldDecl("c2", 1, 1, 0, GHOST)
YBAR = antifield_for(Y, "ybar")
C1BAR = antifield_for(C1, "c1bar")
EVEN = (Y, Z)
ODD = (C1, C2, YBAR)
ALL = EVEN + ODD + (C1BAR,)
PAIRED = (Y, C1, YBAR, C1BAR)

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(bool)


@st.composite
def jet_vars(draw, n=2, max_order=2, pool=ALL):
    f = draw(st.sampled_from(pool))
    coords = draw(st.lists(st.integers(0, n - 1), max_size=max_order))
    return f.var(*coords)


@st.composite
def raw_terms(draw, n=2, max_order=2, pool=ALL, max_factors=3, max_terms=4):
    out = []
    for _ in range(draw(st.integers(0, max_terms))):
        c = draw(coeffs)
        fs = draw(st.lists(jet_vars(n, max_order, pool), max_size=max_factors))
        out.append((c, fs))
    return out


def polys(n=2, max_order=2, pool=ALL, max_factors=3, max_terms=4):
    return raw_terms(n, max_order, pool, max_factors, max_terms).map(normalize)


@st.composite
def homogeneous_polys(draw, parity=None, **kw):
    p = draw(polys(**kw))
    if parity is None:
        parity = draw(st.integers(0, 1))
    return p.homogeneous_parts().get(parity, GradedPoly())


@st.composite
def linear_ops(draw, n=2, max_order=3, fields=("y", "c1"), pool=ALL, coeff_order=1):
    coeffs_ = {}
    for _ in range(draw(st.integers(1, 4))):
        name = draw(st.sampled_from(fields))
        idx = MultiIndex(draw(st.lists(st.integers(0, n - 1), max_size=max_order)))
        coeffs_[(name, idx)] = draw(polys(n, coeff_order, pool, max_factors=2, max_terms=2))
    return LinearDiffOp(coeffs_)


# oracles --------------------------------------------------------------------

def oracle_sort(factors):
    """Bubble sort counting odd transpositions: ``(sign, sorted)`` or None."""
    seq = list(factors)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            a, b = seq[j], seq[j + 1]
            if a > b:
                if a.parity and b.parity:
                    sign = -sign
                seq[j], seq[j + 1] = b, a
    for a, b in zip(seq, seq[1:]):
        if a == b and a.parity:
            return None
    return sign, tuple(seq)


def oracle_partial(p: GradedPoly, v, right=False):
    """Graded partial by scanning each monomial position."""
    acc = []
    for mono, c in p.items():
        for i, f in enumerate(mono):
            if f != v:
                continue
            side = mono[i + 1:] if right else mono[:i]
            n_odd = sum(x.parity for x in side)
            sign = -1 if (v.parity and n_odd % 2) else 1
            acc.append((sign * c, mono[:i] + mono[i + 1:]))
    return normalize(acc)

