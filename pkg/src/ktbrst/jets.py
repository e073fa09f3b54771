"""Total derivatives, variational derivatives and formal adjoints."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial
from typing import Iterable, Mapping, Optional, Sequence, Union

from ._backend import kernel
from .algebra import (
    FieldDecl,
    GradedPoly,
    JetVar,
    MultiIndex,
    as_poly,
    jet,
    partial_right,
    prolong,
)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check; falsy on failure. ``witness`` holds nonzero residuals."""

    passed: bool
    witness: dict = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.passed

    def rendered(self, coord_names=None) -> list[str]:
        return [f"{k}: {v.render(coord_names)}" for k, v in sorted(self.witness.items())]


FieldLike = Union[FieldDecl, JetVar]


def base_var(f: FieldLike) -> JetVar:
    if isinstance(f, FieldDecl):
        return f.var()
    if isinstance(f, JetVar):
        return f.base
    raise TypeError(f"expected FieldDecl or JetVar, got {type(f).__name__}")


# total derivatives ---------------------------------------------------------

def total_derivative(p, coord: int) -> GradedPoly:
    """``d_λ p``; explicit dependence on the base coordinates is not modelled."""
    p = as_poly(p)
    if p.is_zero:
        return p
    shift = {v: prolong(v, coord) for v in p.variables()}
    return GradedPoly(kernel.replace_each(p._terms, shift))


def total_derivative_multi(p, index: Iterable[int]) -> GradedPoly:
    out = as_poly(p)
    for c in index:
        if out.is_zero:
            break
        out = total_derivative(out, c)
    return out


# variational derivatives ---------------------------------------------------

class EulerLagrange(Mapping):
    """Euler–Lagrange components keyed by field name."""

    def __init__(self, components: Mapping[str, GradedPoly]):
        self._c = dict(components)

    def __getitem__(self, name):
        return self._c[name]

    def __iter__(self):
        return iter(self._c)

    def __len__(self):
        return len(self._c)

    @property
    def components(self) -> dict:
        return dict(self._c)

    def nonzero(self) -> dict:
        return {k: v for k, v in self._c.items() if v}

    @property
    def is_zero(self) -> bool:
        return not any(self._c.values())


def _vars_of(p: GradedPoly, base: JetVar) -> list[JetVar]:
    return sorted(v for v in p.variables() if v.name == base.name)


def _variational(p: GradedPoly, f: FieldLike, right: bool) -> GradedPoly:
    base = base_var(f)
    acc: dict = {}
    for v in _vars_of(p, base):
        part = GradedPoly(kernel.partial(p._terms, v, right))
        term = total_derivative_multi(part, v.coords)
        if v.order % 2:
            term = -term
        for m, c in term.items():
            acc[m] = acc.get(m, 0) + c
    return GradedPoly({m: c for m, c in acc.items() if c})


def variational_derivative(L, f: FieldLike) -> GradedPoly:
    """Left variational derivative ``Σ (-1)^|Λ| d_Λ(∂^Λ_A 𝓛)``."""
    return _variational(as_poly(L), f, right=False)


def variational_derivative_right(L, f: FieldLike) -> GradedPoly:
    """Right variational derivative ``Σ (-1)^|Λ| d_Λ(𝓛 ∂←^Λ_A)``."""
    return _variational(as_poly(L), f, right=True)


def euler_lagrange(L, fields: Optional[Sequence[FieldLike]] = None) -> EulerLagrange:
    """Euler–Lagrange components of a density.

    With ``fields`` omitted, the fields occurring in ``L`` are used.
    """
    p = as_poly(L)
    if fields is None:
        bases = sorted(p.fields())
    else:
        bases = [base_var(f) for f in fields]
    return EulerLagrange({b.name: _variational(p, b, right=False) for b in bases})


def is_dH_exact(omega, fields: Optional[Sequence[FieldLike]] = None) -> Verdict:
    """Decide total-divergence exactness through δ-closedness.

    On a contractible base a density is ``d_H``-exact iff all its
    Euler–Lagrange components vanish. The antiderivative is not built.
    """
    el = euler_lagrange(omega, fields)
    bad = el.nonzero()
    if bad:
        return Verdict(False, bad, "nonzero Euler-Lagrange residual")
    return Verdict(True)


# linear differential operators --------------------------------------------

class LinearDiffOp:
    """Coefficients ``f^{A,Λ}`` of ``Σ f^{A,Λ} d_Λ (·)_A``.

    Keys are ``(field name, MultiIndex)``; zero coefficients are dropped.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Optional[Mapping] = None):
        c = {}
        for (name, idx), val in (coeffs or {}).items():
            val = as_poly(val)
            if val:
                key = (name, MultiIndex(idx))
                c[key] = c[key] + val if key in c else val
        self._c = {k: v for k, v in c.items() if v}

    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def items(self):
        return sorted(self._c.items())

    def fields(self) -> list[str]:
        return sorted({name for name, _ in self._c})

    def for_field(self, name: str) -> dict:
        return {idx: v for (n, idx), v in self._c.items() if n == name}

    @property
    def max_order(self) -> int:
        return max((len(idx) for _, idx in self._c), default=0)

    def __getitem__(self, key):
        name, idx = key
        return self._c.get((name, MultiIndex(idx)), GradedPoly())

    def __eq__(self, other):
        if not isinstance(other, LinearDiffOp):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        body = ", ".join(f"({n}, {tuple(i)}): {v.render()}" for (n, i), v in self.items())
        return f"LinearDiffOp({{{body}}})"

    def apply(self, targets: Mapping[str, GradedPoly]) -> GradedPoly:
        """``Σ f^{A,Λ} d_Λ targets[A]``."""
        acc = GradedPoly()
        for (name, idx), f in self.items():
            if name not in targets:
                raise KeyError(name)
            acc = acc + f * total_derivative_multi(targets[name], idx)
        return acc


# fresh even field used as the formal argument of an operator
_TEST_FIELD = FieldDecl("adjoint_test_field_", 0, 0, 0)


def _adjoint_single(coeffs: Mapping[MultiIndex, GradedPoly]) -> dict:
    phi = _TEST_FIELD.var()
    expr = GradedPoly()
    for idx, f in coeffs.items():
        term = total_derivative_multi(f * GradedPoly.var(phi), idx)
        expr = expr - term if len(idx) % 2 else expr + term
    out = {}
    for v in sorted(expr.variables()):
        if v.name == phi.name:
            out[MultiIndex(v.coords)] = partial_right(expr, v)
    return out


def adjoint(op: LinearDiffOp) -> LinearDiffOp:
    """Formal adjoint, by expanding ``Σ (-1)^|Λ| d_Λ(f^Λ φ)`` against a test field."""
    out = {}
    for name in op.fields():
        for idx, v in _adjoint_single(op.for_field(name)).items():
            out[(name, idx)] = v
    return LinearDiffOp(out)


def _multi_binom(total: MultiIndex, part: MultiIndex, n: int) -> int:
    t = total.counts(n)
    s = part.counts(n)
    out = 1
    for a, b in zip(t, s):
        out *= comb(a, b)
    return out


def _sub_multisets(idx: MultiIndex):
    counts: dict = {}
    for c in idx:
        counts[c] = counts.get(c, 0) + 1
    keys = sorted(counts)

    def rec(i):
        if i == len(keys):
            yield ()
            return
        k = keys[i]
        for take in range(counts[k] + 1):
            for rest in rec(i + 1):
                yield (k,) * take + rest

    for s in rec(0):
        yield MultiIndex(s)


def adjoint_closed_form(op: LinearDiffOp, convention: str = "componentwise") -> LinearDiffOp:
    """Adjoint from the explicit sum over ``Σ`` with ``M = Σ + Λ``.

    ``convention="componentwise"`` weights by the multi-index binomial
    ``Π_i C(M_i, Σ_i)``; ``"total_degree"`` uses ``|M|!/(|Σ|!|Λ|!)``. The two
    agree on a one-dimensional base; only the first equals :func:`adjoint`
    when the base has two or more coordinates.
    """
    if convention not in ("componentwise", "total_degree"):
        raise ValueError(f"unknown convention {convention!r}")
    out: dict = {}
    n = 1 + max((c for _, idx in op.coeffs for c in idx), default=0)
    for (name, total), f in op.items():
        for sig in _sub_multisets(total):
            lam = total.minus(sig)
            if convention == "componentwise":
                w = _multi_binom(total, sig, n)
            else:
                w = factorial(len(total)) // (factorial(len(sig)) * factorial(len(lam)))
            term = total_derivative_multi(f, sig) * w
            if len(total) % 2:
                term = -term
            key = (name, lam)
            out[key] = out[key] + term if key in out else term
    return LinearDiffOp(out)


def linear_part_of(p, antifields: Sequence[FieldLike]) -> LinearDiffOp:
    """Coefficients of ``p = Σ f^{A,Λ} w_{ΛA}`` for the listed antifield-like bases.

    Only terms containing exactly one factor from ``antifields`` contribute;
    the coefficient is the right partial with respect to that factor, so
    the antifield sits to the right as in ``Φ^{A,Λ} s̄_{ΛA}``. Keys use the
    antifield's ``dual_of`` when available, else its own name.
    """
    p = as_poly(p)
    wanted = {base_var(a).name: a for a in antifields}
    key_of = {}
    for name, a in wanted.items():
        key_of[name] = a.dual_of if isinstance(a, FieldDecl) and a.dual_of else name
    linear = p.select(lambda m: sum(1 for v in m if v.name in wanted) == 1)
    out = {}
    for v in sorted(linear.variables()):
        if v.name in wanted:
            out[(key_of[v.name], MultiIndex(v.coords))] = partial_right(linear, v)
    return LinearDiffOp(out)


def jet_of(f: FieldLike, idx: Iterable[int] = ()) -> JetVar:
    return jet(base_var(f), tuple(sorted(idx)))
