"""Vertical graded derivations with implicit jet prolongation."""

from __future__ import annotations

from typing import Mapping, Optional

from ._backend import kernel
from .algebra import MIXED, AlgebraError, Density, GradedPoly, JetVar, as_poly
from .jets import (
    FieldLike,
    Verdict,
    base_var,
    euler_lagrange,
    is_dH_exact,
    total_derivative_multi,
)

LEFT = "left"
RIGHT = "right"


def _total_gh(v: JetVar) -> int:
    return v.gh - v.ant


class Derivation:
    """``υ = Σ υ^A ∂_A`` acting through its jet prolongation.

    Components are keyed by the zero-order jet variable of each field.
    ``chirality="right"`` denotes ``Σ ∂←_A υ^A``. Parity and ghost shift
    (change of ghost number minus antifield number) are inferred when not
    given and must be common to every nonzero component.
    """

    __slots__ = ("_comp", "chirality", "parity", "ghost_shift")

    def __init__(self, components: Optional[Mapping[FieldLike, object]] = None,
                 chirality: str = LEFT, parity: Optional[int] = None,
                 ghost_shift: Optional[int] = None):
        if chirality not in (LEFT, RIGHT):
            raise AlgebraError(f"chirality must be 'left' or 'right', got {chirality!r}")
        comp = {}
        for f, val in (components or {}).items():
            val = as_poly(val)
            if val:
                b = base_var(f)
                comp[b] = comp[b] + val if b in comp else val
        comp = {b: v for b, v in comp.items() if v}
        for b, v in comp.items():
            p = v.parity()
            g = v.total_ghost_number()
            if p == MIXED or g == MIXED:
                raise AlgebraError(f"component on {b.name} is not homogeneous: {v.render()}")
            shift = (p - b.parity) % 2
            if parity is None:
                parity = shift
            elif shift != parity:
                raise AlgebraError(
                    f"component on {b.name} shifts parity by {shift}, derivation declared {parity}")
            gs = g - _total_gh(b)
            if ghost_shift is None:
                ghost_shift = gs
            elif gs != ghost_shift:
                raise AlgebraError(
                    f"component on {b.name} shifts ghost number by {gs}, expected {ghost_shift}")
        object.__setattr__(self, "_comp", dict(sorted(comp.items())))
        object.__setattr__(self, "chirality", chirality)
        object.__setattr__(self, "parity", 0 if parity is None else parity % 2)
        object.__setattr__(self, "ghost_shift", 0 if ghost_shift is None else ghost_shift)

    def __setattr__(self, *_):
        raise AttributeError("Derivation is immutable")

    @property
    def components(self) -> dict:
        return dict(self._comp)

    def component(self, f: FieldLike) -> GradedPoly:
        return self._comp.get(base_var(f), GradedPoly())

    def by_name(self) -> dict:
        return {b.name: v for b, v in self._comp.items()}

    def __bool__(self):
        return bool(self._comp)

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return (self._comp, self.chirality) == (other._comp, other.chirality)

    def __hash__(self):
        return hash((frozenset(self._comp.items()), self.chirality))

    def __repr__(self):
        body = ", ".join(f"{b.name}: {v.render()}" for b, v in self._comp.items())
        return f"Derivation({self.chirality}, parity={self.parity}, {{{body}}})"

    def to_left(self) -> "Derivation":
        """Left form ``υ^l = (-1)^{[υ][A]} υ^A ∂_A`` of a right derivation."""
        if self.chirality == LEFT:
            return self
        comp = {b: (-v if self.parity and b.parity else v) for b, v in self._comp.items()}
        return Derivation(comp, LEFT, self.parity, self.ghost_shift)

    def __add__(self, other: "Derivation") -> "Derivation":
        if self.chirality != other.chirality:
            raise AlgebraError("cannot add derivations of different chirality")
        if self._comp and other._comp and self.parity != other.parity:
            raise AlgebraError("cannot add derivations of different parity")
        comp = dict(self._comp)
        for b, v in other._comp.items():
            comp[b] = comp[b] + v if b in comp else v
        parity = self.parity if self._comp else other.parity
        return Derivation(comp, self.chirality, parity)

    def __neg__(self):
        return Derivation({b: -v for b, v in self._comp.items()}, self.chirality,
                          self.parity, self.ghost_shift)

    def __sub__(self, other):
        return self + (-other)


def _prolonged(d: Derivation, p: GradedPoly) -> dict:
    """Term maps of ``d_Λ υ^A`` for every jet variable of ``p`` that ``d`` moves."""
    comp = d._comp
    out = {}
    cache: dict = {}
    for v in p.variables():
        b = v.base
        if b not in comp:
            continue
        key = (b, v.coords)
        if key not in cache:
            cache[key] = total_derivative_multi(comp[b], v.coords)._terms
        if cache[key]:
            out[v] = cache[key]
    return out


def _apply_left(d: Derivation, p: GradedPoly) -> GradedPoly:
    if p.is_zero or not d._comp:
        return GradedPoly()
    comp = _prolonged(d, p)
    if not comp:
        return GradedPoly()
    return GradedPoly(kernel.apply_left(p._terms, comp))


def apply(d: Derivation, p):
    """Apply the prolongation of ``d`` to a polynomial or density.

    Right derivations go through their left form:
    ``υ(f) = (-1)^{[υ][f]} υ^l(f)`` on each homogeneous part ``f``.
    """
    if isinstance(p, Density):
        return Density(apply(d, p.coeff))
    p = as_poly(p)
    if d.chirality == LEFT:
        return _apply_left(d, p)
    left = d.to_left()
    out = GradedPoly()
    for par, part in p.homogeneous_parts().items():
        r = _apply_left(left, part)
        out = out + (-r if d.parity and par else r)
    return out


def apply_right_direct(d: Derivation, p) -> GradedPoly:
    """Right derivation with each prolonged component multiplied on the right.

    Independent of :func:`apply`'s conversion route; used to cross-check it.
    """
    from .algebra import partial_right

    p = as_poly(p)
    out = GradedPoly()
    for v in sorted(p.variables()):
        b = v.base
        if b not in d._comp:
            continue
        out = out + partial_right(p, v) * total_derivative_multi(d._comp[b], v.coords)
    return out


def symmetry_density(d: Derivation, L) -> GradedPoly:
    """``υ⌋δL`` paired through the left form: ``Σ_A υ^l_A 𝓔_A``."""
    left = d.to_left()
    L = as_poly(L)
    el = euler_lagrange(L, list(left._comp))
    acc = GradedPoly()
    for b, v in left._comp.items():
        acc = acc + v * el[b.name]
    return acc


def is_variational_symmetry(d: Derivation, L) -> Verdict:
    dens = symmetry_density(d, L)
    v = is_dH_exact(dens)
    if v:
        return Verdict(True)
    witness = {"density": dens}
    witness.update({f"E[{k}]": r for k, r in v.witness.items()})
    return Verdict(False, witness, "contraction with the Euler-Lagrange operator is not a total divergence")


def compose_on_components(d1: Derivation, d2: Derivation) -> dict:
    """``{A: d1(υ2^A)}`` for every component of ``d2``."""
    return {b.name: apply(d1, v) for b, v in d2._comp.items()}


def is_nilpotent(d: Derivation) -> Verdict:
    """Odd ``d`` is nilpotent iff it annihilates its own components."""
    if d.parity == 0 and d:
        return Verdict(False, {}, "even derivation cannot be nilpotent")
    bad = {k: v for k, v in compose_on_components(d, d).items() if v}
    if bad:
        return Verdict(False, bad, "derivation does not annihilate its components")
    return Verdict(True)
