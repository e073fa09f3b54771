"""Noether identities, KT and gauge operators, extended Lagrangians and the master equation.

A :class:`Model` carries the complete field content (fields, ghosts and
their antifields), the original Lagrangian, the Noether generators stage by
stage and the optional ghost-polynomial BRST terms. Every check returns a
:class:`~ktbrst.jets.Verdict` whose witness holds exact residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence

from .algebra import (
    ANTIFIELD,
    FIELD,
    GHOST,
    GHOST_ANTIFIELD,
    Density,
    FieldDecl,
    GradedPoly,
    as_poly,
    jet,
)
from .derivations import (
    LEFT,
    RIGHT,
    Derivation,
    apply,
    compose_on_components,
    is_nilpotent,
    is_variational_symmetry,
)
from .jets import (
    EulerLagrange,
    LinearDiffOp,
    Verdict,
    adjoint,
    euler_lagrange,
    is_dH_exact,
    linear_part_of,
    variational_derivative,
    variational_derivative_right,
)


class ModelError(ValueError):
    """Inconsistent model data (unknown fields, grading mismatches, missing stages)."""


@dataclass(frozen=True)
class NoetherStage:
    """Generators of one reducibility stage.

    ``generators`` maps the name of each ghost-antifield ``c̄_{r_k}`` to the
    generator density coefficient ``Δ_{r_k}``. ``alpha`` optionally maps the
    names of the fields moved by ``u_(k-1)`` to witnesses ``α`` with
    ``u_(k)(u_(k-1)^t) = δ̄(α_t)`` (the on-shell gauge symmetry condition).
    """

    stage: int
    generators: Mapping[str, GradedPoly]
    alpha: Mapping[str, GradedPoly] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "generators",
                           {k: as_poly(v) for k, v in self.generators.items()})
        object.__setattr__(self, "alpha", {k: as_poly(v) for k, v in self.alpha.items()})


@dataclass(frozen=True)
class Model:
    name: str
    base_dim: int
    fields: tuple
    lagrangian: GradedPoly
    stages: tuple = ()
    brst_xi: Optional[Derivation] = None
    description: str = ""
    coord_names: tuple = ()
    notes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "lagrangian", as_poly(self.lagrangian))
        object.__setattr__(self, "notes", tuple(self.notes))
        if self.brst_xi is None:
            object.__setattr__(self, "brst_xi", Derivation({}, LEFT, 1, 1))
        if not self.coord_names:
            object.__setattr__(self, "coord_names",
                               tuple(f"x{i}" for i in range(self.base_dim)))
        self._validate()

    # lookup ----------------------------------------------------------------
    @cached_property
    def _by_name(self) -> dict:
        return {f.name: f for f in self.fields}

    def field(self, name: str) -> FieldDecl:
        try:
            return self._by_name[name]
        except KeyError:
            raise ModelError(f"unknown field {name!r}") from None

    @cached_property
    def _antifield_of(self) -> dict:
        return {f.dual_of: f for f in self.fields if f.is_antifield}

    def antifield_of(self, name: str) -> FieldDecl:
        try:
            return self._antifield_of[name]
        except KeyError:
            raise ModelError(f"{name!r} has no antifield") from None

    def dual(self, name: str) -> FieldDecl:
        return self.field(self.field(name).dual_of)

    def original_fields(self) -> list:
        return [f for f in self.fields if f.role == FIELD]

    def dual_pairs(self) -> list:
        """``(z, z̄)`` pairs; raises if a field, ghost or antifield is unpaired."""
        unpaired = [f.name for f in self.fields
                    if not f.is_antifield and f.name not in self._antifield_of]
        if unpaired:
            raise ModelError(f"unpaired field declarations: {', '.join(unpaired)}")
        return [(self.field(a.dual_of), a) for a in self.fields if a.is_antifield]

    @property
    def reducibility(self) -> int:
        """Stage count minus one (``-1`` for a non-degenerate model)."""
        return len(self.stages) - 1

    def stage_antifields(self, k: int) -> list:
        """Antifields whose generators belong to stage ``k``; ``k=-1`` gives ``s̄_A``."""
        if k == -1:
            return [f for f in self.fields if f.role == ANTIFIELD]
        if not 0 <= k < len(self.stages):
            raise ModelError(f"missing stage {k}")
        return [self.field(n) for n in self.stages[k].generators]

    def ghost_for(self, gen: str) -> FieldDecl:
        return self.dual(gen)

    # generator decomposition ----------------------------------------------
    def linear_part(self, k: int, gen: str) -> LinearDiffOp:
        """``Δ_{r_k}^{r_{k-1},Λ}`` keyed by the stage ``k-1`` field or ghost name."""
        return linear_part_of(self.stages[k].generators[gen], self.stage_antifields(k - 1))

    def h_part(self, k: int, gen: str) -> GradedPoly:
        """Terms of polynomial degree two or more in antifields."""
        return self.stages[k].generators[gen].select(lambda m: antifield_degree(m) >= 2)

    @cached_property
    def el(self) -> EulerLagrange:
        return euler_lagrange(self.lagrangian, self.fields)

    # validation -------------------------------------------------------------
    def _validate(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ModelError("duplicate field names")
        by = {f.name: f for f in self.fields}
        seen_duals = set()
        for f in self.fields:
            if not f.is_antifield:
                if f.antifield_number:
                    raise ModelError(f"{f.name}: only antifields carry antifield number")
                continue
            d = by.get(f.dual_of)
            if d is None:
                raise ModelError(f"{f.name}: dual {f.dual_of!r} is not declared")
            if d.is_antifield:
                raise ModelError(f"{f.name}: dual {d.name} is itself an antifield")
            if f.dual_of in seen_duals:
                raise ModelError(f"{d.name} has more than one antifield")
            seen_duals.add(f.dual_of)
            expected_role = ANTIFIELD if d.role == FIELD else GHOST_ANTIFIELD
            if f.role != expected_role:
                raise ModelError(f"{f.name}: role {f.role} does not match dual role {d.role}")
            if f.parity != (d.parity + 1) % 2:
                raise ModelError(f"{f.name}: antifield parity must be opposite to {d.name}")
            if f.antifield_number != d.ghost_number + 1:
                raise ModelError(
                    f"{f.name}: antifield number {f.antifield_number}, expected {d.ghost_number + 1}")
            if f.ghost_number:
                raise ModelError(f"{f.name}: antifields carry zero ghost number")
        for f in self.fields:
            if f.role == FIELD and f.ghost_number:
                raise ModelError(f"{f.name}: original fields carry zero ghost number")
            if f.role == GHOST and f.ghost_number < 1:
                raise ModelError(f"{f.name}: ghosts carry positive ghost number")

        self._check_declared(self.lagrangian, "lagrangian")
        L = self.lagrangian
        if L.parity() != 0 or L.ghost_number() != 0 or L.antifield_number() != 0:
            raise ModelError("lagrangian must be even with zero ghost and antifield number")

        for k, st in enumerate(self.stages):
            if st.stage != k:
                raise ModelError(f"stage numbering: expected {k}, got {st.stage}")
            for gen, delta in st.generators.items():
                a = by.get(gen)
                if a is None or a.role != GHOST_ANTIFIELD:
                    raise ModelError(f"stage {k} generator {gen!r} is not a ghost-antifield")
                g = by[a.dual_of]
                if g.ghost_number != k + 1:
                    raise ModelError(f"{g.name}: stage {k} ghost needs ghost number {k + 1}")
                self._check_declared(delta, f"generator {gen}")
                if delta:
                    ants = {sum(v.ant for v in m) for m, _ in delta.items()}
                    if ants != {k + 1}:
                        raise ModelError(
                            f"generator {gen}: antifield number {sorted(ants)} != {k + 1}")
                    if delta.ghost_number() != 0:
                        raise ModelError(f"generator {gen}: must be ghost-free")
                    if delta.parity() != (a.parity + 1) % 2:
                        raise ModelError(
                            f"generator {gen}: parity must be opposite to the antifield's")
        if self.brst_xi is not None:
            xi = self.brst_xi
            for b, v in xi.components.items():
                f = by.get(b.name)
                if f is None or f.role != GHOST:
                    raise ModelError(f"xi component on {b.name!r}: only ghosts allowed")
                self._check_declared(v, f"xi component on {b.name}")
                if v.antifield_number() != 0:
                    raise ModelError(f"xi component on {b.name}: must be antifield-free")
            if xi and (xi.parity != 1 or xi.ghost_shift != 1 or xi.chirality != LEFT):
                raise ModelError("xi must be an odd left derivation of ghost number 1")

    def _check_declared(self, p: GradedPoly, what: str):
        by = self._by_name
        for v in p.variables():
            f = by.get(v.name)
            if f is None:
                raise ModelError(f"{what}: unknown field {v.name!r}")
            if f.var() != v.base:
                raise ModelError(f"{what}: {v.name} used with inconsistent gradings")
            if v.coords and v.coords[-1] >= self.base_dim:
                raise ModelError(f"{what}: {v.render()} exceeds base dimension {self.base_dim}")


def antifield_degree(m: tuple) -> int:
    return sum(1 for v in m if v.ant > 0)


def _dens(x) -> GradedPoly:
    return as_poly(x)


# Noether identities --------------------------------------------------------

def noether_residual(m: Model, phi: LinearDiffOp, el: Optional[EulerLagrange] = None) -> GradedPoly:
    el = m.el if el is None else el
    for name in phi.fields():
        f = m.field(name)
        if f.role != FIELD:
            raise ModelError(f"Noether operator acts on {name!r}, which is not an original field")
    return phi.apply({n: el[n] for n in phi.fields()})


def check_noether_identity(m: Model, phi: LinearDiffOp, el: Optional[EulerLagrange] = None) -> Verdict:
    """``Σ Φ^{A,Λ} d_Λ 𝓔_A = 0`` as an exact identity."""
    r = noether_residual(m, phi, el)
    if r:
        return Verdict(False, {"residual": r}, "Noether identity fails")
    return Verdict(True)


def koszul_differential(m: Model, el: Optional[EulerLagrange] = None) -> Derivation:
    """``δ̄ = ∂←^A 𝓔_A`` on the field antifields."""
    el = m.el if el is None else el
    comp = {m.antifield_of(f.name): el[f.name] for f in m.original_fields()
            if f.name in m._antifield_of}
    return Derivation(comp, RIGHT, 1)


def stage_residuals(m: Model, k: int, el: Optional[EulerLagrange] = None) -> dict:
    if k < 1 or k >= len(m.stages):
        raise ModelError(f"stage identity needs stages {k - 1} and {k}")
    dbar = koszul_differential(m, el)
    prev = {}
    for g in m.stages[k - 1].generators:
        prev[m.dual(g).name] = m.linear_part(k - 1, g).apply(
            {a.dual_of: GradedPoly.var(a.var()) for a in m.stage_antifields(k - 2)})
    out = {}
    for gen in m.stages[k].generators:
        lhs = m.linear_part(k, gen).apply(prev)
        out[gen] = lhs + apply(dbar, m.h_part(k, gen))
    return out


def check_stage_identity(m: Model, k: int, el: Optional[EulerLagrange] = None) -> Verdict:
    """Stage-``k`` identity ``Σ Δ^{r_{k-1},Λ} d_Λ G_{r_{k-1}} = -δ̄(h_{r_k})`` per generator."""
    bad = {g: r for g, r in stage_residuals(m, k, el).items() if r}
    if bad:
        return Verdict(False, bad, f"stage {k} identity fails")
    return Verdict(True)


# operators -------------------------------------------------------------------

def build_kt_operator(m: Model, el: Optional[EulerLagrange] = None) -> Derivation:
    """Right derivation ``s̄_A ↦ 𝓔_A``, ``c̄_{r_k} ↦ Δ_{r_k}``."""
    el = m.el if el is None else el
    comp = {m.antifield_of(f.name): el[f.name] for f in m.original_fields()
            if f.name in m._antifield_of}
    for st in m.stages:
        for gen, delta in st.generators.items():
            comp[m.field(gen)] = delta
    try:
        return Derivation(comp, RIGHT, 1, 1)
    except ValueError as exc:
        raise ModelError(f"KT operator gradings: {exc}") from None


def gauge_operator_parts(m: Model) -> list:
    """``[u, u_(1), …, u_(N)]``; ``u_(k)`` moves the stage ``k-1`` ghosts."""
    parts = []
    for k, st in enumerate(m.stages):
        comp: dict = {}
        for gen in st.generators:
            ghost = m.ghost_for(gen).var()
            for (target, idx), coeff in adjoint(m.linear_part(k, gen)).items():
                term = GradedPoly.var(jet(ghost, tuple(idx))) * coeff
                comp[target] = comp[target] + term if target in comp else term
        try:
            parts.append(Derivation({m.field(t): v for t, v in comp.items()}, LEFT, 1, 1))
        except ValueError as exc:
            raise ModelError(f"stage {k} gauge operator gradings: {exc}") from None
    return parts


def build_gauge_operator(m: Model) -> Derivation:
    """``u_e = u + u_(1) + … + u_(N)``, ``u^A = Σ c^r_Λ η(Δ^A_r)^Λ``."""
    total = Derivation({}, LEFT, 1, 1)
    for part in gauge_operator_parts(m):
        total = total + part
    return total


def build_brst_operator(m: Model) -> Derivation:
    """``u_E = u_e + ξ``."""
    u = build_gauge_operator(m)
    return u + m.brst_xi if m.brst_xi else u


def split_by_stage(m: Model, u_total: Derivation) -> list:
    """Split a total gauge operator into the parts acting on stage ``k-1`` targets."""
    targets = [{f.name for f in m.original_fields()}]
    for k in range(len(m.stages) - 1):
        targets.append({m.dual(g).name for g in m.stages[k].generators})
    comps = u_total.by_name()
    parts = []
    for tset in targets:
        parts.append(Derivation({m.field(n): v for n, v in comps.items() if n in tset},
                                LEFT, 1, 1))
    return parts


def check_gauge_symmetry_conditions(m: Model, u_total: Optional[Derivation] = None,
                                    el: Optional[EulerLagrange] = None) -> dict:
    """Stage 0: ``u`` is a variational symmetry. Stage ``k≥1``: ``u_(k)(u_(k-1))``
    vanishes, or equals ``δ̄(α)`` for supplied witnesses ``α``."""
    u_total = build_gauge_operator(m) if u_total is None else u_total
    parts = split_by_stage(m, u_total)
    out = {}
    if not parts:
        return out
    out[0] = is_variational_symmetry(parts[0], m.lagrangian)
    dbar = None
    for k in range(1, len(parts)):
        comp = compose_on_components(parts[k], parts[k - 1])
        alpha = m.stages[k].alpha
        if alpha:
            dbar = koszul_differential(m, el) if dbar is None else dbar
            bad = {}
            for t in sorted(set(comp) | set(alpha)):
                r = comp.get(t, GradedPoly()) - apply(dbar, alpha.get(t, GradedPoly()))
                if r:
                    bad[t] = r
            mode = "on-shell via supplied witnesses"
        else:
            bad = {t: r for t, r in comp.items() if r}
            mode = "off-shell (exactly zero)"
        out[k] = Verdict(not bad, bad, mode if not bad else f"fails {mode}")
    return out


# Lagrangians -------------------------------------------------------------

def build_extended_lagrangian(m: Model) -> Density:
    """``L_e = L + Σ_k c^{r_k} Δ_{r_k}``."""
    acc = m.lagrangian
    for st in m.stages:
        for gen, delta in st.generators.items():
            acc = acc + m.ghost_for(gen)() * delta
    return Density(acc)


def build_proper_solution(m: Model) -> Density:
    """``L_E = L_e + Σ ξ^r c̄_r``."""
    acc = build_extended_lagrangian(m).coeff
    if m.brst_xi:
        for b, v in m.brst_xi.components.items():
            acc = acc + v * m.antifield_of(b.name)()
    return Density(acc)


def ghost_pairing(m: Model) -> GradedPoly:
    """``Σ z^a z̄_a`` over every field-antifield pair of the model."""
    acc = GradedPoly()
    for z, zb in m.dual_pairs():
        acc = acc + z() * zb()
    return acc


def extended_lagrangian_residual(m: Model) -> GradedPoly:
    """``L_e - L - u_e(Σ z z̄)`` with terms of antifield degree ≥ 2 removed.

    Must be a total divergence for consistent stage data.
    """
    Le = build_extended_lagrangian(m).coeff
    r = Le - m.lagrangian - apply(build_gauge_operator(m), ghost_pairing(m))
    return r.select(lambda mono: antifield_degree(mono) < 2)


def proper_solution_residual(m: Model) -> GradedPoly:
    """``L_E - L - u_E(Σ z z̄)``, a total divergence for affine (e.g. Abelian) models."""
    LE = build_proper_solution(m).coeff
    return LE - m.lagrangian - apply(build_brst_operator(m), ghost_pairing(m))


# antibracket -------------------------------------------------------------

def antibracket(P, Q, m: Model) -> Density:
    """``{P, Q} = δ←P/δz̄_a δQ/δz^a + (-1)^{[Q]([Q]+1)} δ←Q/δz̄_a δP/δz^a``.

    The sign factor is always +1, so the bracket is symmetric.
    """
    P = _dens(P)
    Q = _dens(Q)
    acc = GradedPoly()
    for z, zb in m.dual_pairs():
        a = variational_derivative_right(P, zb)
        if a:
            acc = acc + a * variational_derivative(Q, z)
        b = variational_derivative_right(Q, zb)
        if b:
            acc = acc + b * variational_derivative(P, z)
    return Density(acc)


def check_master_equation(m: Model, P) -> Verdict:
    """``{P, P}`` is a total divergence."""
    br = antibracket(P, P, m).coeff
    v = is_dH_exact(br, m.fields)
    if v:
        return Verdict(True)
    return Verdict(False, v.witness, "antibracket is not a total divergence")


def field_derivation(m: Model, P) -> Derivation:
    """``υ_P = (δ←P/δz̄_a) ∂/∂z^a``."""
    P = _dens(P)
    comp = {z: variational_derivative_right(P, zb) for z, zb in m.dual_pairs()}
    return Derivation(comp, LEFT)


def antifield_derivation(m: Model, P) -> Derivation:
    """``ῡ_P = ∂←/∂z̄_a (δP/δz^a)`` (right derivation)."""
    P = _dens(P)
    comp = {zb: variational_derivative(P, z) for z, zb in m.dual_pairs()}
    return Derivation(comp, RIGHT)


def bv_derivation(m: Model, P) -> Derivation:
    """``ϑ_P = υ_P + ῡ_P^l``."""
    return field_derivation(m, P) + antifield_derivation(m, P).to_left()


EQUIVALENCE_CHECKS = ("master_equation", "field_symmetry", "antifield_symmetry", "bv_nilpotency")


def antibracket_equivalence_suite(m: Model, P) -> dict:
    """The four equivalent conditions on a Lagrangian ``P``.

    master equation; ``υ_P`` and ``ῡ_P`` are variational symmetries of ``P``;
    ``ϑ_P`` is nilpotent. They must agree.
    """
    P = _dens(P)
    out = {"master_equation": check_master_equation(m, P)}
    out["field_symmetry"] = is_variational_symmetry(field_derivation(m, P), P)
    out["antifield_symmetry"] = is_variational_symmetry(antifield_derivation(m, P), P)
    out["bv_nilpotency"] = is_nilpotent(bv_derivation(m, P))
    return out


def with_stages(m: Model, stages: Sequence[NoetherStage]) -> Model:
    from dataclasses import replace
    return replace(m, stages=tuple(stages))


__all__ = [
    "Model", "ModelError", "NoetherStage", "antifield_degree", "antibracket",
    "antibracket_equivalence_suite", "antifield_derivation", "build_brst_operator",
    "build_extended_lagrangian", "build_gauge_operator", "build_kt_operator",
    "build_proper_solution", "bv_derivation", "check_gauge_symmetry_conditions",
    "check_master_equation", "check_noether_identity", "check_stage_identity",
    "extended_lagrangian_residual", "field_derivation", "gauge_operator_parts",
    "ghost_pairing", "koszul_differential", "noether_residual", "proper_solution_residual",
    "split_by_stage", "stage_residuals", "with_stages", "EQUIVALENCE_CHECKS",
]
