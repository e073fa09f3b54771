"""Built-in component-expanded models: Yang–Mills (super)gauge theory, topological BF
theory and the gauge-gravitation BRST operator."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Optional, Sequence

from .algebra import (
    FIELD,
    GHOST,
    FieldDecl,
    GradedPoly,
    antifield_for,
)
from .brst import Model, ModelError, NoetherStage
from .derivations import LEFT, Derivation


# Lie superalgebras -----------------------------------------------------------

@dataclass(frozen=True)
class LieSuperAlgebraSpec:
    """Structure constants ``c^r_{ij}`` (dict ``(r, i, j) -> rational``), parities and
    the invariant metric ``h^{ij}`` (square matrix)."""

    dim: int
    structure_constants: dict
    metric: tuple
    parities: tuple = ()
    name: str = "g"

    def __post_init__(self):
        par = tuple(self.parities) or (0,) * self.dim
        object.__setattr__(self, "parities", par)
        object.__setattr__(self, "structure_constants",
                           {k: Fraction(v) for k, v in self.structure_constants.items() if v})
        object.__setattr__(self, "metric", tuple(tuple(Fraction(x) for x in row)
                                                 for row in self.metric))
        self.validate()

    def c(self, r, i, j) -> Fraction:
        return self.structure_constants.get((r, i, j), Fraction(0))

    def validate(self):
        m, p = self.dim, self.parities
        if len(p) != m or any(x not in (0, 1) for x in p):
            raise ModelError("parities must list 0/1 for every basis element")
        if len(self.metric) != m or any(len(row) != m for row in self.metric):
            raise ModelError("metric must be a dim x dim matrix")
        for (r, i, j), v in self.structure_constants.items():
            if not all(0 <= x < m for x in (r, i, j)):
                raise ModelError(f"structure constant index {(r, i, j)} out of range")
            if p[r] != (p[i] + p[j]) % 2:
                raise ModelError(f"c^{r}_{i}{j} violates the grading")
        for r in range(m):
            for i in range(m):
                for j in range(m):
                    if self.c(r, i, j) != -(-1) ** (p[i] * p[j]) * self.c(r, j, i):
                        raise ModelError(f"c^{r}_{{{i}{j}}} is not graded antisymmetric")
        # graded Jacobi: (-1)^{[i][k]} [e_i,[e_j,e_k]] + cyclic = 0
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    for s in range(m):
                        tot = Fraction(0)
                        for a, b, c_ in ((i, j, k), (j, k, i), (k, i, j)):
                            sg = (-1) ** (p[a] * p[c_])
                            for r in range(m):
                                tot += sg * self.c(r, b, c_) * self.c(s, a, r)
                        if tot:
                            raise ModelError(f"Jacobi identity fails for ({i},{j},{k})")
        self.metric_inverse()

    def metric_inverse(self) -> tuple:
        return _invert(self.metric)


def _invert(mat) -> tuple:
    n = len(mat)
    a = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ModelError("metric is degenerate")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def su2() -> LieSuperAlgebraSpec:
    c = {}
    for r, i, j in permutations(range(3)):
        c[(r, i, j)] = _perm_sign((r, i, j))
    ident = tuple(tuple(int(i == j) for j in range(3)) for i in range(3))
    return LieSuperAlgebraSpec(3, c, ident, name="su2")


def abelian(dim: int = 1) -> LieSuperAlgebraSpec:
    ident = tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim))
    return LieSuperAlgebraSpec(dim, {}, ident, name=f"u1^{dim}" if dim > 1 else "u1")


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
            elif seq[i] == seq[j]:
                return 0
    return sign


# Yang–Mills -----------------------------------------------------------------

def build_yang_mills(alg: LieSuperAlgebraSpec, n: int = 3,
                     signature: Optional[Sequence[int]] = None) -> Model:
    """Component-expanded Yang–Mills model with ghosts, antifields and BRST terms.

    Fields ``a{r}_{λ}``, ghosts ``c{r}``, antifields ``abar{r}_{λ}``, ``cbar{r}``.
    The curvature is ``F^r_{λμ} = d_λ a^r_μ - d_μ a^r_λ + c^r_{ij} a^i_λ a^j_μ``.
    """
    if n < 2:
        raise ModelError("Yang-Mills needs base dimension n >= 2")
    sig = tuple(signature) if signature is not None else (1,) + (-1,) * (n - 1)
    if len(sig) != n or any(s not in (1, -1) for s in sig):
        raise ModelError(f"signature must be n={n} entries of +1/-1")
    m, p = alg.dim, alg.parities
    a = [[FieldDecl(f"a{r}_{l}", p[r]) for l in range(n)] for r in range(m)]
    gh = [FieldDecl(f"c{r}", (p[r] + 1) % 2, 1, 0, GHOST) for r in range(m)]
    abar = [[antifield_for(a[r][l], f"abar{r}_{l}") for l in range(n)] for r in range(m)]
    cbar = [antifield_for(gh[r], f"cbar{r}") for r in range(m)]
    fields = [f for row in a for f in row] + gh + [f for row in abar for f in row] + cbar

    def F(r, l, mu):
        out = a[r][mu](l) - a[r][l](mu)
        for (s, i, j), v in alg.structure_constants.items():
            if s == r:
                out = out + v * a[i][l]() * a[j][mu]()
        return out

    h_low = alg.metric_inverse()
    curv = {(r, l, b): F(r, l, b) for r in range(m) for l in range(n) for b in range(n) if l != b}
    L = GradedPoly()
    for i in range(m):
        for j in range(m):
            if not h_low[i][j]:
                continue
            for l in range(n):
                for b in range(n):
                    if l == b:
                        continue
                    w = Fraction(1, 4) * h_low[i][j] * sig[l] * sig[b]
                    L = L + w * curv[(i, l, b)] * curv[(j, l, b)]

    # generators: Δ_j = -(c^r_{ji} a^i_λ ā^λ_r + d_λ ā^λ_j)
    gens = {}
    for j in range(m):
        d = GradedPoly()
        for l in range(n):
            for (r, jj, i), v in alg.structure_constants.items():
                if jj == j:
                    d = d - v * a[i][l]() * abar[r][l]()
            d = d - abar[j][l](l)
        gens[cbar[j].name] = d

    # ξ^r = -1/2 (-1)^{[i]} c^r_{ij} c^i c^j
    xi = {}
    for (r, i, j), v in alg.structure_constants.items():
        term = Fraction(-1, 2) * (-1) ** p[i] * v * gh[i]() * gh[j]()
        xi[gh[r]] = xi[gh[r]] + term if gh[r] in xi else term
    sig_txt = "".join("+" if s > 0 else "-" for s in sig)
    return Model(
        name=f"yang-mills:{alg.name}:n{n}",
        base_dim=n,
        fields=tuple(fields),
        lagrangian=L,
        stages=(NoetherStage(0, gens),),
        brst_xi=Derivation(xi, LEFT, 1, 1),
        description=f"Yang-Mills theory of {alg.name} on R^{n}, signature {sig_txt}",
    )


# topological BF -------------------------------------------------------------

@dataclass(frozen=True)
class BFSpec:
    n: int
    p: int
    q: int

    def __post_init__(self):
        if self.p + self.q != self.n - 1:
            raise ModelError(f"BF needs p + q = n - 1, got p={self.p}, q={self.q}, n={self.n}")
        if not 1 <= self.p <= self.q:
            raise ModelError(f"BF needs 1 <= p <= q, got p={self.p}, q={self.q}")


def _comp_name(stem: str, idx: tuple) -> str:
    return f"{stem}_{''.join(map(str, idx))}" if idx else stem


def _d_components(target_deg: int, n: int):
    """Exterior derivative in ordered components.

    Yields ``(I, [(sign, coord, J), ...])`` with ``(dω)_I = Σ sign d_coord ω_J``.
    """
    for I in combinations(range(n), target_deg):
        terms = []
        for pos, c in enumerate(I):
            J = I[:pos] + I[pos + 1:]
            terms.append(((-1) ** pos, c, J))
        yield I, terms


def build_bf(spec: BFSpec) -> Model:
    """Abelian reducible BF model ``L = A ∧ d_H B`` with both ghost towers.

    Stage ``k`` holds the ghosts of form degree ``p-1-k`` (A tower) and
    ``q-1-k`` (B tower). Each gauge transformation is an exterior
    derivative; generators are the adjoint operators on the antifields.
    """
    n, p, q = spec.n, spec.p, spec.q
    fields: list = []
    tower = {}  # (stem, degree) -> {I: FieldDecl}
    for stem, top in (("A", p), ("B", q)):
        tower[(stem, top)] = {I: FieldDecl(_comp_name(stem, I)) for I in combinations(range(n), top)}
    gstem = {"A": "eps", "B": "xi"}
    for stem, top in (("A", p), ("B", q)):
        for k in range(top):
            deg = top - 1 - k
            tower[(stem, deg, "ghost")] = {
                I: FieldDecl(_comp_name(gstem[stem], I), (k + 1) % 2, k + 1, 0, GHOST)
                for I in combinations(range(n), deg)}

    def decls(stem, deg):
        key = (stem, deg) if (stem, deg) in tower else (stem, deg, "ghost")
        return tower[key]

    for stem, top in (("A", p), ("B", q)):
        fields.extend(tower[(stem, top)].values())
    for stem, top in (("A", p), ("B", q)):
        for k in range(top):
            fields.extend(tower[(stem, top - 1 - k, "ghost")].values())
    bars = {f.name: antifield_for(f, f.name.split("_")[0] + "bar"
                                  + ("_" + f.name.split("_")[1] if "_" in f.name else ""))
            for f in fields}
    fields.extend(bars.values())

    # L = Σ sgn(I, λ, J) A_I d_λ B_J
    L = GradedPoly()
    A, B = tower[("A", p)], tower[("B", q)]
    for I, fa in A.items():
        for lam in range(n):
            for J, fb in B.items():
                s = _perm_sign(I + (lam,) + J)
                if s:
                    L = L + s * fa() * fb(lam)

    stages: list = [dict() for _ in range(q)]
    for stem, top in (("A", p), ("B", q)):
        for k in range(top):
            deg = top - 1 - k
            ghosts = decls(stem, deg)
            targets = decls(stem, deg + 1)
            gen = {I: GradedPoly() for I in ghosts}
            # u(target_I) = Σ sign d_c ghost_J  ==>  Δ_J gets -sign d_c target̄_I
            for I, terms in _d_components(deg + 1, n):
                tbar = bars[targets[I].name]
                for sign, c, J in terms:
                    gen[J] = gen[J] - sign * tbar(c)
            for J, g in ghosts.items():
                stages[k][bars[g.name].name] = gen[J]
    notes = ()
    if q % 2:
        notes = (f"q={q} is odd; the even-q convention is not required by the component identities",)
    return Model(
        name=f"bf:n{n}p{p}q{q}",
        base_dim=n,
        fields=tuple(fields),
        lagrangian=L,
        stages=tuple(NoetherStage(k, g) for k, g in enumerate(stages)),
        brst_xi=Derivation({}, LEFT, 1, 1),
        description=f"topological BF theory, A of degree {p}, B of degree {q}, on R^{n}",
        notes=notes,
    )


# gauge gravitation ------------------------------------------------------------

def _gravity_fields(n: int):
    sig = {(a, b): FieldDecl(f"sigma_{a}{b}") for a in range(n) for b in range(a, n)}
    con = {(mu, a, b): FieldDecl(f"k_{mu}{a}{b}") for mu in range(n) for a in range(n)
           for b in range(n)}
    gh = [FieldDecl(f"c{l}", 1, 1, 0, GHOST) for l in range(n)]
    return sig, con, gh


def _gravity_gauge_components(n, sig, con, gh) -> dict:
    """Vertical part of the lift of ``τ = c^λ ∂_λ``, keyed by FieldDecl."""
    def s(a, b):
        return sig[(min(a, b), max(a, b))]

    comp = {}
    for (a, b), f in sig.items():
        v = GradedPoly()
        for nu in range(n):
            v = v + s(nu, b)() * gh[a](nu) + s(a, nu)() * gh[b](nu)
            v = v - gh[nu]() * f(nu)
        comp[f] = v
    for (mu, a, b), f in con.items():
        v = gh[a](mu, b)
        for nu in range(n):
            v = v + gh[a](nu) * con[(mu, nu, b)]() - gh[nu](b) * con[(mu, a, nu)]()
            v = v - gh[nu](mu) * con[(nu, a, b)]() - gh[nu]() * f(nu)
        comp[f] = v
    return comp


def build_gravity(n: int = 4, lagrangian: Optional[GradedPoly] = None) -> Model:
    """Metric ``sigma`` and linear connection ``k`` under general covariant transformations.

    The stage-0 generators are recovered from the gauge operator (the
    vertical lift of ``c^λ ∂_λ``) by taking adjoints, so that
    :func:`~ktbrst.brst.build_gauge_operator` reproduces it exactly. The
    Lagrangian defaults to zero; a caller-supplied one must be invariant.
    """
    from .algebra import MultiIndex, partial_left
    from .jets import LinearDiffOp, adjoint

    sig, con, gh = _gravity_fields(n)
    base = list(sig.values()) + list(con.values()) + gh
    bars = {}
    for f in base:
        if f.role == FIELD:
            nm = f.name.replace("sigma_", "sigmabar_").replace("k_", "kbar_")
        else:
            nm = f"cbar{f.name[1:]}"
        bars[f.name] = antifield_for(f, nm)
    comp = _gravity_gauge_components(n, sig, con, gh)
    gens = {}
    for l, c in enumerate(gh):
        coeffs = {}
        for f, u in comp.items():
            for v in u.variables():
                if v.name == c.name:
                    coeffs[(f.name, MultiIndex(v.coords))] = partial_left(u, v)
        delta = GradedPoly()
        for (name, idx), g in adjoint(LinearDiffOp(coeffs)).items():
            delta = delta + g * bars[name](*idx)
        gens[bars[c.name].name] = delta
    xi = {gh[l]: GradedPoly() for l in range(n)}
    for l in range(n):
        for mu in range(n):
            xi[gh[l]] = xi[gh[l]] + gh[l](mu) * gh[mu]()
    notes = () if lagrangian else ("no concrete gravitation Lagrangian: Noether identities not evaluated",)
    return Model(
        name=f"gravity:n{n}",
        base_dim=n,
        fields=tuple(base + list(bars.values())),
        lagrangian=lagrangian if lagrangian is not None else GradedPoly(),
        stages=(NoetherStage(0, gens),),
        brst_xi=Derivation(xi, LEFT, 1, 1),
        description="gauge gravitation: metric and linear connection under general covariant transformations",
        notes=notes,
    )


def gravity_gauge_operator(m: Model) -> Derivation:
    """The gauge operator written down directly from the lift (independent of the generators)."""
    n = m.base_dim
    sig = {(a, b): m.field(f"sigma_{a}{b}") for a in range(n) for b in range(a, n)}
    con = {(mu, a, b): m.field(f"k_{mu}{a}{b}") for mu in range(n) for a in range(n)
           for b in range(n)}
    gh = [m.field(f"c{l}") for l in range(n)]
    return Derivation(_gravity_gauge_components(n, sig, con, gh), LEFT, 1, 1)


# registry --------------------------------------------------------------------

BUILTIN_MODELS = ("yang-mills:su2:n3", "yang-mills:u1:n2", "bf:n3p1q1", "bf:n4p1q2", "gravity:n4")


def builtin_model(name: str) -> Model:
    """Resolve ``yang-mills:<alg>:n<k>``, ``bf:n<k>p<k>q<k>`` or ``gravity:n<k>``."""
    import re

    mt = re.fullmatch(r"yang-mills:(su2|u1):n(\d+)", name)
    if mt:
        alg = su2() if mt.group(1) == "su2" else abelian(1)
        return build_yang_mills(alg, int(mt.group(2)))
    mt = re.fullmatch(r"bf:n(\d+)p(\d+)q(\d+)", name)
    if mt:
        return build_bf(BFSpec(*map(int, mt.groups())))
    mt = re.fullmatch(r"gravity:n(\d+)", name)
    if mt:
        return build_gravity(int(mt.group(1)))
    raise ModelError(f"unknown built-in model {name!r}")
