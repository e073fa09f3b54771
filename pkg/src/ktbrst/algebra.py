"""Exact polynomials in Grassmann-graded jet variables.

Values are immutable. A :class:`GradedPoly` stores a dict from canonical
monomials to nonzero rational coefficients; canonical means the factors are
sorted by the global variable order and odd factors occur at most once.
The monomial kernels live in ``_kernel`` (compiled) or ``_kernel_py``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from ._backend import kernel

FIELD = "field"
GHOST = "ghost"
ANTIFIELD = "antifield"
GHOST_ANTIFIELD = "ghost_antifield"
ROLES = (FIELD, GHOST, ANTIFIELD, GHOST_ANTIFIELD)
_ROLE_RANK = {r: i for i, r in enumerate(ROLES)}

MIXED = "mixed"

Coeff = Union[int, Fraction]


class AlgebraError(ValueError):
    """Raised for malformed declarations or grading violations."""


class MultiIndex(tuple):
    """Symmetric multi-index, stored as the sorted tuple of coordinate indices.

    ``MultiIndex((1, 0, 0))`` is the multiset {0, 0, 1}; ``counts(n)`` gives
    the count vector over an ``n``-dimensional base.
    """

    def __new__(cls, coords: Iterable[int] = ()):
        coords = tuple(sorted(int(c) for c in coords))
        if coords and coords[0] < 0:
            raise AlgebraError(f"negative coordinate index in {coords}")
        return super().__new__(cls, coords)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "MultiIndex":
        out = []
        for i, k in enumerate(counts):
            if k < 0:
                raise AlgebraError(f"negative count in {tuple(counts)}")
            out.extend([i] * k)
        return cls(out)

    @property
    def order(self) -> int:
        return len(self)

    def counts(self, n: int) -> tuple[int, ...]:
        if self and self[-1] >= n:
            raise AlgebraError(f"multi-index {tuple(self)} exceeds base dimension {n}")
        out = [0] * n
        for c in self:
            out[c] += 1
        return tuple(out)

    def __add__(self, other) -> "MultiIndex":
        return MultiIndex(tuple(self) + tuple(other))

    def __radd__(self, other) -> "MultiIndex":
        return MultiIndex(tuple(other) + tuple(self))

    def minus(self, other: "MultiIndex") -> Optional["MultiIndex"]:
        """Multiset difference, or None when ``other`` is not contained."""
        rest = list(self)
        for c in other:
            try:
                rest.remove(c)
            except ValueError:
                return None
        return MultiIndex(rest)

    def __repr__(self):
        return f"MultiIndex({tuple(self)!r})"


class JetVar(NamedTuple):
    """Jet coordinate ``s^A_Λ``.

    Tuple order is the canonical factor order: antifield number, role,
    field name, then the multi-index graded-lexicographically. ``parity``
    must stay at position 5 (the kernels read it there).
    """

    ant: int
    role: int
    name: str
    order: int
    coords: tuple
    parity: int
    gh: int

    @property
    def index(self) -> MultiIndex:
        return MultiIndex(self.coords)

    @property
    def base(self) -> "JetVar":
        return self if not self.order else _base_var(self)

    def render(self, coord_names: Optional[Sequence[str]] = None) -> str:
        if not self.coords:
            return self.name
        if coord_names is None:
            idx = ",".join(f"x{c}" for c in self.coords)
        else:
            idx = ",".join(coord_names[c] for c in self.coords)
        return f"{self.name}[{idx}]"


@lru_cache(maxsize=None)
def _base_var(v: JetVar) -> JetVar:
    return v._replace(order=0, coords=())


@lru_cache(maxsize=None)
def prolong(v: JetVar, coord: int) -> JetVar:
    """The jet variable one derivative higher in ``coord``."""
    coords = tuple(sorted(v.coords + (coord,)))
    return v._replace(order=v.order + 1, coords=coords)


@lru_cache(maxsize=None)
def jet(v: JetVar, coords: tuple) -> JetVar:
    """``v`` prolonged by the multi-index ``coords``."""
    if not coords:
        return v
    merged = tuple(sorted(v.coords + tuple(coords)))
    return v._replace(order=len(merged), coords=merged)


@dataclass(frozen=True)
class FieldDecl:
    """A scalar basis element: field, antifield, ghost or ghost-antifield."""

    name: str
    parity: int = 0
    ghost_number: int = 0
    antifield_number: int = 0
    role: str = FIELD
    dual_of: Optional[str] = None

    def __post_init__(self):
        if not self.name.isidentifier():
            raise AlgebraError(f"field name {self.name!r} is not an identifier")
        if self.parity not in (0, 1):
            raise AlgebraError(f"{self.name}: parity must be 0 or 1, got {self.parity!r}")
        if self.role not in _ROLE_RANK:
            raise AlgebraError(f"{self.name}: unknown role {self.role!r}")
        if self.antifield_number < 0:
            raise AlgebraError(f"{self.name}: antifield number must be non-negative")
        if self.role in (ANTIFIELD, GHOST_ANTIFIELD):
            if self.dual_of is None:
                raise AlgebraError(f"{self.name}: antifield without dual_of")
            if self.antifield_number < 1:
                raise AlgebraError(f"{self.name}: antifield number must be positive")
        elif self.dual_of is not None:
            raise AlgebraError(f"{self.name}: only antifields carry dual_of")

    @property
    def is_antifield(self) -> bool:
        return self.role in (ANTIFIELD, GHOST_ANTIFIELD)

    def var(self, *coords: int) -> JetVar:
        c = tuple(sorted(coords))
        return JetVar(self.antifield_number, _ROLE_RANK[self.role], self.name,
                      len(c), c, self.parity, self.ghost_number)

    def __call__(self, *coords: int) -> "GradedPoly":
        return GradedPoly.var(self.var(*coords))


def antifield_for(f: FieldDecl, name: str) -> FieldDecl:
    """The antifield dual to ``f`` with the standard gradings."""
    role = ANTIFIELD if f.role == FIELD else GHOST_ANTIFIELD
    return FieldDecl(name, (f.parity + 1) % 2, 0, f.ghost_number + 1, role, f.name)


def _coeff(c) -> Coeff:
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else c
    if isinstance(c, (Rational, str)):
        return _coeff(Fraction(c))
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


@dataclass(frozen=True)
class Monomial:
    """Read-only view of one term: coefficient and ``(JetVar, exponent)`` factors."""

    coeff: Fraction
    factors: tuple

    @classmethod
    def from_key(cls, key: tuple, coeff) -> "Monomial":
        out = []
        for v in key:
            if out and out[-1][0] == v:
                out[-1] = (v, out[-1][1] + 1)
            else:
                out.append((v, 1))
        return cls(Fraction(coeff), tuple(out))

    @property
    def parity(self) -> int:
        return sum(v.parity * e for v, e in self.factors) % 2


def _mono_grades(m: tuple) -> tuple[int, int, int]:
    p = g = a = 0
    for v in m:
        p += v.parity
        g += v.gh
        a += v.ant
    return p % 2, g, a


class GradedPoly:
    """Canonical polynomial over graded jet variables with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[dict] = None):
        # trusted constructor: ``terms`` must already be canonical and nonzero
        self._terms = terms if terms is not None else {}
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, c) -> "GradedPoly":
        c = _coeff(c)
        return cls({(): c}) if c else cls()

    @classmethod
    def var(cls, v: JetVar) -> "GradedPoly":
        return cls({(v,): 1})

    @classmethod
    def coerce(cls, x) -> "GradedPoly":
        if isinstance(x, GradedPoly):
            return x
        if isinstance(x, Density):
            return x.coeff
        if isinstance(x, JetVar):
            return cls.var(x)
        return cls.const(x)

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def monomials(self) -> Iterator[Monomial]:
        for key in sorted(self._terms, key=_render_key):
            yield Monomial.from_key(key, self._terms[key])

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> set:
        return {v for m in self._terms for v in m}

    def fields(self) -> set:
        """Zero-order variables of all fields occurring in the polynomial."""
        return {v.base for m in self._terms for v in m}

    def max_order(self) -> int:
        return max((v.order for m in self._terms for v in m), default=0)

    def _grade(self, i: int):
        vals = {_mono_grades(m)[i] for m in self._terms}
        if not vals:
            return 0
        return vals.pop() if len(vals) == 1 else MIXED

    def parity(self):
        """Grassmann parity, or ``MIXED``. The zero polynomial reports 0."""
        return self._grade(0)

    def ghost_number(self):
        return self._grade(1)

    def antifield_number(self):
        return self._grade(2)

    def total_ghost_number(self):
        """Ghost number minus antifield number (the combined BV degree)."""
        vals = {g - a for _, g, a in map(_mono_grades, self._terms)}
        if not vals:
            return 0
        return vals.pop() if len(vals) == 1 else MIXED

    def homogeneous_parts(self) -> dict:
        parts: dict = {}
        for m, c in self._terms.items():
            parts.setdefault(_mono_grades(m)[0], {})[m] = c
        return {p: GradedPoly(t) for p, t in sorted(parts.items())}

    def select(self, pred) -> "GradedPoly":
        """Sub-polynomial of the terms whose monomial satisfies ``pred``."""
        return GradedPoly({m: c for m, c in self._terms.items() if pred(m)})

    def coefficient(self, *factors: JetVar):
        key = kernel.sort_signed(factors)
        if key is None:
            return 0
        return key[0] * self._terms.get(key[1], 0)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            other = GradedPoly.coerce(other)
        except TypeError:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        return GradedPoly(kernel.poly_add(self._terms, other._terms))

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = GradedPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return GradedPoly(kernel.poly_add(self._terms, other._terms, -1))

    def __rsub__(self, other):
        return GradedPoly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Density):
            return NotImplemented
        if isinstance(other, (int, Fraction)) or isinstance(other, Rational):
            c = _coeff(other)
            if not c:
                return GradedPoly()
            return GradedPoly({m: c * v for m, v in self._terms.items()})
        try:
            other = GradedPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return GradedPoly(kernel.poly_mul(self._terms, other._terms))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)) or isinstance(other, Rational):
            return self * other
        return GradedPoly.coerce(other) * self

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = GradedPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, GradedPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == GradedPoly.const(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # rendering ------------------------------------------------------------
    def render(self, coord_names: Optional[Sequence[str]] = None) -> str:
        if not self._terms:
            return "0"
        parts = []
        for key in sorted(self._terms, key=_render_key):
            c = Fraction(self._terms[key])
            neg = c < 0
            a = -c if neg else c
            body = _render_mono(key, coord_names)
            if not body:
                txt = str(a)
            elif a == 1:
                txt = body
            else:
                txt = f"{a}*{body}"
            if not parts:
                parts.append(("-" if neg else "") + txt)
            else:
                parts.append(("- " if neg else "+ ") + txt)
        return " ".join(parts)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"GradedPoly({self.render()})"


def _render_key(m: tuple):
    return (len(m), m)


def _render_mono(m: tuple, coord_names) -> str:
    out = []
    i = 0
    while i < len(m):
        v = m[i]
        j = i
        while j < len(m) and m[j] == v:
            j += 1
        s = v.render(coord_names)
        out.append(s if j - i == 1 else f"{s}^{j - i}")
        i = j
    return "*".join(out)


class Density:
    """Horizontal density ``coeff d^n x``; only the coefficient is stored."""

    __slots__ = ("coeff",)

    def __init__(self, coeff=0):
        object.__setattr__(self, "coeff", GradedPoly.coerce(coeff))

    def __setattr__(self, *_):
        raise AttributeError("Density is immutable")

    def __add__(self, other):
        return Density(self.coeff + GradedPoly.coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Density(self.coeff - GradedPoly.coerce(other))

    def __neg__(self):
        return Density(-self.coeff)

    def __mul__(self, other):
        return Density(self.coeff * GradedPoly.coerce(other))

    def __rmul__(self, other):
        return Density(GradedPoly.coerce(other) * self.coeff)

    def __eq__(self, other):
        if isinstance(other, Density):
            return self.coeff == other.coeff
        return NotImplemented

    def __hash__(self):
        return hash(self.coeff)

    def __bool__(self):
        return bool(self.coeff)

    def render(self, coord_names=None) -> str:
        return self.coeff.render(coord_names)

    def __repr__(self):
        return f"Density({self.coeff.render()})"


def as_poly(x) -> GradedPoly:
    return GradedPoly.coerce(x)


# module-level operations ---------------------------------------------------

def normalize(raw_terms: Iterable[tuple]) -> GradedPoly:
    """Canonical form of ``[(coeff, [JetVar, ...]), ...]``."""
    acc: dict = {}
    for c, factors in raw_terms:
        c = _coeff(c)
        if not c:
            continue
        r = kernel.sort_signed(tuple(factors))
        if r is None:
            continue
        sign, key = r
        acc[key] = acc.get(key, 0) + (c if sign > 0 else -c)
    return GradedPoly({m: c for m, c in acc.items() if c})


def renormalize(p: GradedPoly) -> GradedPoly:
    return normalize((c, m) for m, c in p.items())


def mul(a, b) -> GradedPoly:
    return as_poly(a) * as_poly(b)


def partial_left(p, v: JetVar) -> GradedPoly:
    """Left graded partial derivative ``∂/∂v`` acting from the left."""
    return GradedPoly(kernel.partial(as_poly(p)._terms, v, False))


def partial_right(p, v: JetVar) -> GradedPoly:
    """Right graded partial derivative; equals :func:`partial_left` for even ``v``."""
    return GradedPoly(kernel.partial(as_poly(p)._terms, v, True))


def total_poly(polys: Iterable) -> GradedPoly:
    acc: dict = {}
    for p in polys:
        for m, c in as_poly(p).items():
            acc[m] = acc.get(m, 0) + c
    return GradedPoly({m: c for m, c in acc.items() if c})
