"""Plain-text model sources (``.ktb``): parser and renderer.

A source is a sequence of statements, one per line. Lines that start with
whitespace continue the previous statement; ``#`` starts a comment::

    model "free-scalar"
    base 1
    coords t
    field y parity=even
    antifield ybar of y
    let kin = y[t]^2
    lagrangian: 1/2*kin

Expressions are polynomials over rational literals (``3``, ``-1/2``) with
``+ - * ^`` and parentheses, jet variables ``name[coord,...]``, total
derivatives ``d(expr, coord, ...)`` and names bound by ``let``.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .algebra import (
    FIELD,
    GHOST,
    GHOST_ANTIFIELD,
    AlgebraError,
    FieldDecl,
    GradedPoly,
    antifield_for,
)
from .brst import Model, ModelError, NoetherStage
from .derivations import LEFT, Derivation
from .jets import total_derivative

MAX_EXPONENT = 64
MAX_BASE_DIM = 64


class DslError(ValueError):
    """A diagnostic for a malformed source; ``line``/``col`` are 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None,
                 kind: str = "syntax"):
        self.message = message
        self.line = line
        self.col = col
        self.kind = kind
        super().__init__(self.__str__())

    def __str__(self):
        where = f"{self.line}:{self.col}: " if self.line is not None else ""
        return f"{where}{self.kind} error: {self.message}"


class DslWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: warning: {self.message}"


# lexer ------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^()\[\],:=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def _strip_comment(line: str) -> str:
    in_str = esc = False
    for i, ch in enumerate(line):
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "#":
            return line[:i]
    return line


def _tokenize_line(text: str, lineno: int) -> list:
    out = []
    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:
            raise DslError(f"unexpected character {text[pos]!r}", lineno, pos + 1, "lexical")
        kind = mt.lastgroup
        if kind != "ws":
            out.append(Tok(kind, mt.group(), lineno, pos + 1))
        pos = mt.end()
    return out


def _statements(src: str) -> list:
    stmts: list = []
    for lineno, raw in enumerate(src.splitlines(), 1):
        text = _strip_comment(raw).rstrip()
        if not text.strip():
            continue
        toks = _tokenize_line(text, lineno)
        if text[0] in " \t":
            if not stmts:
                raise DslError("continuation line without a statement", lineno, 1)
            stmts[-1].extend(toks)
        else:
            stmts.append(toks)
    return stmts


# parser -----------------------------------------------------------------------

class _Stream:
    def __init__(self, toks: list):
        self.toks = toks
        self.i = 0

    def peek(self, offset: int = 0) -> Optional[Tok]:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def next(self) -> Tok:
        t = self.peek()
        if t is None:
            last = self.toks[-1]
            raise DslError("unexpected end of statement", last.line, last.col + len(last.text))
        self.i += 1
        return t

    def expect(self, kind: str, text: Optional[str] = None) -> Tok:
        t = self.next()
        if t.kind != kind or (text is not None and t.text != text):
            want = repr(text) if text else kind
            raise DslError(f"expected {want}, found {t.text!r}", t.line, t.col)
        return t

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Tok]:
        t = self.peek()
        if t is not None and t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def done(self):
        t = self.peek()
        if t is not None:
            raise DslError(f"unexpected {t.text!r}", t.line, t.col)


_PARITY = {"even": 0, "odd": 1}


class _Parser:
    def __init__(self):
        self.name = None
        self.description = ""
        self.notes: list = []
        self.base_dim: Optional[int] = None
        self.coords: Optional[list] = None
        self.fields: list = []
        self.by_name: dict = {}
        self.bindings: dict = {}
        self.lagrangian: Optional[GradedPoly] = None
        self.stages: dict = {}
        self.alphas: dict = {}
        self.xi: dict = {}
        self.diagnostics: list = []

    # statements ---------------------------------------------------------
    def statement(self, toks: list):
        s = _Stream(toks)
        head = s.expect("name")
        handler = getattr(self, f"_st_{head.text}", None)
        if handler is None:
            raise DslError(f"unknown statement {head.text!r}", head.line, head.col)
        handler(s, head)
        s.done()

    def _string(self, s: _Stream) -> str:
        t = s.expect("string")
        try:
            return json.loads(t.text)
        except ValueError:
            raise DslError("malformed string literal", t.line, t.col) from None

    def _int(self, s: _Stream) -> int:
        t = s.expect("number")
        if "/" in t.text:
            raise DslError("expected an integer", t.line, t.col)
        return int(t.text)

    def _st_model(self, s, head):
        if self.name is not None:
            raise DslError("model name given twice", head.line, head.col, "semantic")
        self.name = self._string(s)

    def _st_description(self, s, head):
        self.description = self._string(s)

    def _st_note(self, s, head):
        self.notes.append(self._string(s))

    def _st_base(self, s, head):
        if self.base_dim is not None:
            raise DslError("base dimension given twice", head.line, head.col, "semantic")
        t = s.peek()
        n = self._int(s)
        if not 1 <= n <= MAX_BASE_DIM:
            raise DslError(f"base dimension must be in 1..{MAX_BASE_DIM}", t.line, t.col,
                           "semantic")
        self.base_dim = n

    def _st_coords(self, s, head):
        if self.base_dim is None:
            raise DslError("'coords' before 'base'", head.line, head.col)
        if self.coords is not None:
            raise DslError("coordinates given twice", head.line, head.col, "semantic")
        names = []
        while s.peek() is not None:
            t = s.expect("name")
            if t.text in names:
                raise DslError(f"duplicate coordinate {t.text!r}", t.line, t.col, "semantic")
            names.append(t.text)
        if len(names) != self.base_dim:
            raise DslError(f"expected {self.base_dim} coordinate names, got {len(names)}",
                           head.line, head.col, "semantic")
        self.coords = names

    def _attrs(self, s: _Stream) -> dict:
        out = {}
        while s.peek() is not None:
            k = s.expect("name")
            s.expect("op", "=")
            if k.text == "parity":
                v = s.expect("name")
                if v.text not in _PARITY:
                    raise DslError("parity must be 'even' or 'odd'", v.line, v.col)
                val = _PARITY[v.text]
            elif k.text in ("gh", "ant"):
                val = self._int(s)
            else:
                raise DslError(f"unknown attribute {k.text!r}", k.line, k.col)
            if k.text in out:
                raise DslError(f"attribute {k.text!r} given twice", k.line, k.col)
            out[k.text] = (val, k)
        return out

    def _declare(self, f: FieldDecl, tok: Tok):
        if f.name in self.by_name or f.name in self.bindings:
            raise DslError(f"{f.name!r} is already declared", tok.line, tok.col, "semantic")
        if f.name == "d":
            raise DslError("'d' is reserved for total derivatives", tok.line, tok.col, "semantic")
        self.fields.append(f)
        self.by_name[f.name] = f

    def _new_field(self, s, head, role):
        t = s.expect("name")
        attrs = self._attrs(s)
        extra = set(attrs) - ({"parity"} if role == FIELD else {"parity", "gh"})
        if extra:
            k = attrs[sorted(extra)[0]][1]
            raise DslError(f"attribute {k.text!r} not allowed on a {role}", k.line, k.col)
        parity = attrs.get("parity", (0 if role == FIELD else 1, None))[0]
        gh = attrs.get("gh", (0 if role == FIELD else 1, None))[0]
        try:
            f = FieldDecl(t.text, parity, gh, 0, role)
        except AlgebraError as exc:
            raise DslError(str(exc), t.line, t.col, "semantic") from None
        self._declare(f, t)

    def _st_field(self, s, head):
        self._new_field(s, head, FIELD)

    def _st_ghost(self, s, head):
        self._new_field(s, head, GHOST)

    def _st_antifield(self, s, head):
        t = s.expect("name")
        s.expect("name", "of")
        dt = s.expect("name")
        dual = self.by_name.get(dt.text)
        if dual is None:
            raise DslError(f"unknown field {dt.text!r}", dt.line, dt.col, "semantic")
        if dual.is_antifield:
            raise DslError(f"{dt.text!r} is itself an antifield", dt.line, dt.col, "semantic")
        f = antifield_for(dual, t.text)
        attrs = self._attrs(s)
        for key, expected in (("parity", f.parity), ("ant", f.antifield_number)):
            if key in attrs and attrs[key][0] != expected:
                k = attrs[key][1]
                raise DslError(f"{t.text}: {key} must be {expected} for the dual of {dual.name}",
                               k.line, k.col, "semantic")
        if "gh" in attrs and attrs["gh"][0] != 0:
            k = attrs["gh"][1]
            raise DslError("antifields carry zero ghost number", k.line, k.col, "semantic")
        self._declare(f, t)

    def _st_let(self, s, head):
        t = s.expect("name")
        if t.text in self.by_name or t.text in self.bindings or t.text == "d":
            raise DslError(f"{t.text!r} is already declared", t.line, t.col, "semantic")
        s.expect("op", "=")
        self.bindings[t.text] = self.expr(s)

    def _colon_expr(self, s) -> GradedPoly:
        if not s.accept("op", ":"):
            s.expect("op", "=")
        return self.expr(s)

    def _st_lagrangian(self, s, head):
        if self.lagrangian is not None:
            raise DslError("lagrangian given twice", head.line, head.col, "semantic")
        self.lagrangian = self._colon_expr(s)

    def _ref(self, s, roles, what) -> FieldDecl:
        t = s.expect("name")
        f = self.by_name.get(t.text)
        if f is None or f.role not in roles:
            raise DslError(f"{t.text!r} is not a declared {what}", t.line, t.col, "semantic")
        return f

    def _stage_no(self, s) -> int:
        t = s.peek()
        k = self._int(s)
        if k > 64:
            raise DslError("stage number too large", t.line, t.col)
        return k

    def _st_stage(self, s, head):
        k = self._stage_no(s)
        t = s.peek()
        gen = self._ref(s, (GHOST_ANTIFIELD,), "ghost antifield")
        if any(gen.name in g for g in self.stages.values()):
            raise DslError(f"generator {gen.name!r} given twice", t.line, t.col, "semantic")
        self.stages.setdefault(k, {})[gen.name] = self._colon_expr(s)

    def _st_alpha(self, s, head):
        k = self._stage_no(s)
        t = s.expect("name")
        if t.text not in self.by_name:
            raise DslError(f"unknown field {t.text!r}", t.line, t.col, "semantic")
        self.alphas.setdefault(k, {})[t.text] = self._colon_expr(s)

    def _st_xi(self, s, head):
        t = s.peek()
        g = self._ref(s, (GHOST,), "ghost")
        if g in self.xi:
            raise DslError(f"xi component for {g.name!r} given twice", t.line, t.col, "semantic")
        self.xi[g] = self._colon_expr(s)

    # expressions ----------------------------------------------------------
    def _coord(self, s) -> int:
        t = s.expect("name")
        names = self.coords if self.coords is not None else \
            [f"x{i}" for i in range(self.base_dim or 0)]
        if t.text not in names:
            raise DslError(f"unknown coordinate {t.text!r}", t.line, t.col, "semantic")
        return names.index(t.text)

    def expr(self, s) -> GradedPoly:
        acc = self.term(s)
        while True:
            if s.accept("op", "+"):
                acc = acc + self.term(s)
            elif s.accept("op", "-"):
                acc = acc - self.term(s)
            else:
                return acc

    def term(self, s) -> GradedPoly:
        t0 = s.peek()
        acc = self.unary(s)
        while True:
            t = s.accept("op", "*")
            if t is None:
                return acc
            rhs = self.unary(s)
            prod = acc * rhs
            if acc and rhs and not prod:
                self._warn(t0, "product vanishes identically (odd factor squared)")
            acc = prod

    def unary(self, s) -> GradedPoly:
        if s.accept("op", "-"):
            return -self.unary(s)
        if s.accept("op", "+"):
            return self.unary(s)
        return self.power(s)

    def power(self, s) -> GradedPoly:
        t0 = s.peek()
        base = self.atom(s)
        if s.accept("op", "^"):
            t = s.peek()
            k = self._int(s)
            if k > MAX_EXPONENT:
                raise DslError(f"exponent larger than {MAX_EXPONENT}", t.line, t.col, "semantic")
            out = base ** k
            if base and k >= 2 and not out:
                self._warn(t0, "power vanishes identically (odd factor squared)")
            return out
        return base

    def atom(self, s) -> GradedPoly:
        t = s.next()
        if t.kind == "number":
            num, _, den = t.text.partition("/")
            if den and int(den) == 0:
                raise DslError("zero denominator", t.line, t.col, "semantic")
            return GradedPoly.const(Fraction(t.text))
        if t.kind == "op" and t.text == "(":
            e = self.expr(s)
            s.expect("op", ")")
            return e
        if t.kind != "name":
            raise DslError(f"unexpected {t.text!r}", t.line, t.col)
        if t.text == "d" and s.accept("op", "("):
            e = self.expr(s)
            s.expect("op", ",")
            e = total_derivative(e, self._coord(s))
            while s.accept("op", ","):
                e = total_derivative(e, self._coord(s))
            s.expect("op", ")")
            return e
        if t.text in self.bindings:
            if s.peek() is not None and s.peek().text == "[":
                b = s.peek()
                raise DslError("jet indices on a binding; use d(...)", b.line, b.col, "semantic")
            return self.bindings[t.text]
        f = self.by_name.get(t.text)
        if f is None:
            raise DslError(f"unknown field {t.text!r}", t.line, t.col, "semantic")
        coords = []
        if s.accept("op", "["):
            if not s.accept("op", "]"):
                coords.append(self._coord(s))
                while s.accept("op", ","):
                    coords.append(self._coord(s))
                s.expect("op", "]")
        return f(*coords)

    def _warn(self, tok: Optional[Tok], msg: str):
        if tok is not None:
            self.diagnostics.append(Diagnostic(tok.line, tok.col, msg))

    # assembly -------------------------------------------------------------
    def build(self) -> Model:
        if self.name is None:
            raise DslError("missing 'model' statement", 1, 1, "semantic")
        if self.base_dim is None:
            raise DslError("missing 'base' statement", 1, 1, "semantic")
        if set(self.alphas) - set(self.stages):
            k = min(set(self.alphas) - set(self.stages))
            raise DslError(f"alpha witnesses for undeclared stage {k}", kind="semantic")
        ks = sorted(self.stages)
        if ks != list(range(len(ks))):
            raise DslError(f"stages must be numbered 0..N without gaps, got {ks}", kind="semantic")
        stages = [NoetherStage(k, self.stages[k], self.alphas.get(k, {})) for k in ks]
        try:
            xi = Derivation(self.xi, LEFT, 1, 1)
            return Model(
                name=self.name,
                base_dim=self.base_dim,
                fields=tuple(self.fields),
                lagrangian=self.lagrangian if self.lagrangian is not None else GradedPoly(),
                stages=tuple(stages),
                brst_xi=xi,
                description=self.description,
                coord_names=tuple(self.coords or ()),
                notes=tuple(self.notes),
            )
        except (ModelError, AlgebraError) as exc:
            raise DslError(str(exc), kind="semantic") from None


def parse_model_with_diagnostics(src: str) -> tuple:
    """``(Model, [Diagnostic, ...])``; raises :class:`DslError` on malformed input."""
    p = _Parser()
    try:
        for toks in _statements(src):
            p.statement(toks)
        return p.build(), p.diagnostics
    except DslError:
        raise
    except RecursionError:
        raise DslError("expression nested too deeply") from None
    except (AlgebraError, ModelError) as exc:
        raise DslError(str(exc), kind="semantic") from None


def parse_model(src: str) -> Model:
    """Parse a model source; lint findings are issued as :class:`DslWarning`."""
    model, diags = parse_model_with_diagnostics(src)
    for d in diags:
        warnings.warn(str(d), DslWarning, stacklevel=2)
    return model


# renderer ---------------------------------------------------------------------

_WRAP = 96


def _wrapped(head: str, poly: GradedPoly, coord_names) -> list:
    text = poly.render(coord_names)
    pieces = re.split(r" (?=[+-] )", text)
    lines = [head + " " + pieces[0]]
    for piece in pieces[1:]:
        if len(lines[-1]) + 1 + len(piece) > _WRAP:
            lines.append("    " + piece)
        else:
            lines[-1] += " " + piece
    return lines


def _parity_word(p: int) -> str:
    return "odd" if p else "even"


def render_model(m: Model) -> str:
    """Source text that :func:`parse_model` maps back to an equal model."""
    cn = m.coord_names
    out = [f"model {json.dumps(m.name)}"]
    if m.description:
        out.append(f"description {json.dumps(m.description)}")
    for note in m.notes:
        out.append(f"note {json.dumps(note)}")
    out.append(f"base {m.base_dim}")
    out.append("coords " + " ".join(cn))
    out.append("")
    for f in m.fields:
        if f.role == FIELD:
            out.append(f"field {f.name} parity={_parity_word(f.parity)}")
        elif f.role == GHOST:
            out.append(f"ghost {f.name} parity={_parity_word(f.parity)} gh={f.ghost_number}")
        else:
            out.append(f"antifield {f.name} of {f.dual_of}")
    out.append("")
    out.extend(_wrapped("lagrangian:", m.lagrangian, cn))
    for st in m.stages:
        out.append("")
        for gen, delta in st.generators.items():
            out.extend(_wrapped(f"stage {st.stage} {gen}:", delta, cn))
        for tgt, a in st.alpha.items():
            out.extend(_wrapped(f"alpha {st.stage} {tgt}:", a, cn))
    if m.brst_xi:
        out.append("")
        for b, v in m.brst_xi.components.items():
            out.extend(_wrapped(f"xi {b.name}:", v, cn))
    return "\n".join(out) + "\n"
