"""Symbolic varieties in K_0(Var_Q) and their compactly supported chi_c in GW(Q).

Expressions are small trees evaluated by cut-and-paste rules:

    pt -> <1>            P^n -> sum_{i<=n} <-1>^i      Gm -> <-1> - <1>
    A^n -> <-1>^n        x * y -> product              x + y, x - y -> sum, difference
    bl(X; Y; c) -> chi(X) + sum_{i=1}^{c-1} <-1>^i chi(Y)
    pb(Y; c)    -> sum_{i=0}^{c-1} <-1>^i chi(Y)
    toric(F)    -> sum over cones of (<-1> - <1>)^(n - dim cone)

Closedness and smoothness of centres are assertions of the caller; they are
recorded in the report but never checked.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .gw import GWClass, ONE, diag, sum_classes, to_canonical_string
from .toric import Fan, load_fan, orbit_counts

__all__ = [
    "Point", "Affine", "Proj", "Gm", "Toric", "Product", "Coproduct", "Difference", "Blowup", "ProjBundle",
    "VarietyExpr", "K0Report", "ExprParseError",
    "chi_c", "chi_c_report", "orbit_chi", "bittner_residual", "euler_rank", "dimension",
    "parse_expr", "bittner_grid",
]

MINUS_ONE = diag(-1)
GM = MINUS_ONE - ONE


@dataclass(frozen=True)
class Point:
    def __str__(self):
        return "pt"


@dataclass(frozen=True)
class Affine:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("affine dimension must be non-negative")

    def __str__(self):
        return f"A^{self.n}"


@dataclass(frozen=True)
class Proj:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("projective dimension must be non-negative")

    def __str__(self):
        return f"P^{self.n}"


@dataclass(frozen=True)
class Gm:
    def __str__(self):
        return "Gm"


@dataclass(frozen=True)
class Toric:
    fan: Fan
    label: str = field(default="", compare=False)

    def __str__(self):
        return f"toric({self.label or self.fan.name})"


@dataclass(frozen=True)
class Product:
    left: "VarietyExpr"
    right: "VarietyExpr"

    def __str__(self):
        return f"({self.left} * {self.right})"


@dataclass(frozen=True)
class Coproduct:
    left: "VarietyExpr"
    right: "VarietyExpr"

    def __str__(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True)
class Difference:
    """The open complement of ``closed`` in ``total``."""

    total: "VarietyExpr"
    closed: "VarietyExpr"

    def __str__(self):
        return f"({self.total} - {self.closed})"


@dataclass(frozen=True)
class Blowup:
    base: "VarietyExpr"
    center: "VarietyExpr"
    codim: int

    def __post_init__(self):
        if self.codim < 2:
            raise ValueError("blow-up codimension must be at least 2")

    def __str__(self):
        return f"bl({self.base}; {self.center}; {self.codim})"


@dataclass(frozen=True)
class ProjBundle:
    base: "VarietyExpr"
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("projective bundle rank must be at least 1")

    def __str__(self):
        return f"pb({self.base}; {self.rank})"


VarietyExpr = Union[Point, Affine, Proj, Gm, Toric, Product, Coproduct, Difference, Blowup, ProjBundle]


def orbit_chi(fan: Fan) -> GWClass:
    """Sum over the cones of the fan of the class of a torus of the complementary dimension."""
    n = fan.dim
    return sum_classes(GM ** (n - d) * c for d, c in enumerate(orbit_counts(fan)))


def _alt_sum(x: GWClass, terms: range) -> GWClass:
    return sum_classes(MINUS_ONE ** i * x for i in terms)


@dataclass
class K0Report:
    expr: VarietyExpr
    chi_c: GWClass
    euler_rank: int
    trace: list[str]
    assumptions: list[str]

    def to_record(self) -> dict:
        return {"expr": str(self.expr), "chi_c": to_canonical_string(self.chi_c, invariants=False),
                "class": self.chi_c.to_record(), "euler_rank": self.euler_rank,
                "trace": self.trace, "assumptions": self.assumptions}


def _eval(e: VarietyExpr, trace: list[str], assumptions: list[str]) -> GWClass:
    if isinstance(e, Point):
        out, rule = ONE, "point"
    elif isinstance(e, Proj):
        out, rule = _alt_sum(ONE, range(e.n + 1)), "projective space"
    elif isinstance(e, Gm):
        out, rule = GM, "torus"
    elif isinstance(e, Affine):
        out, rule = MINUS_ONE ** e.n, "affine space"
    elif isinstance(e, Toric):
        out, rule = orbit_chi(e.fan), f"torus orbits {orbit_counts(e.fan)}"
    elif isinstance(e, Product):
        out, rule = _eval(e.left, trace, assumptions) * _eval(e.right, trace, assumptions), "product"
    elif isinstance(e, Coproduct):
        out, rule = _eval(e.left, trace, assumptions) + _eval(e.right, trace, assumptions), "disjoint union"
    elif isinstance(e, Difference):
        assumptions.append(f"{e.closed} is closed in {e.total}")
        out, rule = _eval(e.total, trace, assumptions) - _eval(e.closed, trace, assumptions), "scissors"
    elif isinstance(e, Blowup):
        assumptions.append(f"{e.center} is smooth, closed of codimension {e.codim} in {e.base}")
        x = _eval(e.base, trace, assumptions)
        y = _eval(e.center, trace, assumptions)
        out, rule = x + _alt_sum(y, range(1, e.codim)), f"blow-up, codim {e.codim}"
    elif isinstance(e, ProjBundle):
        y = _eval(e.base, trace, assumptions)
        out, rule = _alt_sum(y, range(e.rank)), f"projective bundle, rank {e.rank}"
    else:
        raise TypeError(f"not a variety expression: {e!r}")
    trace.append(f"{e}: {rule} -> {to_canonical_string(out, invariants=False)}")
    return out


def euler_rank(e: VarietyExpr) -> int:
    """Topological Euler characteristic by integer rules alone."""
    if isinstance(e, Point):
        return 1
    if isinstance(e, Proj):
        return e.n + 1
    if isinstance(e, Gm):
        return 0
    if isinstance(e, Affine):
        return 1
    if isinstance(e, Toric):
        return len(e.fan.max_cones)
    if isinstance(e, Product):
        return euler_rank(e.left) * euler_rank(e.right)
    if isinstance(e, Coproduct):
        return euler_rank(e.left) + euler_rank(e.right)
    if isinstance(e, Difference):
        return euler_rank(e.total) - euler_rank(e.closed)
    if isinstance(e, Blowup):
        return euler_rank(e.base) + (e.codim - 1) * euler_rank(e.center)
    if isinstance(e, ProjBundle):
        return e.rank * euler_rank(e.base)
    raise TypeError(f"not a variety expression: {e!r}")


def chi_c_report(e: VarietyExpr) -> K0Report:
    trace: list[str] = []
    assumptions: list[str] = []
    value = _eval(e, trace, assumptions)
    rank = euler_rank(e)
    if rank != value.rank:
        raise AssertionError(f"rank rules disagree for {e}: {rank} vs {value.rank}")
    return K0Report(e, value, rank, trace, assumptions)


def chi_c(e: VarietyExpr) -> GWClass:
    return _eval(e, [], [])


def bittner_residual(x: VarietyExpr, y: VarietyExpr, c: int) -> GWClass:
    """chi(Bl_Y X) - chi(E) - chi(X) + chi(Y) with E = pb(Y; c); always zero."""
    return chi_c(Blowup(x, y, c)) - chi_c(ProjBundle(y, c)) - chi_c(x) + chi_c(y)


def dimension(e: VarietyExpr) -> int:
    if isinstance(e, Point):
        return 0
    if isinstance(e, (Proj, Affine)):
        return e.n
    if isinstance(e, Gm):
        return 1
    if isinstance(e, Toric):
        return e.fan.dim
    if isinstance(e, Product):
        return dimension(e.left) + dimension(e.right)
    if isinstance(e, (Coproduct, Difference)):
        a, b = (e.left, e.right) if isinstance(e, Coproduct) else (e.total, e.closed)
        return max(dimension(a), dimension(b))
    if isinstance(e, Blowup):
        return dimension(e.base)
    if isinstance(e, ProjBundle):
        return dimension(e.base) + e.rank - 1
    raise TypeError(f"not a variety expression: {e!r}")


# parser ----------------------------------------------------------------------

class ExprParseError(ValueError):
    def __init__(self, pos: int, message: str):
        self.pos = pos
        super().__init__(f"at position {pos}: {message}")


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[-+*^();]))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ExprParseError(i, f"unexpected character {text[i]!r}")
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        i = m.end()
        if kind == "name" and m.group(kind) == "toric":
            # the argument is raw text (a builtin name or a path) up to the matching ')'
            j = i
            while j < len(text) and text[j].isspace():
                j += 1
            if j >= len(text) or text[j] != "(":
                raise ExprParseError(j, "expected '(' after toric")
            toks.append(_Tok("sym", "(", j))
            depth, k = 1, j + 1
            while k < len(text) and depth:
                depth += {"(": 1, ")": -1}.get(text[k], 0)
                k += 1
            if depth:
                raise ExprParseError(j, "unterminated toric(...)")
            toks.append(_Tok("raw", text[j + 1:k - 1].strip(), j + 1))
            toks.append(_Tok("sym", ")", k - 1))
            i = k
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str, text: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = repr(text) if text else {"int": "an integer", "name": "a name"}.get(kind, kind)
            got = repr(t.text) if t.kind != "end" else "end of input"
            raise ExprParseError(t.pos, f"expected {want}, found {got}")
        self.i += 1
        return t

    def integer(self) -> int:
        return int(self.take("int").text)

    def expr(self) -> VarietyExpr:
        out = self.term()
        while self.tok.kind == "sym" and self.tok.text in "+-":
            op = self.take("sym").text
            rhs = self.term()
            out = Coproduct(out, rhs) if op == "+" else Difference(out, rhs)
        return out

    def term(self) -> VarietyExpr:
        out = self.atom()
        while self.tok.kind == "sym" and self.tok.text == "*":
            self.take("sym")
            out = Product(out, self.atom())
        return out

    def atom(self) -> VarietyExpr:
        t = self.tok
        if t.kind == "sym" and t.text == "(":
            self.take("sym")
            out = self.expr()
            self.take("sym", ")")
            return out
        if t.kind != "name":
            raise ExprParseError(t.pos, f"expected a variety, found {t.text!r}" if t.kind != "end"
                                 else "expected a variety, found end of input")
        self.take("name")
        name = t.text
        if name == "pt":
            return Point()
        if name == "Gm":
            return Gm()
        if name in ("A", "P"):
            self.take("sym", "^")
            n = self.integer()
            return Affine(n) if name == "A" else Proj(n)
        if name == "toric":
            self.take("sym", "(")
            raw = self.take("raw")
            try:
                fan = load_fan(raw.text)
            except ValueError as exc:
                raise ExprParseError(raw.pos, str(exc)) from None
            self.take("sym", ")")
            return Toric(fan, raw.text)
        if name == "bl":
            self.take("sym", "(")
            base = self.expr()
            self.take("sym", ";")
            center = self.expr()
            self.take("sym", ";")
            pos = self.tok.pos
            c = self.integer()
            self.take("sym", ")")
            if c < 2:
                raise ExprParseError(pos, "blow-up codimension must be at least 2")
            return Blowup(base, center, c)
        if name == "pb":
            self.take("sym", "(")
            base = self.expr()
            self.take("sym", ";")
            pos = self.tok.pos
            c = self.integer()
            self.take("sym", ")")
            if c < 1:
                raise ExprParseError(pos, "projective bundle rank must be at least 1")
            return ProjBundle(base, c)
        raise ExprParseError(t.pos, f"unknown variety {name!r}")


def parse_expr(text: str) -> VarietyExpr:
    """Parse ``pt``, ``A^n``, ``P^n``, ``Gm``, ``toric(F)``, ``*``, ``+``, ``-``, ``bl(X; Y; c)``, ``pb(Y; c)``."""
    p = _Parser(text)
    out = p.expr()
    p.take("end")
    return out


_GRID_X = ["P^2", "P^3", "P^4", "P^5", "P^6", "P^1 * P^1", "P^1 * P^2", "P^2 * P^2", "P^1 * P^3",
           "P^2 * P^3", "P^1 * P^1 * P^1", "toric(P2)", "toric(hirzebruch:1)", "toric(P1xP1)", "toric(P3)",
           "P^1 * toric(hirzebruch:2)", "bl(P^2; pt; 2)", "bl(P^3; pt; 3)", "pb(P^2; 2)", "pb(P^1 * P^1; 3)"]
_GRID_Y = ["pt", "P^1", "P^2", "P^1 * P^1", "P^3", "toric(P1)", "bl(P^2; pt; 2)"]


def bittner_grid() -> Iterator[tuple[VarietyExpr, VarietyExpr, int]]:
    """Triples (X, Y, c) with dim X = dim Y + c and 2 <= c <= 4."""
    xs = [parse_expr(s) for s in _GRID_X]
    ys = [parse_expr(s) for s in _GRID_Y]
    for x, y in itertools.product(xs, ys):
        c = dimension(x) - dimension(y)
        if 2 <= c <= 4:
            yield x, y, c
