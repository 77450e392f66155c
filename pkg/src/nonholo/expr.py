"""Symbolic scalar expressions over the coordinates x1, x2, x3.

A small calculator language, not a CAS: expression trees support numeric
evaluation (floats or numpy arrays), exact symbolic differentiation, and
light simplification (constant folding, 0/1 identities).  The grammar is

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-')? atom ('^' integer)?
    atom   := number | 'x1' | 'x2' | 'x3' | func '(' expr ')' | '(' expr ')'
    func   := 'sin' | 'cos' | 'exp'

Exponents must be integer literals; everything else is a parse error with
a character offset.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np

__all__ = [
    "ScalarExpr",
    "Const",
    "Var",
    "Neg",
    "Sin",
    "Cos",
    "Exp",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "ParseError",
    "parse",
    "evaluate",
    "diff",
    "substitute",
    "compile_expr",
    "polynomial",
    "is_zero_polynomial",
    "ZERO",
    "ONE",
    "X1",
    "X2",
    "X3",
]


class ScalarExpr:
    """Base class for expression nodes.  Nodes are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other: "ExprLike") -> "ScalarExpr":
        return add(self, _coerce(other))

    def __radd__(self, other: "ExprLike") -> "ScalarExpr":
        return add(_coerce(other), self)

    def __sub__(self, other: "ExprLike") -> "ScalarExpr":
        return sub(self, _coerce(other))

    def __rsub__(self, other: "ExprLike") -> "ScalarExpr":
        return sub(_coerce(other), self)

    def __mul__(self, other: "ExprLike") -> "ScalarExpr":
        return mul(self, _coerce(other))

    def __rmul__(self, other: "ExprLike") -> "ScalarExpr":
        return mul(_coerce(other), self)

    def __truediv__(self, other: "ExprLike") -> "ScalarExpr":
        return div(self, _coerce(other))

    def __rtruediv__(self, other: "ExprLike") -> "ScalarExpr":
        return div(_coerce(other), self)

    def __neg__(self) -> "ScalarExpr":
        return neg(self)

    def __pow__(self, n: int) -> "ScalarExpr":
        return power(self, n)

    def __call__(self, *point: float):
        return evaluate(self, point)


@dataclass(frozen=True, slots=True)
class Const(ScalarExpr):
    value: float


@dataclass(frozen=True, slots=True)
class Var(ScalarExpr):
    index: int  # 1-based: 1 -> x1, 2 -> x2, 3 -> x3

    def __post_init__(self) -> None:
        if self.index not in (1, 2, 3):
            raise ValueError(f"variable index must be 1, 2, or 3, got {self.index}")


@dataclass(frozen=True, slots=True)
class Neg(ScalarExpr):
    arg: ScalarExpr


@dataclass(frozen=True, slots=True)
class Sin(ScalarExpr):
    arg: ScalarExpr


@dataclass(frozen=True, slots=True)
class Cos(ScalarExpr):
    arg: ScalarExpr


@dataclass(frozen=True, slots=True)
class Exp(ScalarExpr):
    arg: ScalarExpr


@dataclass(frozen=True, slots=True)
class Add(ScalarExpr):
    left: ScalarExpr
    right: ScalarExpr


@dataclass(frozen=True, slots=True)
class Sub(ScalarExpr):
    left: ScalarExpr
    right: ScalarExpr


@dataclass(frozen=True, slots=True)
class Mul(ScalarExpr):
    left: ScalarExpr
    right: ScalarExpr


@dataclass(frozen=True, slots=True)
class Div(ScalarExpr):
    left: ScalarExpr
    right: ScalarExpr


@dataclass(frozen=True, slots=True)
class Pow(ScalarExpr):
    base: ScalarExpr
    exponent: int

    def __post_init__(self) -> None:
        if not isinstance(self.exponent, int) or isinstance(self.exponent, bool):
            raise TypeError("exponent must be an integer")


ExprLike = Union[ScalarExpr, float, int]

ZERO = Const(0.0)
ONE = Const(1.0)
X1 = Var(1)
X2 = Var(2)
X3 = Var(3)


def _coerce(value: ExprLike) -> ScalarExpr:
    if isinstance(value, ScalarExpr):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot use {type(value).__name__} as an expression")


def _is_const(e: ScalarExpr, v: Optional[float] = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


# Smart constructors.  They fold constants and drop 0/1 identities so that
# derivatives stay readable and structural cancellation (a - a -> 0) catches
# the easy symbolic-zero cases.

def add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if a == b:
        return ZERO
    return Sub(a, b)


def mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Mul(a, b)


def div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def neg(a: ScalarExpr) -> ScalarExpr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: ScalarExpr, n: int) -> ScalarExpr:
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError("exponent must be an integer")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const) and (a.value != 0.0 or n > 0):
        return Const(a.value**n)
    return Pow(a, n)


def sin(a: ExprLike) -> ScalarExpr:
    a = _coerce(a)
    if isinstance(a, Const):
        return Const(math.sin(a.value))
    return Sin(a)


def cos(a: ExprLike) -> ScalarExpr:
    a = _coerce(a)
    if isinstance(a, Const):
        return Const(math.cos(a.value))
    return Cos(a)


def exp(a: ExprLike) -> ScalarExpr:
    a = _coerce(a)
    if isinstance(a, Const):
        return Const(math.exp(a.value))
    return Exp(a)


def evaluate(e: ScalarExpr, point):
    """Evaluate ``e`` at ``point`` (a sequence of floats or numpy arrays).

    Coordinates beyond the point's length must not appear in the expression.
    Division by zero follows numpy semantics on arrays (inf/nan propagate).
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        return _eval(e, point)


def _eval(e: ScalarExpr, p):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return p[e.index - 1]
    if isinstance(e, Neg):
        return -_eval(e.arg, p)
    if isinstance(e, Sin):
        return np.sin(_eval(e.arg, p))
    if isinstance(e, Cos):
        return np.cos(_eval(e.arg, p))
    if isinstance(e, Exp):
        return np.exp(_eval(e.arg, p))
    if isinstance(e, Add):
        return _eval(e.left, p) + _eval(e.right, p)
    if isinstance(e, Sub):
        return _eval(e.left, p) - _eval(e.right, p)
    if isinstance(e, Mul):
        return _eval(e.left, p) * _eval(e.right, p)
    if isinstance(e, Div):
        return _eval(e.left, p) / _eval(e.right, p)
    if isinstance(e, Pow):
        base = _eval(e.base, p)
        if e.exponent < 0:
            return np.asarray(base, dtype=float) ** e.exponent if isinstance(base, np.ndarray) else float(base) ** e.exponent
        return base**e.exponent
    raise TypeError(f"not an expression node: {e!r}")


def compile_expr(e: ScalarExpr):
    """Build a fast ``f(point) -> float`` closure for scalar evaluation.

    Used in integration hot loops where per-node dispatch would dominate.
    """
    if isinstance(e, Const):
        v = e.value
        return lambda p: v
    if isinstance(e, Var):
        i = e.index - 1
        return lambda p: p[i]
    if isinstance(e, Neg):
        f = compile_expr(e.arg)
        return lambda p: -f(p)
    if isinstance(e, Sin):
        f = compile_expr(e.arg)
        msin = math.sin
        return lambda p: msin(f(p))
    if isinstance(e, Cos):
        f = compile_expr(e.arg)
        mcos = math.cos
        return lambda p: mcos(f(p))
    if isinstance(e, Exp):
        f = compile_expr(e.arg)
        mexp = math.exp
        return lambda p: mexp(f(p))
    if isinstance(e, Add):
        f, g = compile_expr(e.left), compile_expr(e.right)
        return lambda p: f(p) + g(p)
    if isinstance(e, Sub):
        f, g = compile_expr(e.left), compile_expr(e.right)
        return lambda p: f(p) - g(p)
    if isinstance(e, Mul):
        f, g = compile_expr(e.left), compile_expr(e.right)
        return lambda p: f(p) * g(p)
    if isinstance(e, Div):
        f, g = compile_expr(e.left), compile_expr(e.right)
        return lambda p: f(p) / g(p)
    if isinstance(e, Pow):
        f, n = compile_expr(e.base), e.exponent
        return lambda p: f(p) ** n
    raise TypeError(f"not an expression node: {e!r}")


def diff(e: ScalarExpr, index: int) -> ScalarExpr:
    """Exact partial derivative with respect to x_index (1-based)."""
    if index not in (1, 2, 3):
        raise ValueError(f"variable index must be 1, 2, or 3, got {index}")
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == index else ZERO
    if isinstance(e, Neg):
        return neg(diff(e.arg, index))
    if isinstance(e, Sin):
        return mul(cos(e.arg), diff(e.arg, index))
    if isinstance(e, Cos):
        return neg(mul(sin(e.arg), diff(e.arg, index)))
    if isinstance(e, Exp):
        return mul(Exp(e.arg), diff(e.arg, index))
    if isinstance(e, Add):
        return add(diff(e.left, index), diff(e.right, index))
    if isinstance(e, Sub):
        return sub(diff(e.left, index), diff(e.right, index))
    if isinstance(e, Mul):
        return add(
            mul(diff(e.left, index), e.right),
            mul(e.left, diff(e.right, index)),
        )
    if isinstance(e, Div):
        num = sub(
            mul(diff(e.left, index), e.right),
            mul(e.left, diff(e.right, index)),
        )
        return div(num, power(e.right, 2))
    if isinstance(e, Pow):
        inner = mul(Const(float(e.exponent)), power(e.base, e.exponent - 1))
        return mul(inner, diff(e.base, index))
    raise TypeError(f"not an expression node: {e!r}")


def substitute(e: ScalarExpr, mapping: Mapping[int, ScalarExpr]) -> ScalarExpr:
    """Replace each variable index in ``mapping`` by its expression."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return mapping.get(e.index, e)
    if isinstance(e, Neg):
        return neg(substitute(e.arg, mapping))
    if isinstance(e, Sin):
        return sin(substitute(e.arg, mapping))
    if isinstance(e, Cos):
        return cos(substitute(e.arg, mapping))
    if isinstance(e, Exp):
        return exp(substitute(e.arg, mapping))
    if isinstance(e, Add):
        return add(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Sub):
        return sub(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Mul):
        return mul(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Div):
        return div(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Pow):
        return power(substitute(e.base, mapping), e.exponent)
    raise TypeError(f"not an expression node: {e!r}")


# Multivariate polynomial view, used for symbolic zero certificates.  Keys
# are (d1, d2, d3) exponent triples, values are float coefficients.

Poly = dict

_POLY_TERM_CAP = 20000


def polynomial(e: ScalarExpr) -> Optional[Poly]:
    """Exponent->coefficient view of ``e`` if it is polynomial, else None.

    Division is admitted only by a nonzero constant; sin/cos/exp and
    negative exponents return None.
    """
    if isinstance(e, Const):
        return {(0, 0, 0): e.value} if e.value != 0.0 else {}
    if isinstance(e, Var):
        key = tuple(1 if i == e.index else 0 for i in (1, 2, 3))
        return {key: 1.0}
    if isinstance(e, Neg):
        p = polynomial(e.arg)
        return None if p is None else {k: -v for k, v in p.items()}
    if isinstance(e, (Sin, Cos, Exp)):
        return None
    if isinstance(e, (Add, Sub)):
        pa, pb = polynomial(e.left), polynomial(e.right)
        if pa is None or pb is None:
            return None
        out = dict(pa)
        s = 1.0 if isinstance(e, Add) else -1.0
        for k, v in pb.items():
            out[k] = out.get(k, 0.0) + s * v
        return out
    if isinstance(e, Mul):
        pa, pb = polynomial(e.left), polynomial(e.right)
        if pa is None or pb is None:
            return None
        return _poly_mul(pa, pb)
    if isinstance(e, Div):
        pb = polynomial(e.right)
        if pb is None or set(pb) - {(0, 0, 0)}:
            return None
        c = pb.get((0, 0, 0), 0.0)
        if c == 0.0:
            return None
        pa = polynomial(e.left)
        return None if pa is None else {k: v / c for k, v in pa.items()}
    if isinstance(e, Pow):
        if e.exponent < 0:
            return None
        pb = polynomial(e.base)
        if pb is None:
            return None
        out: Poly = {(0, 0, 0): 1.0}
        for _ in range(e.exponent):
            out = _poly_mul(out, pb)
            if out is None:
                return None
        return out
    raise TypeError(f"not an expression node: {e!r}")


def _poly_mul(pa: Poly, pb: Poly) -> Optional[Poly]:
    if len(pa) * len(pb) > _POLY_TERM_CAP:
        return None
    out: Poly = {}
    for ka, va in pa.items():
        for kb, vb in pb.items():
            k = (ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2])
            out[k] = out.get(k, 0.0) + va * vb
    return out


def is_zero_polynomial(e: ScalarExpr, tol: float = 1e-10) -> bool:
    """True when ``e`` has a polynomial view whose coefficients all vanish.

    This is the symbolic zero certificate: exact for integer-coefficient
    trees, tolerant of last-ulp rounding in coefficient products.  Returns
    False for non-polynomial expressions even if they are identically zero.
    """
    p = polynomial(e)
    if p is None:
        return False
    return all(abs(c) <= tol for c in p.values())


class ParseError(ValueError):
    """Parse failure carrying the character offset of the offending token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_FUNCS = {"sin": sin, "cos": cos, "exp": exp}
_VARS = {"x1": X1, "x2": X2, "x3": X3}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        n = len(text)
        while pos < n:
            m = _TOKEN_RE.match(text, pos)
            if m is None or m.end() == pos:
                at = pos + len(text[pos:]) - len(text[pos:].lstrip())
                if at >= n:
                    break
                raise ParseError(f"unexpected character {text[at]!r}", at)
            if m.group("num") is not None:
                self.tokens.append(("num", m.group("num"), m.start("num")))
            elif m.group("ident") is not None:
                self.tokens.append(("ident", m.group("ident"), m.start("ident")))
            else:
                self.tokens.append(("op", m.group("op"), m.start("op")))
            pos = m.end()
        self.tokens.append(("end", "", n))
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)
        self.advance()

    def parse(self) -> ScalarExpr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return e

    def expr(self) -> ScalarExpr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                e = add(e, rhs) if val == "+" else sub(e, rhs)
            else:
                return e

    def term(self) -> ScalarExpr:
        e = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                rhs = self.factor()
                e = mul(e, rhs) if val == "*" else div(e, rhs)
            else:
                return e

    def factor(self) -> ScalarExpr:
        kind, val, _ = self.peek()
        negate = False
        if kind == "op" and val == "-":
            self.advance()
            negate = True
        e = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            e = power(e, self.integer_exponent())
        return neg(e) if negate else e

    def integer_exponent(self) -> int:
        sign = 1
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            sign = -1
            kind, val, pos = self.peek()
        if kind != "num":
            raise ParseError("expected integer exponent", pos)
        if not re.fullmatch(r"\d+", val):
            raise ParseError(f"exponent must be an integer, got {val!r}", pos)
        self.advance()
        return sign * int(val)

    def atom(self) -> ScalarExpr:
        kind, val, pos = self.advance()
        if kind == "num":
            return Const(float(val))
        if kind == "ident":
            if val in _VARS:
                return _VARS[val]
            if val in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return _FUNCS[val](arg)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError("expected a number, variable, or '('", pos)


def parse(text: str) -> ScalarExpr:
    """Parse the calculator grammar into an expression tree."""
    return _Parser(text).parse()
