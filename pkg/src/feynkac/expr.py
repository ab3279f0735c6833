"""Mini expression language for spatial data (U, G0, f spatial part).

Grammar:

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' uint)?
    atom   := number | 'x' | '(' expr ')' | fn '(' expr {',' expr} ')'
    fn     in {chi, exp, sin, cos};  chi(a, b) = indicator of the open
             interval (a, b), its arguments must be (signed) numeric
             literals and are recorded as breakpoints.

Numbers are kept as exact Fractions so the extended-precision evaluator
loses nothing on literals like 0.5.  Every node evaluates vectorized over
float64 arrays and, separately, over double-double arrays (mpmath supplies
exp/sin/cos there).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .ddreal import DD, dd_from_mp
from .errors import FeynkacError


class ExprError(FeynkacError):
    """Syntax or semantic error in a spatial expression."""


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)(?:[eE]([+-]?\d+))?|([A-Za-z_]+)|(.))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprError(f"cannot tokenize at position {pos}: {text[pos:]!r}")
        num, exp10, ident, punct = m.groups()
        if num is not None:
            val = Fraction(num)
            if exp10 is not None:
                val *= Fraction(10) ** int(exp10)
            tokens.append(("num", val))
        elif ident is not None:
            tokens.append(("ident", ident))
        elif punct.strip():
            tokens.append(("op", punct))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


# --- AST ----------------------------------------------------------------------

class Node:
    def eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval_dd(self, x: DD) -> DD:
        raise NotImplementedError

    def degree(self):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Node):
    value: Fraction

    def eval(self, x):
        return np.full(np.shape(x), float(self.value))

    def eval_dd(self, x):
        out = DD.zeros(x.shape)
        out.data[...] = dd_from_mp(self.value).data
        return out

    def degree(self):
        return 0

    def text(self):
        v = self.value
        if v.denominator == 1:
            return str(v.numerator)
        return repr(float(v))


@dataclass(frozen=True)
class Var(Node):
    def eval(self, x):
        return np.asarray(x, dtype=float)

    def eval_dd(self, x):
        return x.copy()

    def degree(self):
        return 1

    def text(self):
        return "x"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def eval(self, x):
        a, b = self.left.eval(x), self.right.eval(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def eval_dd(self, x):
        a, b = self.left.eval_dd(x), self.right.eval_dd(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def degree(self):
        dl, dr = self.left.degree(), self.right.degree()
        if dl is None or dr is None:
            return None
        if self.op in "+-":
            return max(dl, dr)
        if self.op == "*":
            return dl + dr
        return dl if dr == 0 else None

    def breakpoints(self):
        return self.left.breakpoints() + self.right.breakpoints()

    def text(self):
        return f"({self.left.text()} {self.op} {self.right.text()})"


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def eval(self, x):
        return -self.arg.eval(x)

    def eval_dd(self, x):
        return -self.arg.eval_dd(x)

    def degree(self):
        return self.arg.degree()

    def breakpoints(self):
        return self.arg.breakpoints()

    def text(self):
        return f"(-{self.arg.text()})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def eval(self, x):
        return self.base.eval(x) ** self.exponent

    def eval_dd(self, x):
        b = self.base.eval_dd(x)
        out = DD.from_float(np.ones(x.shape))
        for _ in range(self.exponent):
            out = out * b
        return out

    def degree(self):
        d = self.base.degree()
        return None if d is None else d * self.exponent

    def breakpoints(self):
        return self.base.breakpoints()

    def text(self):
        return f"{self.base.text()}^{self.exponent}"


@dataclass(frozen=True)
class Chi(Node):
    a: Fraction
    b: Fraction

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        return ((x > float(self.a)) & (x < float(self.b))).astype(float)

    def eval_dd(self, x):
        mask = (x.hi > float(self.a)) & (x.hi < float(self.b))
        return DD.from_float(mask.astype(float))

    def degree(self):
        return 0

    def breakpoints(self):
        return (float(self.a), float(self.b))

    def text(self):
        def fmt(v):
            return str(v.numerator) if v.denominator == 1 else repr(float(v))
        return f"chi({fmt(self.a)}, {fmt(self.b)})"


_MP_FN = {"exp": mpmath.exp, "sin": mpmath.sin, "cos": mpmath.cos}
_NP_FN = {"exp": np.exp, "sin": np.sin, "cos": np.cos}


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node

    def eval(self, x):
        return _NP_FN[self.name](self.arg.eval(x))

    def eval_dd(self, x):
        inner = self.arg.eval_dd(x)
        flat = inner.data.reshape(-1, 2)
        out = DD.zeros(inner.shape)
        oflat = out.data.reshape(-1, 2)
        fn = _MP_FN[self.name]
        with mpmath.workprec(130):
            for i in range(flat.shape[0]):
                v = fn(mpmath.mpf(flat[i, 0]) + mpmath.mpf(flat[i, 1]))
                hi = float(v)
                oflat[i, 0] = hi
                oflat[i, 1] = float(v - hi)
        return out

    def degree(self):
        return None

    def breakpoints(self):
        return self.arg.breakpoints()

    def text(self):
        return f"{self.name}({self.arg.text()})"


# --- parser ---------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}, got {val!r}")

    def parse_expr(self) -> Node:
        kind, val = self.peek()
        negate = False
        if kind == "op" and val in "+-":
            self.next()
            negate = val == "-"
        node = self.parse_term()
        if negate:
            node = Neg(node)
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                node = BinOp(val, node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                node = BinOp(val, node, self.parse_factor())
            else:
                return node

    def parse_factor(self) -> Node:
        node = self.parse_atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.next()
            kind, val = self.next()
            if kind != "num" or val.denominator != 1 or val < 0:
                raise ExprError("exponent must be a nonnegative integer")
            node = Pow(node, int(val))
        return node

    def parse_signed_literal(self) -> Fraction:
        kind, val = self.next()
        sign = 1
        if kind == "op" and val in "+-":
            sign = -1 if val == "-" else 1
            kind, val = self.next()
        if kind != "num":
            raise ExprError("chi arguments must be numeric literals")
        return sign * val

    def parse_atom(self) -> Node:
        kind, val = self.next()
        if kind == "num":
            return Num(val)
        if kind == "ident":
            if val == "x":
                return Var()
            if val == "chi":
                self.expect_op("(")
                a = self.parse_signed_literal()
                self.expect_op(",")
                b = self.parse_signed_literal()
                self.expect_op(")")
                if not a < b:
                    raise ExprError(f"chi interval empty: ({a}, {b})")
                return Chi(a, b)
            if val in _NP_FN:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ExprError(f"unknown identifier {val!r}")
        if kind == "op" and val == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ExprError(f"unexpected token {val!r}")


def parse_expression(text: str) -> Node:
    p = _Parser(_tokenize(text))
    node = p.parse_expr()
    if p.peek()[0] != "end":
        raise ExprError(f"trailing input after expression: {p.peek()[1]!r}")
    return node
