"""Polynomial right-hand-side expressions: parser, exact evaluation, and
interval-certified derivation of the solver's problem data.

The grammar is deliberately restricted to polynomials over t, x1..xn with
rational literals ``a/b``: polynomial evaluation on rationals is exact (so
the approximating map needs no convergence stages, alpha = 0) and interval
arithmetic over the problem box yields certified bounds C on |f|_1 and L on
the Jacobian, from which a valid modulus of continuity follows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .euler import ConfigurationError
from .rational import rat_le_abs_bound
from .ucf import UcfVector

__all__ = [
    "ExprSyntaxError",
    "Num",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Pow",
    "RhsExpr",
    "parse_rhs",
    "pretty",
    "eval_node",
    "diff_node",
    "IntervalQ",
    "interval_eval",
    "derive_ucf",
]

MAX_NODES = 10_000
MAX_DEPTH = 64


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int  # 0 is t, 1..n are x1..xn


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Sub:
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Mul:
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Var, Neg, Add, Sub, Mul, Pow]


@dataclass(frozen=True)
class RhsExpr:
    """One expression tree per output component, over t and x1..x{n_state}."""

    components: tuple[Node, ...]
    n_state: int


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|(t\b|x\d+)|(\*\*|[+\-*/^();])|(\S))")


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM, VAR, OP, END
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        nl = text.rfind("\n", 0, pos)
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            break
        start = m.start(m.lastindex)
        line = text.count("\n", 0, start) + 1
        line_start = text.rfind("\n", 0, start) + 1
        col = start - line_start + 1
        if m.group(1):
            tokens.append(_Token("NUM", m.group(1), line, col))
        elif m.group(2):
            tokens.append(_Token("VAR", m.group(2), line, col))
        elif m.group(3):
            tokens.append(_Token("OP", m.group(3), line, col))
        else:
            raise ExprSyntaxError(f"unexpected character {m.group(4)!r}", line, col)
        pos = m.end()
    tail = text[pos:]
    line = text.count("\n") + 1
    col = len(text) - (text.rfind("\n") + 1) + 1
    if tail.strip():
        raise ExprSyntaxError(f"unexpected character {tail.strip()[0]!r}", line, col)
    tokens.append(_Token("END", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], n_state: int):
        self.tokens = tokens
        self.pos = 0
        self.n_state = n_state

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise ExprSyntaxError(message, tok.line, tok.column)

    def parse_components(self) -> list[Node]:
        comps = [self.parse_expr()]
        while self.peek().kind == "OP" and self.peek().text == ";":
            self.next()
            comps.append(self.parse_expr())
        if self.peek().kind != "END":
            self.error(f"unexpected {self.peek().text!r}")
        return comps

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.next().text
            rhs = self.parse_term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def parse_term(self) -> Node:
        node = self.parse_unary()
        while self.peek().kind == "OP" and self.peek().text == "*":
            self.next()
            node = Mul(node, self.parse_unary())
        return node

    def parse_unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.next()
            return Neg(self.parse_unary())
        if tok.kind == "OP" and tok.text == "+":
            self.next()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "OP" and tok.text in ("^", "**"):
            self.next()
            exp_tok = self.peek()
            if exp_tok.kind != "NUM":
                self.error("exponent must be a nonnegative integer literal", exp_tok)
            self.next()
            k = int(exp_tok.text)
            follow = self.peek()
            if follow.kind == "OP" and follow.text == "/":
                self.error("exponent must be an integer, not a fraction", follow)
            return Pow(base, k)
        return base

    def parse_atom(self) -> Node:
        tok = self.next()
        if tok.kind == "NUM":
            num = int(tok.text)
            nxt = self.peek()
            if nxt.kind == "OP" and nxt.text == "/":
                self.next()
                den_tok = self.next()
                if den_tok.kind != "NUM":
                    self.error("expected integer denominator after '/'", den_tok)
                den = int(den_tok.text)
                if den == 0:
                    self.error("zero denominator in rational literal", den_tok)
                return Num(Fraction(num, den))
            return Num(Fraction(num))
        if tok.kind == "VAR":
            if tok.text == "t":
                return Var(0)
            idx = int(tok.text[1:])
            if not 1 <= idx <= self.n_state:
                self.error(f"unknown variable {tok.text!r} (state has {self.n_state} components)", tok)
            return Var(idx)
        if tok.kind == "OP" and tok.text == "(":
            node = self.parse_expr()
            close = self.next()
            if close.kind != "OP" or close.text != ")":
                self.error("expected ')'", close)
            return node
        if tok.kind == "OP" and tok.text == "/":
            self.error("'/' is only allowed inside rational literals a/b", tok)
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def _measure(node: Node) -> tuple[int, int]:
    if isinstance(node, (Num, Var)):
        return 1, 1
    if isinstance(node, (Neg, Pow)):
        inner = node.arg if isinstance(node, Neg) else node.base
        n, d = _measure(inner)
        return n + 1, d + 1
    n1, d1 = _measure(node.lhs)
    n2, d2 = _measure(node.rhs)
    return n1 + n2 + 1, max(d1, d2) + 1


def parse_rhs(text: str, n: int) -> RhsExpr:
    """Parse a semicolon-separated list of n polynomial components."""
    if not text.strip():
        raise ExprSyntaxError("empty expression", 1, 1)
    if n < 1:
        raise ValueError("state dimension must be >= 1")
    parser = _Parser(_tokenize(text), n)
    comps = parser.parse_components()
    if len(comps) != n:
        raise ExprSyntaxError(
            f"expected {n} component(s) separated by ';', got {len(comps)}", 1, 1
        )
    nodes = 0
    for comp in comps:
        cn, cd = _measure(comp)
        nodes += cn
        if cd > MAX_DEPTH:
            raise ExprSyntaxError(f"expression deeper than {MAX_DEPTH}", 1, 1)
    if nodes > MAX_NODES:
        raise ExprSyntaxError(f"expression larger than {MAX_NODES} nodes", 1, 1)
    return RhsExpr(components=tuple(comps), n_state=n)


# ---------------------------------------------------------------------------
# printing / evaluation / differentiation

_PREC = {Add: 1, Sub: 1, Mul: 2, Neg: 3, Pow: 4, Num: 5, Var: 5}


def _pretty(node: Node, parent_prec: int) -> str:
    prec = _PREC[type(node)]
    if isinstance(node, Num):
        v = node.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        if v.numerator < 0:
            prec = _PREC[Neg]
    elif isinstance(node, Var):
        s = "t" if node.index == 0 else f"x{node.index}"
    elif isinstance(node, Neg):
        s = "-" + _pretty(node.arg, prec + 1)
    elif isinstance(node, Add):
        s = f"{_pretty(node.lhs, prec)} + {_pretty(node.rhs, prec + 1)}"
    elif isinstance(node, Sub):
        s = f"{_pretty(node.lhs, prec)} - {_pretty(node.rhs, prec + 1)}"
    elif isinstance(node, Mul):
        s = f"{_pretty(node.lhs, prec)}*{_pretty(node.rhs, prec + 1)}"
    else:
        s = f"{_pretty(node.base, prec + 1)}^{node.exponent}"
    if prec < parent_prec:
        return f"({s})"
    return s


def pretty(expr: RhsExpr | Node) -> str:
    if isinstance(expr, RhsExpr):
        return "; ".join(_pretty(c, 0) for c in expr.components)
    return _pretty(expr, 0)


def eval_node(node: Node, t: Fraction, x: tuple[Fraction, ...]) -> Fraction:
    """Exact rational evaluation."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t if node.index == 0 else x[node.index - 1]
    if isinstance(node, Neg):
        return -eval_node(node.arg, t, x)
    if isinstance(node, Add):
        return eval_node(node.lhs, t, x) + eval_node(node.rhs, t, x)
    if isinstance(node, Sub):
        return eval_node(node.lhs, t, x) - eval_node(node.rhs, t, x)
    if isinstance(node, Mul):
        return eval_node(node.lhs, t, x) * eval_node(node.rhs, t, x)
    return eval_node(node.base, t, x) ** node.exponent


def diff_node(node: Node, index: int) -> Node:
    """Symbolic partial derivative with respect to variable ``index``."""
    if isinstance(node, Num):
        return Num(Fraction(0))
    if isinstance(node, Var):
        return Num(Fraction(1 if node.index == index else 0))
    if isinstance(node, Neg):
        return Neg(diff_node(node.arg, index))
    if isinstance(node, Add):
        return Add(diff_node(node.lhs, index), diff_node(node.rhs, index))
    if isinstance(node, Sub):
        return Sub(diff_node(node.lhs, index), diff_node(node.rhs, index))
    if isinstance(node, Mul):
        return Add(
            Mul(diff_node(node.lhs, index), node.rhs),
            Mul(node.lhs, diff_node(node.rhs, index)),
        )
    if node.exponent == 0:
        return Num(Fraction(0))
    return Mul(
        Mul(Num(Fraction(node.exponent)), Pow(node.base, node.exponent - 1)),
        diff_node(node.base, index),
    )


# ---------------------------------------------------------------------------
# interval arithmetic over rational endpoints


@dataclass(frozen=True)
class IntervalQ:
    """Closed interval with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("interval endpoints out of order")

    @staticmethod
    def point(v: Fraction) -> "IntervalQ":
        v = Fraction(v)
        return IntervalQ(v, v)

    def __add__(self, other: "IntervalQ") -> "IntervalQ":
        return IntervalQ(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "IntervalQ") -> "IntervalQ":
        return IntervalQ(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "IntervalQ":
        return IntervalQ(-self.hi, -self.lo)

    def __mul__(self, other: "IntervalQ") -> "IntervalQ":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return IntervalQ(min(products), max(products))

    def power(self, k: int) -> "IntervalQ":
        if k == 0:
            return IntervalQ.point(Fraction(1))
        if k % 2 == 1 or self.lo >= 0:
            return IntervalQ(self.lo ** k, self.hi ** k)
        if self.hi <= 0:
            return IntervalQ(self.hi ** k, self.lo ** k)
        return IntervalQ(Fraction(0), max(self.lo ** k, self.hi ** k))

    def magnitude(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))


def interval_eval(node: Node, box: tuple[IntervalQ, ...]) -> IntervalQ:
    """Sound interval enclosure of the expression over the box (t, x1..xn)."""
    if isinstance(node, Num):
        return IntervalQ.point(node.value)
    if isinstance(node, Var):
        return box[node.index]
    if isinstance(node, Neg):
        return -interval_eval(node.arg, box)
    if isinstance(node, Add):
        return interval_eval(node.lhs, box) + interval_eval(node.rhs, box)
    if isinstance(node, Sub):
        return interval_eval(node.lhs, box) - interval_eval(node.rhs, box)
    if isinstance(node, Mul):
        return interval_eval(node.lhs, box) * interval_eval(node.rhs, box)
    return interval_eval(node.base, box).power(node.exponent)


# ---------------------------------------------------------------------------
# derivation of UCF data

MIN_LIPSCHITZ = Fraction(1, 1024)  # keeps L out of the Gronwall denominator's way


def derive_ucf(
    expr: RhsExpr,
    box: tuple[Fraction, tuple[Fraction, ...], Fraction],
) -> tuple[UcfVector, Fraction, Fraction]:
    """Certified (UcfVector, C, L) for a polynomial rhs on a problem box.

    box is (t_a, x0, x_b).  Interval arithmetic over the bounding box
    [-t_a, t_a] x prod [x0_i - x_b, x0_i + x_b] gives C >= sup |f|_1 and
    column-sum bounds for the Jacobian: L bounds the state Jacobian's
    operator 1-norm (the Gronwall constant), while the modulus of
    continuity is driven by the joint bound including the time column,
    since omega must control perturbations of (t, x) together:
    omega(p) = p + rat_le_abs_bound(max(L_joint, 1)) + 1 then satisfies the
    continuity clause on the box.
    """
    t_a, x0, x_b = box
    t_a = Fraction(t_a)
    x0 = tuple(Fraction(c) for c in x0)
    x_b = Fraction(x_b)
    if t_a <= 0 or x_b <= 0:
        raise ConfigurationError("derivation box must have positive extents")
    if len(x0) != expr.n_state:
        raise ConfigurationError(
            f"x0 has dimension {len(x0)}, expression expects {expr.n_state}"
        )

    ibox = (IntervalQ(-t_a, t_a),) + tuple(IntervalQ(c - x_b, c + x_b) for c in x0)

    C = Fraction(0)
    for comp in expr.components:
        C += interval_eval(comp, ibox).magnitude()
    C = max(C, Fraction(1))

    def column_sum(j: int) -> Fraction:
        total = Fraction(0)
        for comp in expr.components:
            total += interval_eval(diff_node(comp, j), ibox).magnitude()
        return total

    L_state = max((column_sum(j) for j in range(1, expr.n_state + 1)), default=Fraction(0))
    L = max(L_state, MIN_LIPSCHITZ)
    L_joint = max(L_state, column_sum(0))

    shift = rat_le_abs_bound(max(L_joint, Fraction(1))) + 1
    components = expr.components

    def approx(pt: tuple[Fraction, ...], n: int) -> tuple[Fraction, ...]:
        t, state = pt[0], tuple(pt[1:])
        return tuple(eval_node(comp, t, state) for comp in components)

    rhs = UcfVector(
        center=(Fraction(0), *x0),
        radius=t_a + x_b,
        dim_in=expr.n_state + 1,
        dim_out=expr.n_state,
        approx=approx,
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p, _s=shift: p + _s,
    )
    return rhs, C, L
