"""Expression trees for closed-form vector field components.

Grammar (infix)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?          # exponent must fold to an integer
    atom   := NUMBER | VAR | '(' expr ')'

Numbers are exact rationals (``3``, ``1/2`` via division, ``0.25``, ``1e-3``).
Variables are ``x1 .. xn``; ``x``, ``y``, ``z`` are accepted as aliases for
``x1``, ``x2``, ``x3``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EvalError, ParseError


class Expr:
    def diff(self, i: int) -> "Expr":
        raise NotImplementedError

    def source(self) -> str:
        raise NotImplementedError

    def variables(self) -> set[int]:
        return set()


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def diff(self, i):
        return ZERO

    def source(self):
        v = self.value
        if v.denominator == 1:
            return f"{v.numerator}.0"
        return f"({v.numerator}.0/{v.denominator}.0)"

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(Expr):
    index: int  # zero-based

    def diff(self, i):
        return ONE if i == self.index else ZERO

    def source(self):
        return f"x[{self.index}]"

    def variables(self):
        return {self.index}

    def __str__(self):
        return f"x{self.index + 1}"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def diff(self, i):
        return neg(self.arg.diff(i))

    def source(self):
        return f"(-{self.arg.source()})"

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"-({self.arg})"


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def diff(self, i):
        return add(self.left.diff(i), self.right.diff(i))

    def source(self):
        return f"({self.left.source()} + {self.right.source()})"

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def diff(self, i):
        return sub(self.left.diff(i), self.right.diff(i))

    def source(self):
        return f"({self.left.source()} - {self.right.source()})"

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} - {self.right})"


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def diff(self, i):
        return add(mul(self.left.diff(i), self.right), mul(self.left, self.right.diff(i)))

    def source(self):
        return f"({self.left.source()} * {self.right.source()})"

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} * {self.right})"


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr

    def diff(self, i):
        num = sub(mul(self.left.diff(i), self.right), mul(self.left, self.right.diff(i)))
        return div(num, power(self.right, 2))

    def source(self):
        return f"({self.left.source()} / {self.right.source()})"

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} / {self.right})"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def diff(self, i):
        return mul(mul(Const(Fraction(self.exponent)), power(self.base, self.exponent - 1)), self.base.diff(i))

    def source(self):
        if self.exponent < 0:
            return f"(1.0 / {self.base.source()} ** {-self.exponent})"
        return f"({self.base.source()} ** {self.exponent})"

    def variables(self):
        return self.base.variables()

    def __str__(self):
        return f"({self.base})^{self.exponent}"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


# smart constructors: fold constants, drop identities
def _is(e: Expr, v: int) -> bool:
    return isinstance(e, Const) and e.value == v


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 0:
            raise EvalError("division by the constant zero")
        if isinstance(a, Const):
            return Const(a.value / b.value)
        if b.value == 1:
            return a
    if _is(a, 0):
        return ZERO
    return Div(a, b)


def power(base: Expr, exponent: int) -> Expr:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and exponent < 0:
            raise EvalError("zero raised to a negative power")
        return Const(base.value**exponent)
    return Pow(base, exponent)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:((?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")
_ALIASES = {"x": 0, "y": 1, "z": 2}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"cannot tokenize {text[pos:]!r}")
        num, name, op = m.groups()
        pos = m.end()
        if num is not None:
            tokens.append(("num", num))
        elif name is not None:
            tokens.append(("name", name))
        elif op is not None and not op.isspace():
            if op not in "+-*/^()":
                raise ParseError(f"unexpected character {op!r} in {text!r}")
            tokens.append(("op", op))
    return tokens


class _Parser:
    def __init__(self, text: str, n_vars: int | None) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.n_vars = n_vars

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, value: str | None = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value or 'a token'} in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty expression")
        e = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while (tok := self.peek()) and tok[1] in "+-" and tok[0] == "op":
            self.take()
            rhs = self.term()
            e = add(e, rhs) if tok[1] == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while (tok := self.peek()) and tok[1] in "*/" and tok[0] == "op":
            self.take()
            rhs = self.unary()
            e = mul(e, rhs) if tok[1] == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] in "+-":
            self.take()
            arg = self.unary()
            return neg(arg) if tok[1] == "-" else arg
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok and tok[1] == "^":
            self.take()
            exp = self.unary()
            if not isinstance(exp, Const) or exp.value.denominator != 1:
                raise ParseError(f"exponent must be an integer constant in {self.text!r}")
            return power(base, int(exp.value))
        return base

    def atom(self) -> Expr:
        kind, value = self.take()
        if kind == "num":
            return Const(Fraction(value))
        if kind == "name":
            return Var(self._var_index(value))
        if value == "(":
            e = self.expr()
            self.take(")")
            return e
        raise ParseError(f"unexpected {value!r} in {self.text!r}")

    def _var_index(self, name: str) -> int:
        if name in _ALIASES:
            idx = _ALIASES[name]
        else:
            m = re.fullmatch(r"x(\d+)", name)
            if m is None or int(m.group(1)) < 1:
                raise ParseError(f"unknown variable {name!r}")
            idx = int(m.group(1)) - 1
        if self.n_vars is not None and idx >= self.n_vars:
            raise ParseError(f"variable {name!r} exceeds dimension {self.n_vars}")
        return idx


def parse(text: str, n_vars: int | None = None) -> Expr:
    return _Parser(text, n_vars).parse()


def compile_exprs(exprs: list[Expr]):
    """Compile expressions into one numpy function ``f(x) -> list``.

    ``x`` is indexable by variable; entries may be scalars or arrays, so the
    same callable serves pointwise Newton steps and vectorized sampling.
    """
    body = ", ".join(e.source() for e in exprs)
    code = f"lambda x: [{body}]"
    return eval(code, {"__builtins__": {}}, {})  # noqa: S307 - source is generated from the tree


def evaluate_scalar(fn, point) -> np.ndarray:
    x = [float(v) for v in point]
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            return np.array([float(v) for v in fn(x)])
    except (ZeroDivisionError, FloatingPointError, OverflowError) as exc:
        raise EvalError(f"evaluation failed at {tuple(x)}: {exc}") from None
