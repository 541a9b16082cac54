"""Small arithmetic expression language for coefficient and kernel formulas.

Grammar (lowest to highest binding)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' sum ')'

Only the variables ``x``, ``y``, ``t``, the constant ``pi`` and the functions
``sin cos exp abs sqrt pow`` are recognised.  Evaluation accepts floats or
numpy arrays as bindings.

    >>> evaluate(parse("2*x^4"), {"x": 0.5})
    0.125
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Const",
    "BinOp",
    "Neg",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifier",
    "ArityError",
    "UnboundVariable",
    "ExprDomainError",
    "parse",
    "unparse",
    "evaluate",
    "variables",
    "VARIABLES",
    "FUNCTIONS",
]

VARIABLES = frozenset({"x", "y", "t"})
CONSTANTS = {"pi": math.pi}
FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "abs": 1, "sqrt": 1, "pow": 2}


class ExprError(ValueError):
    """Base class for all expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}" + (f" in {text!r}" if text else ""))


class UnknownIdentifier(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class UnboundVariable(ExprError):
    pass


class ExprDomainError(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, Const, BinOp, Neg, Call]


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, pos = self.tok
        if val != value or kind != "op":
            found = repr(val) if kind != "end" else "end of input"
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos, self.text)
        self.advance()

    def parse(self) -> Expr:
        node = self.sum()
        kind, val, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos, self.text)
        return node

    def sum(self) -> Expr:
        node = self.product()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.product())
        return node

    def product(self) -> Expr:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            # the exponent may carry its own sign: 2^-3
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.tok[0] == "op" and self.tok[1] == "(":
                return self.call(val, pos)
            if val in VARIABLES:
                return Var(val)
            if val in CONSTANTS:
                return Const(val)
            if val in FUNCTIONS:
                raise ArityError(f"function {val!r} needs an argument list", pos, self.text)
            raise UnknownIdentifier(f"unknown identifier {val!r}", pos, self.text)
        if kind == "op" and val == "(":
            node = self.sum()
            self.expect(")")
            return node
        found = repr(val) if kind != "end" else "end of input"
        raise ExprSyntaxError(f"unexpected {found}", pos, self.text)

    def call(self, name: str, pos: int) -> Expr:
        if name not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {name!r}", pos, self.text)
        self.expect("(")
        args = []
        if not (self.tok[0] == "op" and self.tok[1] == ")"):
            args.append(self.sum())
            while self.tok[0] == "op" and self.tok[1] == ",":
                self.advance()
                args.append(self.sum())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", pos, self.text
            )
        return Call(name, tuple(args))


def parse(text: str) -> Expr:
    """Parse ``text`` into an immutable expression tree."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text)
    return _Parser(text).parse()


def unparse(e: Expr) -> str:
    """Fully parenthesized text form; ``parse(unparse(e)) == e``."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Neg):
        return f"(-{unparse(e.operand)})"
    if isinstance(e, BinOp):
        return f"({unparse(e.left)}{e.op}{unparse(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({','.join(unparse(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def variables(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        return frozenset().union(*(variables(a) for a in e.args))
    return frozenset()


def _power(base, expo):
    base_arr = np.asarray(base, dtype=float)
    expo_arr = np.asarray(expo, dtype=float)
    non_integer = expo_arr != np.round(expo_arr)
    if np.any((base_arr < 0) & non_integer):
        raise ExprDomainError("negative base with non-integer exponent")
    if np.any((base_arr == 0) & (expo_arr < 0)):
        raise ExprDomainError("zero raised to a negative power")
    return np.power(base_arr, expo_arr)


def _eval(e: Expr, env: Mapping[str, object]):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Neg):
        return -np.asarray(_eval(e.operand, env), dtype=float)
    if isinstance(e, BinOp):
        a = np.asarray(_eval(e.left, env), dtype=float)
        b = np.asarray(_eval(e.right, env), dtype=float)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if np.any(b == 0):
                raise ExprDomainError("division by zero")
            return a / b
        return _power(a, b)
    if isinstance(e, Call):
        args = [np.asarray(_eval(a, env), dtype=float) for a in e.args]
        if e.name == "pow":
            return _power(*args)
        (a,) = args
        if e.name == "sqrt":
            if np.any(a < 0):
                raise ExprDomainError("sqrt of a negative number")
            return np.sqrt(a)
        return {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}[e.name](a)
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e: Expr, bindings: Mapping[str, object]):
    """Evaluate ``e`` under ``bindings``.

    Scalar bindings give a Python float; array bindings broadcast and give an
    ndarray.  Domain violations and overflow raise :class:`ExprDomainError`
    instead of producing NaN or inf.
    """
    with np.errstate(invalid="raise", divide="raise", over="raise"):
        try:
            out = _eval(e, bindings)
        except FloatingPointError as exc:
            raise ExprDomainError(f"floating-point fault: {exc}") from None
    arr = np.asarray(out, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return arr
