"""Arithmetic expression AST over the four cell counts, with a parser and printer.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | VAR | FUNC '(' args ')' | '(' expr ')'

Variables are ``f11``, ``f10``, ``f01`` and ``f00``.  Functions are ``sqrt``,
``log`` and ``abs`` (unary) and ``min``, ``max`` (binary).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

VARIABLES = ("f11", "f10", "f01", "f00")
UNARY = ("sqrt", "log", "abs")
BINARY_FUNCS = ("min", "max")
BINARY_OPS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
KINDS = ("var", "const") + tuple(BINARY_OPS) + UNARY + BINARY_FUNCS
NON_SMOOTH = frozenset({"min", "max", "abs"})


class ExprSyntaxError(ValueError):
    """Raised for malformed DSL text; ``offset`` is the 0-based character index."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


@dataclass(frozen=True)
class Expr:
    kind: str
    children: tuple["Expr", ...] = ()
    value: float | str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        arity = len(self.children)
        if self.kind == "var":
            if self.value not in VARIABLES or arity:
                raise ValueError(f"bad variable node {self.value!r}")
        elif self.kind == "const":
            if arity or not isinstance(self.value, (int, float)):
                raise ValueError("constant node needs a numeric value and no children")
        elif self.kind in UNARY and arity != 1:
            raise ValueError(f"{self.kind} takes one argument, got {arity}")
        elif self.kind not in UNARY and arity != 2:
            raise ValueError(f"{self.kind} takes two arguments, got {arity}")

    # construction sugar, used heavily by the differentiator
    def __add__(self, other: "Expr | float") -> "Expr":
        return Expr("add", (self, as_expr(other)))

    def __radd__(self, other: float) -> "Expr":
        return Expr("add", (as_expr(other), self))

    def __sub__(self, other: "Expr | float") -> "Expr":
        return Expr("sub", (self, as_expr(other)))

    def __rsub__(self, other: float) -> "Expr":
        return Expr("sub", (as_expr(other), self))

    def __mul__(self, other: "Expr | float") -> "Expr":
        return Expr("mul", (self, as_expr(other)))

    def __rmul__(self, other: float) -> "Expr":
        return Expr("mul", (as_expr(other), self))

    def __truediv__(self, other: "Expr | float") -> "Expr":
        return Expr("div", (self, as_expr(other)))

    def __rtruediv__(self, other: float) -> "Expr":
        return Expr("div", (as_expr(other), self))

    def __pow__(self, other: "Expr | float") -> "Expr":
        return Expr("pow", (self, as_expr(other)))

    def __neg__(self) -> "Expr":
        return Expr("mul", (const(-1.0), self))

    def __str__(self) -> str:
        return to_text(self)

    def variables(self) -> frozenset[str]:
        if self.kind == "var":
            return frozenset({self.value})  # type: ignore[arg-type]
        out: frozenset[str] = frozenset()
        for ch in self.children:
            out |= ch.variables()
        return out

    def uses(self, kinds: frozenset[str] | set[str]) -> bool:
        return self.kind in kinds or any(ch.uses(kinds) for ch in self.children)

    def size(self) -> int:
        return 1 + sum(ch.size() for ch in self.children)

    def is_const(self, value: float | None = None) -> bool:
        if self.kind != "const":
            return False
        return value is None or self.value == value


def var(name: str) -> Expr:
    return Expr("var", (), name)


def const(value: float) -> Expr:
    return Expr("const", (), float(value))


def as_expr(x: "Expr | float") -> Expr:
    return x if isinstance(x, Expr) else const(x)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            # report the first non-space character
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, sym: str) -> None:
        kind, val, pos = self.take()
        if val != sym or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {sym!r}, found {what}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos, self.text)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = Expr("add" if op == "+" else "sub", (left, right))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.unary()
            left = Expr("mul" if op == "*" else "div", (left, right))
        return left

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            operand = self.unary()
            if operand.kind == "const":
                return const(-operand.value)  # type: ignore[operator]
            return Expr("mul", (const(-1.0), operand))
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Expr("pow", (base, self.unary()))
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return const(float(val))
        if kind == "name":
            if val in VARIABLES:
                return var(val)
            if val in UNARY or val in BINARY_FUNCS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                want = 1 if val in UNARY else 2
                if len(args) != want:
                    raise ExprSyntaxError(f"{val} takes {want} argument(s), got {len(args)}", pos, self.text)
                return Expr(val, tuple(args))
            raise ExprSyntaxError(f"unknown identifier {val!r}", pos, self.text)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", pos, self.text)


def parse(text: str) -> Expr:
    """Parse DSL text into an :class:`Expr`."""
    return _Parser(text).parse()


# ---------------------------------------------------------------- printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "pow": 4}


def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(e: Expr) -> str:
    """Render ``e`` back to DSL text; ``parse(to_text(e))`` evaluates identically."""
    return _emit(e, 0)


def _emit(e: Expr, parent: int) -> str:
    k = e.kind
    if k == "var":
        return str(e.value)
    if k == "const":
        s = _fmt_const(e.value)  # type: ignore[arg-type]
        # negative literals bind like a unary minus
        return f"({s})" if s.startswith("-") and parent > 0 else s
    if k in UNARY or k in BINARY_FUNCS:
        return f"{k}({', '.join(_emit(ch, 0) for ch in e.children)})"
    prec = _PREC[k]
    left, right = e.children
    if k == "mul" and left.is_const(-1.0):
        s = f"-{_emit(right, 3)}"
        return f"({s})" if parent >= 2 else s
    if k == "pow":
        s = f"{_emit(left, prec + 1)}^{_emit(right, prec)}"
    else:
        # left-assoc: the right operand of - and / needs a strictly higher binding
        right_prec = prec + 1 if k in ("sub", "div", "mul") else prec
        s = f"{_emit(left, prec)}{BINARY_OPS[k]}{_emit(right, right_prec)}"
    return f"({s})" if prec < parent else s


# ---------------------------------------------------------------- evaluation


def _safe_log(x):
    return np.log(x)


def _safe_sqrt(x):
    return np.sqrt(x)


_NUMPY_FUNCS: dict[str, Callable] = {
    "sqrt": _safe_sqrt,
    "log": _safe_log,
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
}


def evaluate(e: Expr, env: Mapping[str, "np.ndarray | float"]) -> np.ndarray:
    """Evaluate ``e`` with IEEE extended-real semantics.

    ``env`` maps variable names to floats or broadcastable arrays.  Division by
    zero yields a signed infinity, indeterminate forms (0/0, 0*inf, log of a
    negative) yield NaN, which callers treat as *undefined*.
    """
    with np.errstate(all="ignore"):
        return np.asarray(_eval(e, env), dtype=float)


def _eval(e: Expr, env):
    k = e.kind
    if k == "var":
        return np.asarray(env[e.value], dtype=float)  # type: ignore[index]
    if k == "const":
        return np.float64(e.value)
    args = [_eval(ch, env) for ch in e.children]
    if k == "add":
        return args[0] + args[1]
    if k == "sub":
        return args[0] - args[1]
    if k == "mul":
        return args[0] * args[1]
    if k == "div":
        return np.true_divide(args[0], args[1])
    if k == "pow":
        return np.power(args[0], args[1])
    return _NUMPY_FUNCS[k](*args)


def evaluate_scalar(e: Expr, f11: float, f10: float, f01: float, f00: float) -> float:
    return float(evaluate(e, {"f11": f11, "f10": f10, "f01": f01, "f00": f00}))


def is_undefined(x: float) -> bool:
    return math.isnan(x)
