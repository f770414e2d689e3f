"""Symbolic partial differentiation and light algebraic simplification of :class:`Expr`."""

from __future__ import annotations

from functools import lru_cache

from .expr import NON_SMOOTH, Expr, const


class NonSmoothError(ValueError):
    """The expression has min/max/abs on a path that depends on the variable."""


def simplify(e: Expr) -> Expr:
    """Constant folding plus zero/one elimination, applied bottom-up."""
    return _simplify(e)


@lru_cache(maxsize=None)
def _simplify(e: Expr) -> Expr:
    if e.kind in ("var", "const"):
        return e
    kids = tuple(_simplify(ch) for ch in e.children)
    k = e.kind
    if all(ch.kind == "const" for ch in kids):
        folded = _fold(k, [ch.value for ch in kids])  # type: ignore[misc]
        if folded is not None:
            return const(folded)
    if k == "add":
        a, b = kids
        if a.is_const(0.0):
            return b
        if b.is_const(0.0):
            return a
    elif k == "sub":
        a, b = kids
        if b.is_const(0.0):
            return a
        if a.is_const(0.0):
            return _neg(b)
        if a == b:
            return const(0.0)
    elif k == "mul":
        a, b = kids
        if a.is_const(0.0) or b.is_const(0.0):
            return const(0.0)
        if a.is_const(1.0):
            return b
        if b.is_const(1.0):
            return a
        if b.kind == "const" and a.kind != "const":
            a, b = b, a
        # c1 * (c2 * x) -> (c1*c2) * x
        if a.kind == "const" and b.kind == "mul" and b.children[0].kind == "const":
            return _simplify(Expr("mul", (const(a.value * b.children[0].value), b.children[1])))  # type: ignore[operator]
        return Expr("mul", (a, b))
    elif k == "div":
        a, b = kids
        if a.is_const(0.0) and not b.is_const(0.0):
            return const(0.0)
        if b.is_const(1.0):
            return a
        if a == b:
            return const(1.0)
    elif k == "pow":
        a, b = kids
        if b.is_const(1.0):
            return a
        if b.is_const(0.0):
            return const(1.0)
    return Expr(k, kids)


def _neg(e: Expr) -> Expr:
    if e.kind == "const":
        return const(-e.value)  # type: ignore[operator]
    if e.kind == "mul" and e.children[0].is_const(-1.0):
        return e.children[1]
    return Expr("mul", (const(-1.0), e))


def _fold(kind: str, vals: list[float]) -> float | None:
    import math

    try:
        if kind == "add":
            return vals[0] + vals[1]
        if kind == "sub":
            return vals[0] - vals[1]
        if kind == "mul":
            return vals[0] * vals[1]
        if kind == "div":
            return None if vals[1] == 0 else vals[0] / vals[1]
        if kind == "pow":
            r = vals[0] ** vals[1]
            return r if isinstance(r, float) and math.isfinite(r) else None
        if kind == "sqrt":
            return math.sqrt(vals[0]) if vals[0] >= 0 else None
        if kind == "log":
            return math.log(vals[0]) if vals[0] > 0 else None
        if kind == "abs":
            return abs(vals[0])
        if kind == "min":
            return min(vals)
        if kind == "max":
            return max(vals)
    except (OverflowError, ValueError, ZeroDivisionError):
        return None
    return None


def differentiate(e: Expr, cell: str) -> Expr:
    """Partial derivative of ``e`` with respect to the variable ``cell``, simplified.

    Raises :class:`NonSmoothError` when a min/max/abs node depends on ``cell``;
    such measures take the numeric path instead.
    """
    return simplify(_d(simplify(e), cell))


@lru_cache(maxsize=None)
def _d(e: Expr, x: str) -> Expr:
    if x not in e.variables():
        return const(0.0)
    k = e.kind
    if k == "var":
        return const(1.0)
    if k in NON_SMOOTH:
        raise NonSmoothError(f"{k}(...) depends on {x}; use the numeric derivative")
    if k == "add":
        return _d(e.children[0], x) + _d(e.children[1], x)
    if k == "sub":
        return _d(e.children[0], x) - _d(e.children[1], x)
    if k == "mul":
        u, v = e.children
        return _d(u, x) * v + u * _d(v, x)
    if k == "div":
        u, v = e.children
        if x not in v.variables():
            return _d(u, x) / v
        # (u'v - uv') / v^2
        return (_d(u, x) * v - u * _d(v, x)) / (v * v)
    if k == "pow":
        u, n = e.children
        if x not in n.variables():
            return n * u ** (n - const(1.0)) * _d(u, x)
        # general u^v = exp(v log u)
        return e * (_d(n, x) * Expr("log", (u,)) + n * _d(u, x) / u)
    if k == "sqrt":
        (u,) = e.children
        return _d(u, x) / (const(2.0) * e)
    if k == "log":
        (u,) = e.children
        return _d(u, x) / u
    raise AssertionError(k)
