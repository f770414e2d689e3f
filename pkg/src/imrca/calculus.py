"""Derivatives of measures and limit probing along finite evidence ladders.

Smooth measures are differentiated symbolically; native and min/max/abs
measures use finite differences.  Limits are decided from the trend of the
derivative along a fixed ladder of points, never by symbolic limit algebra,
and every decision keeps the samples it was made from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .catalog import Measure
from .expr import Expr, evaluate as eval_expr
from .symbolic import differentiate
from .tables import CELLS

CONVERGES_TO_ZERO = "converges-to-zero"
CONVERGES_NONZERO = "converges-nonzero"
DIVERGES = "diverges"
UNDEFINED = "undefined"

INFINITY_LADDER = (1e3, 1e4, 1e6, 1e8, 1e10)
ZERO_LADDER = (1e-2, 1e-4, 1e-6)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """Decision constants for the ladder rules; all overridable."""

    # stabilisation: successive relative change below this means a finite nonzero limit
    stable: float = 1e-3
    # allowed relative bump when checking monotone decrease/increase
    slack: float = 0.01
    # absolute floor: |d| < floor * (1 + |m|) at the end of the ladder counts as zero
    floor: float = 1e-12
    # |d| must fall at least like x**-decay between the last two rungs to count as decaying
    decay: float = 0.5
    # finite-difference results within this many rounding units of the stencil are zero
    noise_ulps: float = 64.0
    # number of final ladder rungs over which monotonicity is required
    tail: int = 3


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class DerivativeProbe:
    cell: str
    context: Mapping[str, float]
    point: float

    def __post_init__(self) -> None:
        if self.cell not in CELLS:
            raise ValueError(f"unknown cell {self.cell!r}")
        others = [c for c in CELLS if c != self.cell]
        if sorted(self.context) != sorted(others):
            raise ValueError(f"context must give exactly {others}, got {sorted(self.context)}")
        if self.point < 0 or any(v < 0 for v in self.context.values()):
            raise ValueError("probe values must be >= 0")

    def table_values(self) -> dict[str, float]:
        return {**self.context, self.cell: self.point}


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    verdict: str
    evidence: tuple[tuple[float, float], ...] = field(default=())
    side: str = "symbolic"

    @property
    def sign(self) -> int:
        if self.verdict in (UNDEFINED,) or math.isnan(self.value):
            return 0
        if self.verdict == CONVERGES_TO_ZERO:
            return 0
        return 1 if self.value > 0 else -1


@lru_cache(maxsize=None)
def symbolic_derivative(e: Expr, cell: str) -> Expr:
    return differentiate(e, cell)


def _cells_env(cell: str, context, point) -> list[np.ndarray]:
    """Arrays in (f11, f10, f01, f00) order with ``cell`` set to ``point``."""
    out = []
    for c in CELLS:
        out.append(np.asarray(point if c == cell else context[c], dtype=float))
    return np.broadcast_arrays(*out)


def derivative_values(m: Measure, cell: str, context, point) -> tuple[np.ndarray, np.ndarray]:
    """Derivative of ``m`` in ``cell`` at ``point`` (vectorised over context and point).

    Returns ``(d, noise)``; ``noise`` is the rounding floor of the finite
    difference (zero on the symbolic path).
    """
    args = _cells_env(cell, context, point)
    if not m.smooth:
        return _finite_difference(m, cell, args)
    d = np.array(np.broadcast_to(eval_expr(symbolic_derivative(m.expr, cell), dict(zip(CELLS, args))), args[0].shape))
    noise = np.zeros(args[0].shape)
    # the symbolic form can be 0/0 where the measure itself is smooth
    # (d sqrt(f11*f00)/df11 at f00 = 0); the difference quotient decides there
    gap = np.isnan(d) & ~np.isnan(m.values(*args))
    if gap.any():
        fd, fn = _finite_difference(m, cell, [a[gap] for a in args])
        d[gap] = fd
        noise[gap] = fn
    return d, noise


def _finite_difference(m: Measure, cell: str, args: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    k = CELLS.index(cell)
    x = args[k]
    h = np.maximum(1e-6 * x, 1e-9)
    central = x - h >= 0

    def at(v):
        shifted = list(args)
        shifted[k] = v
        return m.values(*shifted)

    hi = at(x + h)
    lo = np.where(central, at(np.where(central, x - h, x)), at(x))
    with np.errstate(all="ignore"):
        d = (hi - lo) / np.where(central, 2 * h, h)
        # intermediate terms are O(1) for probability-based measures even when the value is tiny
        scale = np.maximum(np.maximum(np.abs(hi), np.abs(lo)), 1.0)
        noise = DEFAULT_TOLERANCES.noise_ulps * _EPS * scale / h
    d = np.where(np.abs(d) <= noise, 0.0, d)
    return d, noise


def finite_difference_values(m: Measure, cell: str, context, point) -> tuple[np.ndarray, np.ndarray]:
    """Difference-quotient derivative, vectorised like :func:`derivative_values`."""
    return _finite_difference(m, cell, _cells_env(cell, context, point))


def numeric_derivative(m: Measure, probe: DerivativeProbe) -> float:
    """Central difference with h = max(1e-6 x, 1e-9); forward difference when x - h < 0."""
    args = _cells_env(probe.cell, probe.context, probe.point)
    d, _ = _finite_difference(m, probe.cell, args)
    return float(d)


def derivative_at(m: Measure, probe: DerivativeProbe) -> float:
    d, _ = derivative_values(m, probe.cell, probe.context, probe.point)
    return float(d)


# ------------------------------------------------------------------ ladder rules


def infinity_verdicts(d: np.ndarray, v: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES,
                      ladder: Sequence[float] = INFINITY_LADDER) -> tuple[np.ndarray, np.ndarray]:
    """Classify rows of derivative samples ``d`` (shape K x L) taken along ``ladder``.

    ``v`` holds the measure values at the same points.  Returns verdict codes
    (0 zero, 1 nonzero, 2 diverges, 3 undefined) and limit values.
    """
    d = np.atleast_2d(d)
    v = np.atleast_2d(v)
    absd = np.abs(d)
    last, prev = absd[:, -1], absd[:, -2]
    bad = ~np.isfinite(d).all(axis=1) | ~np.isfinite(v).all(axis=1)

    zero_tail = (last == 0) & (prev == 0)
    with np.errstate(all="ignore"):
        rel_change = np.abs(d[:, -1] - d[:, -2]) / absd[:, -1]
        stable = (last > 0) & (rel_change <= tol.stable) & (np.sign(d[:, -1]) == np.sign(d[:, -2]))
        # monotone over the tail of the ladder, allowing small bumps; the early
        # rungs can sit below the context values where the trend has not set in
        tail = absd[:, -tol.tail:]
        dec = (tail[:, 1:] <= tail[:, :-1] * (1 + tol.slack)).all(axis=1)
        inc = (tail[:, 1:] >= tail[:, :-1] * (1 - tol.slack)).all(axis=1)
        step = math.log(ladder[-1] / ladder[-2])
        rate = np.log(last / prev) / step
        tiny = last < tol.floor * (1 + np.abs(v[:, -1]))
        # below the absolute floor is zero whatever the trend: rounding residue
        # of a cancelled expression can look like growth
        decaying = tiny | (dec & ((last == 0) | (rate <= -tol.decay)))
        growing = inc & (last > prev * (1 + tol.slack)) & ~tiny

    code = np.full(d.shape[0], 3)
    value = np.full(d.shape[0], np.nan)
    code[growing] = 2
    value[growing] = np.sign(d[growing, -1]) * np.inf
    code[decaying] = 0
    value[decaying] = 0.0
    code[stable] = 1
    value[stable] = d[stable, -1]
    code[zero_tail] = 0
    value[zero_tail] = 0.0
    code[bad] = 3
    value[bad] = np.nan
    return code, value


def zero_verdicts(d: np.ndarray, d0: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES,
                  ladder: Sequence[float] = ZERO_LADDER) -> tuple[np.ndarray, np.ndarray]:
    """Classify derivative samples approaching 0 from above.

    ``d`` has shape K x L along the decreasing ``ladder``; ``d0`` is the
    derivative at exactly 0 (NaN where not defined there).  Rules, in order:

    * |d| strictly growing with one sign and still moving at the last rung
      (relative change above ``slack``): diverges to +-inf.  This overrides
      ``d0``, which for a finite difference can be finite next to a log
      singularity.
    * finite ``d0``: that value is the limit.
    * infinite ``d0``: diverges with its sign.
    * stabilised ladder (relative change below ``stable``): that value.
    * |d| falling towards 0 at rate ``decay`` or faster: zero.
    * anything else: undefined.
    """
    d = np.atleast_2d(d)
    d0 = np.asarray(d0, dtype=float).reshape(-1)
    absd = np.abs(d)
    last, prev = absd[:, -1], absd[:, -2]
    finite_rows = np.isfinite(d).all(axis=1)
    with np.errstate(all="ignore"):
        one_sign = (np.sign(d) == np.sign(d[:, -1:])).all(axis=1) & (last > 0)
        rel_change = np.abs(d[:, -1] - d[:, -2]) / last
        growing = finite_rows & one_sign & (absd[:, 1:] > absd[:, :-1]).all(axis=1) & (rel_change > tol.slack)
        stable = finite_rows & one_sign & (rel_change <= tol.stable)
        step = math.log(ladder[-2] / ladder[-1])
        shrinking = finite_rows & ((last == 0) | ((np.log(last / prev) / step <= -tol.decay) & (last < prev)))

    code = np.full(d.shape[0], 3)
    value = np.full(d.shape[0], np.nan)
    code[shrinking] = 0
    value[shrinking] = 0.0
    code[stable] = 1
    value[stable] = d[stable, -1]
    m = np.isinf(d0)
    code[m] = 2
    value[m] = d0[m]
    m = np.isfinite(d0)
    code[m] = np.where(d0[m] == 0, 0, 1)
    value[m] = d0[m]
    code[growing] = 2
    value[growing] = np.sign(d[growing, -1]) * np.inf
    return code, value


_VERDICTS = (CONVERGES_TO_ZERO, CONVERGES_NONZERO, DIVERGES, UNDEFINED)


def _context_arrays(cell: str, context: Mapping[str, float]) -> dict[str, np.ndarray]:
    return {c: np.asarray([float(context[c])]) for c in CELLS if c != cell}


def ladder_scale(context: Mapping[str, np.ndarray]) -> np.ndarray:
    """Per-context factor for the infinity ladder: the largest fixed cell, at least 1.

    The rungs must pass the context magnitude before the asymptotic trend shows.
    """
    return np.maximum(1.0, np.max(np.stack([np.asarray(v, dtype=float) for v in context.values()]), axis=0))


def limit_at_infinity(m: Measure, cell: str, context: Mapping[str, float],
                      tol: Tolerances = DEFAULT_TOLERANCES,
                      ladder: Sequence[float] = INFINITY_LADDER) -> LimitEstimate:
    """Limit of the ``cell`` derivative as ``cell`` grows without bound.

    The ladder is multiplied by :func:`ladder_scale` of the context.
    """
    DerivativeProbe(cell, context, 0.0)  # validates
    ctx = _context_arrays(cell, context)
    pts = np.asarray(ladder, dtype=float)[None, :] * ladder_scale(ctx)[:, None]
    d, _ = derivative_values(m, cell, {k: v[:, None] for k, v in ctx.items()}, pts)
    args = _cells_env(cell, {k: v[:, None] for k, v in ctx.items()}, pts)
    v = m.values(*args)
    code, value = infinity_verdicts(d, v, tol, ladder)
    evidence = tuple(zip(map(float, pts[0]), map(float, d[0])))
    return LimitEstimate(float(value[0]), _VERDICTS[code[0]], evidence, "symbolic" if m.smooth else "central")


def limit_at_zero(m: Measure, cell: str, context: Mapping[str, float],
                  tol: Tolerances = DEFAULT_TOLERANCES,
                  ladder: Sequence[float] = ZERO_LADDER) -> LimitEstimate:
    """Limit of the ``cell`` derivative as ``cell`` falls to 0 from above."""
    DerivativeProbe(cell, context, 0.0)
    ctx = {k: v[:, None] for k, v in _context_arrays(cell, context).items()}
    pts = np.asarray(ladder, dtype=float)[None, :]
    d, _ = derivative_values(m, cell, ctx, pts)
    d0, _ = derivative_values(m, cell, ctx, np.zeros((1, 1)))
    code, value = zero_verdicts(d, d0[:, 0], tol, ladder)
    evidence = tuple(zip(map(float, ladder), map(float, d[0]))) + ((0.0, float(d0[0, 0])),)
    return LimitEstimate(float(value[0]), _VERDICTS[code[0]], evidence, "symbolic" if m.smooth else "forward")
