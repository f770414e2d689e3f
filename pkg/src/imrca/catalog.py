"""The catalog of 50 interestingness measures.

Measures live in ``data/measures.txt`` as DSL expressions; a handful that sum
``p log p`` terms or take partition maxima are native evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable

import numpy as np

from .expr import NON_SMOOTH, Expr, evaluate as eval_expr, parse
from .natives import NATIVES
from .tables import ContingencyTable

CATALOG_VERSION = "1"

ArrayFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class UnknownMeasure(KeyError):
    pass


@dataclass(frozen=True)
class Measure:
    id: str
    name: str
    source: str
    expr: Expr | None = None
    native: ArrayFn | None = field(default=None, compare=False, repr=False)

    @property
    def smooth(self) -> bool:
        """False for native evaluators and anything using min/max/abs."""
        return self.expr is not None and not self.expr.uses(NON_SMOOTH)

    @property
    def body_text(self) -> str:
        return "NATIVE" if self.expr is None else str(self.expr)

    def depends_on(self, cell: str) -> bool:
        if self.expr is None:
            return True
        return cell in self.expr.variables()

    def values(self, f11, f10, f01, f00) -> np.ndarray:
        """Vectorised evaluation; NaN marks undefined."""
        if self.native is not None:
            with np.errstate(all="ignore"):
                args = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (f11, f10, f01, f00)))
                return np.asarray(self.native(*args), dtype=float)
        return eval_expr(self.expr, {"f11": f11, "f10": f10, "f01": f01, "f00": f00})  # type: ignore[arg-type]


def evaluate(m: Measure, t: ContingencyTable) -> float:
    """Value of ``m`` on ``t``; NaN when undefined (0/0, log 0 times 0, ...)."""
    return float(m.values(t.f11, t.f10, t.f01, t.f00))


def parse_catalog(text: str) -> list[Measure]:
    measures: list[Measure] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|", 3)]
        if len(parts) != 4:
            raise ValueError(f"catalog line {lineno}: expected 4 '|'-separated fields")
        mid, name, body, source = parts
        if mid in seen:
            raise ValueError(f"catalog line {lineno}: duplicate id {mid!r}")
        seen.add(mid)
        if body == "NATIVE":
            if mid not in NATIVES:
                raise ValueError(f"catalog line {lineno}: no native evaluator for {mid!r}")
            measures.append(Measure(mid, name, source, None, NATIVES[mid]))
        else:
            measures.append(Measure(mid, name, source, parse(body)))
    return measures


@lru_cache(maxsize=1)
def _default() -> tuple[Measure, ...]:
    text = resources.files("imrca").joinpath("data/measures.txt").read_text(encoding="utf-8")
    return tuple(parse_catalog(text))


def list_measures() -> list[Measure]:
    """All 50 measures in published row order."""
    return list(_default())


def get_measure(mid: str) -> Measure:
    for m in _default():
        if m.id == mid:
            return m
    raise UnknownMeasure(f"unknown measure {mid!r}; see list-measures for valid ids")


def catalog_lines(measures: list[Measure] | None = None) -> list[str]:
    return [f"{m.id} | {m.name} | {m.body_text} | {m.source}" for m in (measures or list_measures())]
