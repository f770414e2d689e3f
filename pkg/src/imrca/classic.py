"""Checkers for eight established measure properties, with replayable counterexamples.

P1  zero at statistical independence
P2  non-decreasing in f11 along margin-preserving paths, increasing somewhere
P3  non-increasing as P(A) (or P(B)) grows with f11 fixed, decreasing somewhere
O1  symmetric under swapping A and B
O2  invariant under row and column scaling
O3  antisymmetric under swapping rows and under swapping columns
O3' invariant under inversion (swap rows and columns)
O4  invariant under adding co-absence records (null invariance)

Every check runs over a fixed, versioned generator set of 50 tables; values
are compared with relative tolerance 1e-9.  An undefined value in any
comparison is a violation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterator, Sequence

import numpy as np

from .catalog import Measure, evaluate
from .rca import RcaClassification
from .tables import ContingencyTable, transform

PROPERTIES = ("P1", "P2", "P3", "O1", "O2", "O3", "O3'", "O4")
REL_TOL = 1e-9
ABS_TOL = 1e-12
PATH_STEPS = 5
DEFAULT_SEED = 20240607


@dataclass(frozen=True)
class Counterexample:
    """Tables whose values violate ``property``; :meth:`replay` re-checks them."""

    property: str
    kind: str
    tables: tuple[ContingencyTable, ...]
    values: tuple[float, ...]

    @property
    def note(self) -> str:
        return _DESCRIBE[self.kind]

    def replay(self, m: Measure) -> bool:
        """True iff evaluating ``m`` on the stored tables still violates the property."""
        values = tuple(evaluate(m, t) for t in self.tables)
        return not _HOLDS[self.kind](values)


@dataclass(frozen=True)
class ClassicPropertyReport:
    measure: str
    verdicts: dict[str, str]
    counterexamples: dict[str, Counterexample]

    def __post_init__(self) -> None:
        for p, v in self.verdicts.items():
            if (v == "N") != (p in self.counterexamples):
                raise ValueError(f"{self.measure} {p}: counterexample must be present iff verdict is N")


def close(a: float, b: float) -> bool:
    if math.isnan(a) or math.isnan(b):
        return False
    if math.isinf(a) or math.isinf(b):
        return a == b
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=ABS_TOL)


def _le(a: float, b: float) -> bool:
    return not (math.isnan(a) or math.isnan(b)) and (a <= b or close(a, b))


def _non_decreasing(vals: Sequence[float]) -> bool:
    return all(_le(a, b) for a, b in zip(vals, vals[1:]))


def _non_increasing(vals: Sequence[float]) -> bool:
    return all(_le(b, a) for a, b in zip(vals, vals[1:]))


def _moves(vals: Sequence[float]) -> bool:
    return any(not close(a, b) for a, b in zip(vals, vals[1:]))


# case kinds: each maps the values of a case's tables to "holds"
_HOLDS: dict[str, Callable[[Sequence[float]], bool]] = {
    "zero": lambda v: close(v[0], 0.0),
    "non-decreasing": _non_decreasing,
    "non-increasing": _non_increasing,
    "moves": _moves,
    "equal": lambda v: close(v[0], v[1]),
    "negated": lambda v: close(v[1], -v[0]),
}


_DESCRIBE = {
    "zero": "nonzero or undefined at an independent table",
    "non-decreasing": "decreases or is undefined along the path",
    "non-increasing": "increases or is undefined along the path",
    "moves": "flat along every path",
    "equal": "value differs or is undefined after the transform",
    "negated": "value is not negated or is undefined after the transform",
}


def generator_tables() -> list[tuple[ContingencyTable, str]]:
    """The 50 fixed start tables with their shape tag."""
    text = resources.files("imrca").joinpath("data/generators.csv").read_text(encoding="utf-8")
    rows = csv.DictReader(text.splitlines())
    return [(ContingencyTable(*(float(r[c]) for c in ("f11", "f10", "f01", "f00"))), r["shape"]) for r in rows]


def _independent(t: ContingencyTable) -> bool:
    return t.f11 * t.f00 == t.f10 * t.f01


def _path(t: ContingencyTable, steps: Sequence[tuple[float, float, float, float]], delta: float) -> tuple[ContingencyTable, ...]:
    out = []
    for k in range(PATH_STEPS + 1):
        out.append(ContingencyTable(*(x + k * delta * s for x, s in zip(t.as_tuple(), steps))))
    return tuple(out)


def _cases(prop: str, rng: np.random.Generator) -> Iterator[tuple[str, tuple[ContingencyTable, ...]]]:
    """Yield ``(kind, tables)`` cases for ``prop``; the property holds iff every case holds."""
    gens = [t for t, _ in generator_tables()]
    if prop == "P1":
        for t in gens:
            if _independent(t):
                yield "zero", (t,)
    elif prop == "P2":
        for t in gens:
            if t.f10 > 0 and t.f01 > 0:
                yield "non-decreasing", _path(t, (1, -1, -1, 1), min(t.f10, t.f01) / (PATH_STEPS + 1))
    elif prop == "P3":
        for t in gens:
            if t.f00 > 0:
                delta = t.f00 / (PATH_STEPS + 1)
                yield "non-increasing", _path(t, (0, 1, 0, -1), delta)
                yield "non-increasing", _path(t, (0, 0, 1, -1), delta)
    elif prop == "O1":
        for t in gens:
            yield "equal", (t, transform(t, "swap-variables"))
    elif prop == "O2":
        for t in gens:
            k1, k2, l1, l2 = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=4))
            yield "equal", (t, transform(transform(t, "scale-rows", k1, k2), "scale-cols", l1, l2))
    elif prop == "O3":
        for t in gens:
            yield "negated", (t, transform(t, "swap-rows"))
            yield "negated", (t, transform(t, "swap-cols"))
    elif prop == "O3'":
        for t in gens:
            yield "equal", (t, transform(t, "invert"))
    elif prop == "O4":
        for t in gens:
            k = float(rng.choice([1.0, 10.0, 1000.0, 1e6]))
            yield "equal", (t, transform(t, "add-null", k))


def check(m: Measure, prop: str, seed: int = DEFAULT_SEED) -> tuple[str, Counterexample | None]:
    """Verdict Y/N for one property, with the first violating case when N."""
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}; expected one of {', '.join(PROPERTIES)}")
    rng = np.random.default_rng([seed, PROPERTIES.index(prop)])
    paths = []
    for kind, tables in _cases(prop, rng):
        values = tuple(evaluate(m, t) for t in tables)
        if not _HOLDS[kind](values):
            return "N", Counterexample(prop, kind, tables, values)
        if kind in ("non-decreasing", "non-increasing"):
            paths.append((tables, values))
    if prop in ("P2", "P3") and not any(_moves(v) for _, v in paths):
        tables, values = paths[0] if paths else ((), ())
        return "N", Counterexample(prop, "moves", tables, values)
    return "Y", None


def check_p1(m: Measure) -> str:
    return check(m, "P1")[0]


def check_p2(m: Measure) -> str:
    return check(m, "P2")[0]


def check_p3(m: Measure) -> str:
    return check(m, "P3")[0]


def check_o(m: Measure, which: str, seed: int = DEFAULT_SEED) -> str:
    if which not in ("O1", "O2", "O3", "O3'", "O4"):
        raise ValueError(f"unknown O-property {which!r}")
    return check(m, which, seed)[0]


def report(m: Measure, seed: int = DEFAULT_SEED) -> ClassicPropertyReport:
    verdicts, cex = {}, {}
    for p in PROPERTIES:
        v, c = check(m, p, seed)
        verdicts[p] = v
        if c is not None:
            cex[p] = c
    return ClassicPropertyReport(m.id, verdicts, cex)


@dataclass(frozen=True)
class Crosstab:
    """Counts of measures per (classic verdict, RCA label) for one property."""

    property: str
    unai: dict[str, dict[str, int]]  # classic Y/N -> {"Y": n, "N": n}
    unzr: dict[str, dict[str, int]]  # classic Y/N -> {"Y": n, "P": n, "N": n}

    def rows(self) -> list[list[str | int]]:
        out: list[list[str | int]] = []
        for state, name in (("Y", "Satisfied"), ("N", "Not Satisfied")):
            out.append(
                [self.property, name]
                + [self.unai[state][k] for k in ("Y", "N")]
                + [self.unzr[state][k] for k in ("Y", "P", "N")]
            )
        return out


CROSSTAB_HEADER = ("property", "state", "UNAI_Y", "UNAI_N", "UNZR_Y", "UNZR_P", "UNZR_N")


def crosstab(classic: Sequence[ClassicPropertyReport], rca: Sequence[RcaClassification], prop: str) -> Crosstab:
    by_id = {r.measure: r for r in rca}
    unai = {s: {"Y": 0, "N": 0} for s in ("Y", "N")}
    unzr = {s: {"Y": 0, "P": 0, "N": 0} for s in ("Y", "N")}
    for rep in classic:
        r = by_id[rep.measure]
        s = rep.verdicts[prop]
        unai[s][r.unai_overall] += 1
        unzr[s][r.unzr_overall] += 1
    return Crosstab(prop, unai, unzr)


__all__ = [
    "PROPERTIES",
    "ClassicPropertyReport",
    "Counterexample",
    "Crosstab",
    "CROSSTAB_HEADER",
    "check",
    "check_o",
    "check_p1",
    "check_p2",
    "check_p3",
    "crosstab",
    "generator_tables",
    "report",
]
