"""UNAI / UNZR classification of measures over a finite probe grid.

For every (measure, cell) pair the other three cells range over a grid of
contexts.  UNAI asks whether the cell derivative vanishes as the cell grows
without bound; UNZR asks for the sign of the derivative as the cell falls to
zero.  Per-context verdicts come from :mod:`imrca.calculus`; this module
filters feasible contexts and aggregates.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .calculus import (
    DEFAULT_TOLERANCES,
    INFINITY_LADDER,
    ZERO_LADDER,
    Tolerances,
    derivative_values,
    infinity_verdicts,
    ladder_scale,
    zero_verdicts,
)
from .catalog import Measure, list_measures
from .tables import CELLS

# published column order
LABEL_CELLS = ("f11", "f00", "f10", "f01")
COLUMNS = tuple(f"UNAI_{c}" for c in LABEL_CELLS) + ("UNAI",) + tuple(f"UNZR_{c}" for c in LABEL_CELLS) + ("UNZR",)
DEFAULT_GRID_VALUES = (0.0, 1.0, 5.0, 10.0, 100.0, 1000.0, 1e6)
VERDICT_NAMES = ("converges-to-zero", "converges-nonzero", "diverges", "undefined")


@dataclass(frozen=True)
class ProbeGrid:
    """Candidate values for the three cells held fixed while one cell moves.

    ``point_feasibility`` controls UNZR: with ``"exact"`` a context counts only
    if the measure is defined (possibly infinite) with the moving cell at
    exactly zero; ``"ladder"`` only requires definedness along the approach.
    UNZR contexts whose three fixed cells are all zero are always dropped, and
    ``max_zero_cells`` can drop contexts with fewer zeros too.
    """

    values: tuple[float, ...] = DEFAULT_GRID_VALUES
    infinity_ladder: tuple[float, ...] = INFINITY_LADDER
    zero_ladder: tuple[float, ...] = ZERO_LADDER
    tolerances: Tolerances = DEFAULT_TOLERANCES
    point_feasibility: str = "exact"
    max_zero_cells: int = 2

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("probe grid needs at least one value")
        if any(v < 0 for v in self.values):
            raise ValueError("probe grid values must be >= 0")
        if not 0 <= self.max_zero_cells <= 2:
            raise ValueError("max_zero_cells must be 0, 1 or 2")
        if self.point_feasibility not in ("exact", "ladder"):
            raise ValueError(f"unknown point_feasibility {self.point_feasibility!r}")
        object.__setattr__(self, "values", tuple(sorted(set(float(v) for v in self.values))))

    def contexts(self, cell: str) -> dict[str, np.ndarray]:
        """All combinations of grid values for the cells other than ``cell``, as column arrays."""
        others = [c for c in CELLS if c != cell]
        combos = np.array(list(itertools.product(self.values, repeat=3)), dtype=float)
        return {c: combos[:, i] for i, c in enumerate(others)}


@dataclass(frozen=True)
class CellEvidence:
    """Per-context verdicts behind one label.

    ``feasible`` marks the contexts that entered the decision; ``codes`` are
    indices into :data:`VERDICT_NAMES`, ``limits`` the limit values.
    """

    property: str
    cell: str
    label: str
    contexts: dict[str, np.ndarray] = field(repr=False)
    feasible: np.ndarray = field(repr=False)
    codes: np.ndarray = field(repr=False)
    limits: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    ladder: tuple[float, ...] = ()

    @property
    def n_feasible(self) -> int:
        return int(self.feasible.sum())

    @property
    def n_undefined(self) -> int:
        return int((self.feasible & (self.codes == 3)).sum())

    @property
    def inconclusive(self) -> bool:
        """No feasible context, or some feasible context had an undecidable ladder."""
        return self.n_feasible == 0 or self.n_undefined > 0

    def digest(self) -> str:
        counts = {name: int((self.feasible & (self.codes == i)).sum()) for i, name in enumerate(VERDICT_NAMES)}
        parts = [f"feasible={self.n_feasible}/{self.feasible.size}"]
        parts += [f"{k}={v}" for k, v in counts.items() if v]
        if self.property == "UNZR":
            lim = self.limits[self.feasible & (self.codes != 3)]
            parts.append(f"neg={int((lim < 0).sum())} zero={int((lim == 0).sum())} pos={int((lim > 0).sum())}")
        return " ".join(parts)

    def rows(self) -> Iterable[list[float | str]]:
        """Flat evidence rows: context, feasibility, verdict, limit and ladder samples."""
        keys = list(self.contexts)
        for i in range(self.feasible.size):
            yield (
                [float(self.contexts[k][i]) for k in keys]
                + [int(self.feasible[i]), VERDICT_NAMES[int(self.codes[i])], float(self.limits[i])]
                + [float(x) for x in self.samples[i]]
            )

    def header(self) -> list[str]:
        pts = [f"d@{p:g}" for p in self.ladder]
        if self.property == "UNZR":
            pts.append("d@0")
        return list(self.contexts) + ["feasible", "verdict", "limit"] + pts


@dataclass(frozen=True)
class RcaClassification:
    measure: str
    unai: dict[str, str]
    unzr: dict[str, str]
    evidence: dict[tuple[str, str], CellEvidence] = field(default_factory=dict, repr=False, compare=False)

    @property
    def unai_overall(self) -> str:
        return overall_unai(self.unai.values())

    @property
    def unzr_overall(self) -> str:
        return overall_unzr(self.unzr.values())

    def labels(self) -> tuple[str, ...]:
        """Ten labels in published column order."""
        return (
            tuple(self.unai[c] for c in LABEL_CELLS)
            + (self.unai_overall,)
            + tuple(self.unzr[c] for c in LABEL_CELLS)
            + (self.unzr_overall,)
        )

    @property
    def inconclusive(self) -> list[tuple[str, str]]:
        return [k for k, ev in self.evidence.items() if ev.inconclusive]


def overall_unai(labels: Iterable[str]) -> str:
    return "Y" if all(x == "Y" for x in labels) else "N"


def overall_unzr(labels: Iterable[str]) -> str:
    labels = list(labels)
    if any(x == "N" for x in labels):
        return "N"
    return "Y" if all(x == "Y" for x in labels) else "P"


def _values_on(m: Measure, cell: str, ctx: dict[str, np.ndarray], pts: np.ndarray) -> np.ndarray:
    cols = {c: ctx[c][:, None] for c in ctx}
    args = [pts if c == cell else cols[c] for c in CELLS]
    return np.broadcast_to(m.values(*args), np.broadcast_shapes(*(np.shape(a) for a in args)))


def unai_evidence(m: Measure, cell: str, grid: ProbeGrid = ProbeGrid()) -> CellEvidence:
    ctx = grid.contexts(cell)
    pts = np.asarray(grid.infinity_ladder, dtype=float)[None, :] * ladder_scale(ctx)[:, None]
    cols = {c: v[:, None] for c, v in ctx.items()}
    d, _ = derivative_values(m, cell, cols, pts)
    v = _values_on(m, cell, ctx, pts)
    feasible = np.isfinite(d).all(axis=1) & np.isfinite(v).all(axis=1)
    codes, limits = infinity_verdicts(d, v, grid.tolerances, grid.infinity_ladder)
    decisive = feasible & (codes != 3)
    violated = decisive & ((codes == 1) | (codes == 2))
    label = "N" if violated.any() else "Y"
    return CellEvidence("UNAI", cell, label, ctx, feasible, codes, limits, np.asarray(d), grid.infinity_ladder)


def unzr_evidence(m: Measure, cell: str, grid: ProbeGrid = ProbeGrid()) -> CellEvidence:
    ctx = grid.contexts(cell)
    pts = np.asarray(grid.zero_ladder, dtype=float)[None, :]
    cols = {c: v[:, None] for c, v in ctx.items()}
    d, _ = derivative_values(m, cell, cols, pts)
    d0, _ = derivative_values(m, cell, cols, np.zeros((1, 1)))
    d0 = np.asarray(d0)[:, 0]
    v = _values_on(m, cell, ctx, pts)
    v0 = _values_on(m, cell, ctx, np.zeros((1, 1)))[:, 0]

    few_zeros = sum((col == 0).astype(int) for col in ctx.values()) <= grid.max_zero_cells
    on_ladder = few_zeros & np.isfinite(d).all(axis=1) & np.isfinite(v).all(axis=1)
    at_point = on_ladder & ~np.isnan(v0)
    feasible = on_ladder if grid.point_feasibility == "ladder" else at_point

    codes, limits = zero_verdicts(d, d0, grid.tolerances, grid.zero_ladder)
    label = _sign_label(limits[feasible & (codes != 3)], negative=cell in ("f10", "f01"))
    samples = np.concatenate([np.asarray(d), d0[:, None]], axis=1)
    return CellEvidence("UNZR", cell, label, ctx, feasible, codes, limits, samples, grid.zero_ladder)


def _sign_label(limits: np.ndarray, negative: bool) -> str:
    """Y if every limit has the favourable sign, P if none is unfavourable and some are favourable."""
    s = -limits if negative else limits
    if s.size == 0:
        return "N"
    if (s > 0).all():
        return "Y"
    if (s >= 0).all() and (s > 0).any():
        return "P"
    return "N"


def classify_unai(m: Measure, cell: str, grid: ProbeGrid = ProbeGrid()) -> str:
    return unai_evidence(m, cell, grid).label


def classify_unzr(m: Measure, cell: str, grid: ProbeGrid = ProbeGrid()) -> str:
    return unzr_evidence(m, cell, grid).label


def classify_measure(m: Measure, grid: ProbeGrid = ProbeGrid()) -> RcaClassification:
    evidence: dict[tuple[str, str], CellEvidence] = {}
    unai, unzr = {}, {}
    for c in LABEL_CELLS:
        ev = unai_evidence(m, c, grid)
        evidence[("UNAI", c)] = ev
        unai[c] = ev.label
        ev = unzr_evidence(m, c, grid)
        evidence[("UNZR", c)] = ev
        unzr[c] = ev.label
    return RcaClassification(m.id, unai, unzr, evidence)


def classify_catalog(grid: ProbeGrid = ProbeGrid(), measures: Sequence[Measure] | None = None) -> list[RcaClassification]:
    return [classify_measure(m, grid) for m in (measures or list_measures())]


def marginals(rows: Sequence[RcaClassification]) -> dict[str, int]:
    """Count of every label per column, keyed ``"<column>:<label>"``."""
    out: dict[str, int] = {}
    for j, col in enumerate(COLUMNS):
        for lab in ("Y", "P", "N") if col.startswith("UNZR") else ("Y", "N"):
            out[f"{col}:{lab}"] = sum(r.labels()[j] == lab for r in rows)
    return out


def expected_labels() -> dict[str, tuple[str, ...]]:
    """Published labels keyed by measure id, in published column order."""
    text = resources.files("imrca").joinpath("data/published-labels.csv").read_text(encoding="utf-8")
    reader = csv.reader(text.splitlines())
    header = next(reader)
    if tuple(header[1:]) != COLUMNS:
        raise ValueError(f"unexpected expected-labels header {header}")
    return {row[0]: tuple(row[1:]) for row in reader if row}


def write_classification_csv(rows: Sequence[RcaClassification], path: Path, fmt=str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("measure",) + COLUMNS + ("inconclusive",))
        for r in rows:
            flags = ";".join(f"{p}_{c}" for p, c in r.inconclusive)
            w.writerow((r.measure,) + r.labels() + (flags,))


def write_evidence(rows: Sequence[RcaClassification], directory: Path, fmt=repr) -> list[Path]:
    """One CSV of per-context ladder samples per (measure, property, cell)."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for r in rows:
        for (prop, cell), ev in r.evidence.items():
            p = directory / f"{r.measure}.{prop}.{cell}.csv"
            with open(p, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(ev.header())
                for row in ev.rows():
                    w.writerow([fmt(x) if isinstance(x, float) else x for x in row])
            written.append(p)
    return written


def read_classification_csv(path: Path | str) -> dict[str, tuple[str, ...]]:
    """Measure id -> ten labels, as written by :func:`write_classification_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("measure",) + COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: classification CSV is missing columns {missing}")
        out = {}
        for lineno, row in enumerate(reader, start=2):
            labels = tuple(row[c] for c in COLUMNS)
            bad = [x for x in labels if x not in ("Y", "P", "N")]
            if bad:
                raise ValueError(f"{path}:{lineno}: labels must be Y, P or N, got {bad}")
            out[row["measure"]] = labels
    return out
