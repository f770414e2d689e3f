"""Rank rules under every measure, correlate the rankings, and cluster the measures.

Higher measure value means better (lower) rank; ties share the average rank;
undefined values are masked.  Spearman's rho is the Pearson correlation of
rank vectors, recomputed over the mutually defined rules of each pair.
Clusters are connected components of the graph with an edge wherever
rho >= threshold.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import rankdata

from .catalog import Measure
from .tables import ContingencyTable

MIN_OVERLAP = 3
DEFAULT_THRESHOLD = 0.8


@dataclass(frozen=True)
class RankMatrix:
    """Measures x rules.  ``values`` keeps the raw scores (NaN = undefined)."""

    measures: tuple[str, ...]
    values: np.ndarray
    ranks: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def fully_masked(self) -> list[str]:
        return [m for m, row in zip(self.measures, self.defined) if not row.any()]


def rank_desc(values: np.ndarray) -> np.ndarray:
    """Average ranks with the largest value ranked 1; NaN stays NaN."""
    values = np.asarray(values, dtype=float)
    out = np.full(values.shape, np.nan)
    ok = ~np.isnan(values)
    if ok.any():
        out[ok] = rankdata(-values[ok], method="average")
    return out


def measure_values(tables: Sequence[ContingencyTable], measures: Sequence[Measure]) -> np.ndarray:
    cols = np.array([t.as_tuple() for t in tables], dtype=float).T
    return np.vstack([np.broadcast_to(m.values(*cols), (len(tables),)) for m in measures])


def rank_values(measures: Sequence[str], values: np.ndarray) -> RankMatrix:
    """Rank a precomputed measures x rules value matrix row by row."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != len(measures):
        raise ValueError("values must be a matrix with one row per measure")
    if values.shape[1] < 2:
        raise ValueError("ranking needs at least 2 rules")
    ranks = np.vstack([rank_desc(row) for row in values])
    return RankMatrix(tuple(measures), values, ranks)


def rank_rules(tables: Sequence[ContingencyTable], measures: Sequence[Measure]) -> RankMatrix:
    return rank_values([m.id for m in measures], measure_values(tables, measures))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = x - x.mean()
    y = y - y.mean()
    den = np.sqrt((x * x).sum() * (y * y).sum())
    if den == 0:
        return float("nan")
    return float(np.clip((x * y).sum() / den, -1.0, 1.0))


def spearman(a: np.ndarray, b: np.ndarray, min_overlap: int = MIN_OVERLAP) -> float:
    """Spearman rho of two score vectors over their mutually defined entries.

    NaN when fewer than ``min_overlap`` entries are shared or either side is
    constant on the overlap.
    """
    both = ~np.isnan(a) & ~np.isnan(b)
    if both.sum() < min_overlap:
        return float("nan")
    return _pearson(rankdata(-a[both], method="average"), rankdata(-b[both], method="average"))


def spearman_matrix(rm: RankMatrix, min_overlap: int = MIN_OVERLAP) -> np.ndarray:
    """Symmetric rho matrix, unit diagonal, NaN where the overlap is too small."""
    k = len(rm.measures)
    rho = np.eye(k)
    defined = rm.defined
    full = defined.all(axis=1)
    # measures defined on every rule: one matrix product instead of pairwise work
    idx = np.flatnonzero(full)
    if idx.size and rm.values.shape[1] >= min_overlap:
        r = rm.ranks[idx]
        centred = r - r.mean(axis=1, keepdims=True)
        norms = np.sqrt((centred * centred).sum(axis=1))
        with np.errstate(all="ignore"):
            block = (centred @ centred.T) / np.outer(norms, norms)
        block = np.clip(block, -1.0, 1.0)
        rho[np.ix_(idx, idx)] = block
    for i, j in itertools.combinations(range(k), 2):
        if full[i] and full[j]:
            continue
        rho[i, j] = rho[j, i] = spearman(rm.values[i], rm.values[j], min_overlap)
    # constant rank vectors give NaN off the diagonal; keep the diagonal at 1 and exact symmetry
    rho = np.triu(rho, 1)
    rho = rho + rho.T
    np.fill_diagonal(rho, 1.0)
    return rho


@dataclass(frozen=True)
class ClusterAssignment:
    """Labelled blocks, A first; larger clusters first, ties by smallest member id."""

    clusters: tuple[tuple[str, tuple[str, ...]], ...]

    def label_of(self, measure: str) -> str:
        for lab, members in self.clusters:
            if measure in members:
                return lab
        raise KeyError(measure)

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return dict(self.clusters)

    def membership(self) -> dict[str, str]:
        return {m: lab for lab, members in self.clusters for m in members}

    def to_text(self) -> str:
        return "".join(f"{lab}: {' '.join(members)}\n" for lab, members in self.clusters)


def _labels(n: int) -> list[str]:
    letters = string.ascii_uppercase
    out = list(letters[:n])
    for a in letters:
        if len(out) >= n:
            break
        out += [a + b for b in letters][: n - len(out)]
    return out


def assignment_from_blocks(blocks: Sequence[Sequence[str]], order: Sequence[str] | None = None) -> ClusterAssignment:
    """Label blocks by decreasing size, ties broken by the lexicographically smallest member."""
    pos = {m: i for i, m in enumerate(order)} if order is not None else None
    norm = [tuple(sorted(b, key=(pos.__getitem__ if pos else None))) for b in blocks if b]
    norm.sort(key=lambda b: (-len(b), min(b)))
    return ClusterAssignment(tuple(zip(_labels(len(norm)), norm)))


def cluster(rho: np.ndarray, measures: Sequence[str], threshold: float = DEFAULT_THRESHOLD) -> ClusterAssignment:
    """Connected components of the graph with an edge wherever rho >= threshold."""
    if not -1.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (-1, 1), got {threshold}")
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (len(measures), len(measures)):
        raise ValueError("rho must be square with one row per measure")
    with np.errstate(invalid="ignore"):
        adj = np.nan_to_num(rho, nan=-np.inf) >= threshold
    _, comp = connected_components(csr_matrix(adj), directed=False)
    blocks: dict[int, list[str]] = {}
    for m, c in zip(measures, comp):
        blocks.setdefault(int(c), []).append(m)
    return assignment_from_blocks(list(blocks.values()), measures)


CROSSTAB_LABELS = ("N", "P", "Y")


def property_crosstab(ca: ClusterAssignment, labels: Mapping[str, str]) -> list[tuple[str, int, int, int, int]]:
    """Rows ``(cluster, size, #N, #P, #Y)``; row sums equal cluster sizes."""
    rows = []
    for lab, members in ca.clusters:
        missing = [m for m in members if m not in labels]
        if missing:
            raise KeyError(f"no property label for {missing}")
        counts = [sum(labels[m] == x for m in members) for x in CROSSTAB_LABELS]
        rows.append((lab, len(members), *counts))
    return rows


def rand_index(a: Mapping[str, str], b: Mapping[str, str]) -> float:
    """Fraction of item pairs on which two partitions agree (same block vs different), over shared items."""
    items = sorted(set(a) & set(b))
    if len(items) < 2:
        raise ValueError("need at least two shared items")
    agree = total = 0
    for x, y in itertools.combinations(items, 2):
        agree += (a[x] == a[y]) == (b[x] == b[y])
        total += 1
    return agree / total


def adjusted_rand_index(a: Mapping[str, str], b: Mapping[str, str]) -> float:
    items = sorted(set(a) & set(b))
    la = sorted({a[i] for i in items})
    lb = sorted({b[i] for i in items})
    table = np.zeros((len(la), len(lb)))
    for i in items:
        table[la.index(a[i]), lb.index(b[i])] += 1

    def c2(x):
        return x * (x - 1) / 2.0

    n = len(items)
    sum_ij = c2(table).sum()
    sum_a = c2(table.sum(axis=1)).sum()
    sum_b = c2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / c2(n)
    top = (sum_a + sum_b) / 2.0
    if top == expected:
        return 1.0
    return float((sum_ij - expected) / (top - expected))


def published_partitions() -> dict[str, dict[str, str]]:
    """Published memberships per experiment, as measure id -> cluster label."""
    text = resources.files("imrca").joinpath("data/partitions.txt").read_text(encoding="utf-8")
    out: dict[str, dict[str, str]] = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        exp, lab, ids = (p.strip() for p in line.split("|"))
        for mid in ids.split():
            out.setdefault(exp, {})[mid] = lab
    return out


def _num(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.12g}"


def rho_csv_text(rho: np.ndarray, measures: Sequence[str]) -> str:
    """Square CSV with a ``measure`` header column; missing entries are blank."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("measure", *measures))
    for m, row in zip(measures, rho):
        w.writerow((m, *(_num(float(x)) for x in row)))
    return buf.getvalue()


def read_rho_csv(path: Path | str) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["measure"]:
        raise ValueError(f"{path}: expected a header starting with 'measure'")
    names = rows[0][1:]
    body = rows[1:]
    if [r[0] for r in body] != names:
        raise ValueError(f"{path}: row labels must repeat the header order")
    rho = np.array([[float(x) if x else np.nan for x in r[1:]] for r in body], dtype=float)
    return names, rho.reshape(len(names), len(names))


def parse_clusters(text: str) -> ClusterAssignment:
    """Inverse of :meth:`ClusterAssignment.to_text`."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        lab, sep, ids = line.partition(":")
        if not sep or not ids.split():
            raise ValueError(f"line {lineno}: expected 'LABEL: id id ...'")
        out.append((lab.strip(), tuple(ids.split())))
    return ClusterAssignment(tuple(out))


CROSSTAB_HEADER = ("cluster", "size", "N", "P", "Y")


def crosstab_csv_text(rows: Sequence[tuple[str, int, int, int, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CROSSTAB_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def read_crosstab_csv(path: Path | str) -> list[tuple[str, int, int, int, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader, ())) != CROSSTAB_HEADER:
            raise ValueError(f"{path}: header must be {','.join(CROSSTAB_HEADER)}")
        return [(r[0], *(int(x) for x in r[1:])) for r in reader if r]


def read_rank_csv(path: Path | str) -> tuple[list[str], np.ndarray]:
    """Measure ids and a measures x rules rank array (NaN where masked) from ``rank`` output."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["antecedent", "consequent"]:
        raise ValueError(f"{path}: expected a header starting with antecedent,consequent")
    measures = rows[0][2:]
    ranks = np.array([[float(x) if x else np.nan for x in r[2:]] for r in rows[1:]], dtype=float)
    return measures, ranks.reshape(len(rows) - 1, len(measures)).T
