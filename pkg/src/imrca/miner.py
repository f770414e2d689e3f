"""One-to-one association rules from a binarized transaction matrix."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .tables import ContingencyTable


class TransactionError(ValueError):
    pass


@dataclass(frozen=True)
class TransactionMatrix:
    features: tuple[str, ...]
    rows: np.ndarray  # (n_rows, n_features) uint8

    def __post_init__(self) -> None:
        if len(set(self.features)) != len(self.features):
            dup = sorted({f for f in self.features if self.features.count(f) > 1})
            raise TransactionError(f"duplicate feature names: {dup}")
        if len(self.features) < 2:
            raise TransactionError("need at least 2 features")
        if self.rows.ndim != 2 or self.rows.shape[0] < 1:
            raise TransactionError("need at least 1 transaction")
        if self.rows.shape[1] != len(self.features):
            raise TransactionError("row width does not match the feature count")
        if not np.isin(self.rows, (0, 1)).all():
            raise TransactionError("cells must be 0 or 1")

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class Rule:
    antecedent: str
    consequent: str
    table: ContingencyTable


def load_transactions(path: Path | str) -> TransactionMatrix:
    """Read a CSV with a header of feature names and 0/1 cells."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise TransactionError(f"{path}: empty file") from None
        body = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise TransactionError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            vals = []
            for col, cell in zip(header, row):
                cell = cell.strip()
                if cell not in ("0", "1"):
                    raise TransactionError(f"{path}:{lineno}: column {col!r} has non-binary value {cell!r}")
                vals.append(cell == "1")
            body.append(vals)
    if not body:
        raise TransactionError(f"{path}: no transactions")
    return TransactionMatrix(tuple(header), np.asarray(body, dtype=np.uint8))


def mine_rules(m: TransactionMatrix, min_support: float = 0.0, keep_empty: bool = False) -> list[Rule]:
    """All ordered feature pairs (a, c), a != c, with f11/N > min_support.

    With the default ``min_support = 0`` this keeps every pair that co-occurs
    at least once; ``keep_empty`` also keeps pairs that never co-occur.
    Rules come out in (a, c) feature-index order.
    """
    if not 0.0 <= min_support < 1.0:
        raise ValueError(f"min_support must be in [0, 1), got {min_support}")
    x = m.rows.astype(np.int64)
    both = x.T @ x  # f11 for every ordered pair
    counts = x.sum(axis=0)
    n = m.n
    rules = []
    for a, c in itertools.permutations(range(len(m.features)), 2):
        f11 = int(both[a, c])
        if not (f11 / n > min_support or (keep_empty and f11 == 0 and min_support == 0.0)):
            continue
        f10 = int(counts[a]) - f11
        f01 = int(counts[c]) - f11
        rules.append(Rule(m.features[a], m.features[c], ContingencyTable(f11, f10, f01, n - f11 - f10 - f01)))
    return rules


def filter_sparse(rules: Iterable[Rule]) -> list[Rule]:
    return [r for r in rules if r.table.f11 < r.table.f00]


def filter_dense(rules: Iterable[Rule]) -> list[Rule]:
    return [r for r in rules if r.table.f11 > r.table.f00]


RULES_HEADER = ("antecedent", "consequent", "f11", "f10", "f01", "f00")


def write_rules_csv(rules: Sequence[Rule], path: Path | str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RULES_HEADER)
        for r in rules:
            w.writerow([r.antecedent, r.consequent, *(int(v) if float(v).is_integer() else v for v in r.table)])


def read_rules_csv(path: Path | str) -> list[Rule]:
    """Rules CSV, or a plain table CSV (f11,f10,f01,f00) whose rows get positional names."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if not {"f11", "f10", "f01", "f00"} <= set(fields):
            raise ValueError(f"{path}: header must include f11,f10,f01,f00")
        named = {"antecedent", "consequent"} <= set(fields)
        out = []
        for i, row in enumerate(reader):
            t = ContingencyTable(*(float(row[c]) for c in ("f11", "f10", "f01", "f00")))
            a, c = (row["antecedent"], row["consequent"]) if named else (f"t{i}", "")
            out.append(Rule(a, c, t))
    return out
