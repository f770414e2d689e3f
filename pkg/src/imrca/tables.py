"""2x2 contingency tables and the structural transforms used by property checks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable, Sequence

CELLS = ("f11", "f10", "f01", "f00")
TRANSFORMS = (
    "swap-variables",
    "swap-rows",
    "swap-cols",
    "invert",
    "scale-rows",
    "scale-cols",
    "add-null",
)


class TableError(ValueError):
    pass


@dataclass(frozen=True)
class ContingencyTable:
    """Frequency counts of a rule A -> B.

    ``f11`` co-presence, ``f10`` A without B, ``f01`` B without A, ``f00``
    co-absence.  Counts are reals so that limit probes can use fractional
    values; tables mined from data are integer valued.
    """

    f11: float
    f10: float
    f01: float
    f00: float

    def __post_init__(self) -> None:
        for name in CELLS:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or math.isnan(v) or v < 0 or math.isinf(v):
                raise TableError(f"{name} must be a finite count >= 0, got {v!r}")
        if self.f11 + self.f10 + self.f01 + self.f00 <= 0:
            raise TableError("table total must be > 0")

    @property
    def n(self) -> float:
        return total(self)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return astuple(self)  # type: ignore[return-value]

    def __iter__(self):
        return iter(self.as_tuple())


def total(t: ContingencyTable) -> float:
    return t.f11 + t.f10 + t.f01 + t.f00


def prob_a(t: ContingencyTable) -> float:
    return (t.f11 + t.f10) / total(t)


def prob_b(t: ContingencyTable) -> float:
    return (t.f11 + t.f01) / total(t)


def prob_ab(t: ContingencyTable) -> float:
    return t.f11 / total(t)


def transform(t: ContingencyTable, kind: str, *params: float) -> ContingencyTable:
    """Apply one of :data:`TRANSFORMS`.

    ``scale-rows`` takes (k1, k2), ``scale-cols`` takes (l1, l2), ``add-null``
    takes k.  Swaps and inversion take no parameters.
    """
    f11, f10, f01, f00 = t.as_tuple()
    if kind == "swap-variables":
        return ContingencyTable(f11, f01, f10, f00)
    if kind == "swap-rows":
        return ContingencyTable(f01, f00, f11, f10)
    if kind == "swap-cols":
        return ContingencyTable(f10, f11, f00, f01)
    if kind == "invert":
        return ContingencyTable(f00, f01, f10, f11)
    if kind == "scale-rows":
        k1, k2 = _positive(kind, params, 2)
        return ContingencyTable(k1 * f11, k1 * f10, k2 * f01, k2 * f00)
    if kind == "scale-cols":
        l1, l2 = _positive(kind, params, 2)
        return ContingencyTable(l1 * f11, l2 * f10, l1 * f01, l2 * f00)
    if kind == "add-null":
        if len(params) != 1 or params[0] < 0:
            raise TableError("add-null takes one parameter k >= 0")
        return ContingencyTable(f11, f10, f01, f00 + params[0])
    raise TableError(f"unknown transform {kind!r}; expected one of {', '.join(TRANSFORMS)}")


def _positive(kind: str, params: Sequence[float], count: int) -> Sequence[float]:
    if len(params) != count:
        raise TableError(f"{kind} takes {count} parameters, got {len(params)}")
    if any(p <= 0 for p in params):
        raise TableError(f"{kind} scale factors must be > 0, got {tuple(params)}")
    return params


def parse_table(text: str) -> ContingencyTable:
    """Parse ``"f11,f10,f01,f00"``."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise TableError(f"expected four comma-separated counts, got {text!r}")
    try:
        return ContingencyTable(*(float(p) for p in parts))
    except ValueError as exc:
        raise TableError(f"bad table {text!r}: {exc}") from None


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_tables_csv(tables: Iterable[ContingencyTable], dest: Path | io.TextIOBase) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CELLS)
        for t in tables:
            w.writerow([_fmt(v) for v in t.as_tuple()])

    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
    else:
        emit(dest)


def read_tables_csv(path: Path | str) -> list[ContingencyTable]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CELLS if c not in (reader.fieldnames or [])]
        if missing:
            raise TableError(f"{path}: header must contain {','.join(CELLS)}; missing {missing}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(ContingencyTable(*(float(row[c]) for c in CELLS)))
            except (TableError, ValueError, TypeError) as exc:
                raise TableError(f"{path}:{lineno}: {exc}") from None
    return out
