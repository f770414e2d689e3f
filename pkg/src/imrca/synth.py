"""Deterministic sparse and dense synthetic rule populations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .tables import ContingencyTable

_LOW = (0.0, 1.0, 10.0, 11.0)
_HIGH = (1000.0, 5000.0, 10000.0, 25000.0, 50000.0, 75000.0, 100000.0)
_MIXED = (10.0, 100.0, 250.0, 500.0, 600.0, 800.0, 1000.0)


@dataclass(frozen=True)
class GridPreset:
    name: str
    f11: tuple[float, ...]
    f00: tuple[float, ...]
    f10: tuple[float, ...]
    f01: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.f11) * len(self.f00) * len(self.f10) * len(self.f01)


PRESETS = {
    "sparse": GridPreset("sparse", f11=_LOW, f00=_HIGH, f10=_MIXED, f01=_MIXED),
    "dense": GridPreset("dense", f11=_HIGH, f00=_LOW, f10=_MIXED, f01=_MIXED),
}


def preset(name: str) -> GridPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}") from None


def generate(p: GridPreset | str) -> list[ContingencyTable]:
    """Cartesian product in lexicographic order of the (f11, f00, f10, f01) value indices."""
    if isinstance(p, str):
        p = preset(p)
    return [
        ContingencyTable(f11=a, f10=b, f01=c, f00=d)
        for a, d, b, c in itertools.product(p.f11, p.f00, p.f10, p.f01)
    ]
