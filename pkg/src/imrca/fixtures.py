"""Deterministic stand-ins for the binarized census-income and mushroom data.

Neither public dataset is bundled.  Instead, two seeded generators draw
categorical records from a small latent-class model and one-hot encode them:

* ``adult_style``: many attributes with several balanced levels, so most
  feature pairs rarely co-occur (sparse rules, f11 << f00).
* ``mushroom_style``: attributes dominated by one level, so the dominant
  levels co-occur in most records (dense rules, f11 >> f00).

The CSVs shipped in ``imrca/data`` are exactly ``write_fixture(name)`` output.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .miner import TransactionMatrix

FIXTURE_SEED = 7


@dataclass(frozen=True)
class Attribute:
    name: str
    levels: tuple[str, ...]
    # per latent class: unnormalized level weights
    weights: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    rows: int
    class_weights: tuple[float, ...]
    attributes: tuple[Attribute, ...]


ADULT_STYLE = FixtureSpec(
    name="adult-style",
    rows=3000,
    class_weights=(0.45, 0.35, 0.20),
    attributes=(
        Attribute("age", ("17-25", "26-35", "36-45", "46-60", "61+"),
                  ((5, 4, 1, 1, 1), (1, 3, 4, 3, 1), (1, 1, 3, 4, 2))),
        Attribute("workclass", ("private", "self-emp", "gov", "none"),
                  ((7, 1, 1, 2), (6, 2, 2, 1), (4, 3, 3, 1))),
        Attribute("education", ("hs", "some-college", "bachelors", "masters", "doctorate", "other"),
                  ((5, 4, 1, 0.3, 0.1, 3), (3, 3, 4, 1, 0.3, 1), (1, 1, 4, 4, 2, 0.5))),
        Attribute("marital", ("never-married", "married", "divorced", "widowed"),
                  ((6, 2, 1, 0.3), (2, 6, 2, 0.5), (1, 7, 1, 1))),
        Attribute("occupation", ("craft", "sales", "admin", "exec", "prof", "service"),
                  ((3, 3, 3, 0.5, 0.5, 5), (4, 3, 3, 2, 1, 2), (1, 2, 1, 5, 6, 0.5))),
        Attribute("sex", ("female", "male"), ((1, 1), (1, 2), (1, 3))),
        Attribute("hours", ("part-time", "full-time", "overtime"),
                  ((4, 5, 1), (1, 6, 2), (0.5, 4, 4))),
        Attribute("income", ("<=50k", ">50k"), ((9, 0.5), (4, 1), (1, 2))),
    ),
)

MUSHROOM_STYLE = FixtureSpec(
    name="mushroom-style",
    rows=2000,
    class_weights=(0.52, 0.48),
    attributes=(
        Attribute("cap-shape", ("convex", "flat", "other"), ((8, 2, 1), (6, 4, 1))),
        Attribute("gill-attachment", ("free", "attached"), ((40, 1), (30, 1))),
        Attribute("gill-spacing", ("close", "crowded"), ((9, 1), (6, 2))),
        Attribute("veil-color", ("white", "other"), ((50, 1), (40, 1))),
        Attribute("ring-number", ("one", "two"), ((20, 1), (10, 1))),
        Attribute("stalk-shape", ("tapering", "enlarging"), ((4, 1), (1, 1))),
        Attribute("bruises", ("no", "yes"), ((6, 1), (2, 3))),
        Attribute("odor", ("none", "foul", "other"), ((9, 0.2, 1), (2, 5, 1))),
        Attribute("habitat", ("woods", "grasses", "other"), ((5, 3, 1), (4, 3, 2))),
        Attribute("class", ("edible", "poisonous"), ((9, 1), (1, 9))),
    ),
)

FIXTURES = {spec.name: spec for spec in (ADULT_STYLE, MUSHROOM_STYLE)}


def _spec(name: str) -> FixtureSpec:
    try:
        return FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURES)}") from None


def generate_fixture(name: str, seed: int = FIXTURE_SEED) -> TransactionMatrix:
    """One-hot transaction matrix for the named fixture; deterministic in ``seed``."""
    spec = _spec(name)
    rng = np.random.default_rng(seed)
    cw = np.asarray(spec.class_weights, dtype=float)
    latent = rng.choice(len(cw), size=spec.rows, p=cw / cw.sum())
    features: list[str] = []
    columns: list[np.ndarray] = []
    for attr in spec.attributes:
        w = np.asarray(attr.weights, dtype=float)
        probs = w / w.sum(axis=1, keepdims=True)
        # inverse-CDF draw per record from its class's level distribution
        cdf = np.cumsum(probs, axis=1)[latent]
        u = rng.random(spec.rows)[:, None]
        level = np.minimum((u > cdf).sum(axis=1), len(attr.levels) - 1)
        for j, lev in enumerate(attr.levels):
            features.append(f"{attr.name}={lev}")
            columns.append((level == j).astype(np.uint8))
    return TransactionMatrix(tuple(features), np.column_stack(columns))


def fixture_text(name: str, seed: int = FIXTURE_SEED) -> str:
    m = generate_fixture(name, seed)
    lines = [",".join(m.features)]
    lines += [",".join(map(str, row)) for row in m.rows.tolist()]
    return "\n".join(lines) + "\n"


def fixture_path(name: str) -> Path:
    """Location of the shipped CSV for ``name``."""
    _spec(name)
    return Path(str(resources.files("imrca").joinpath(f"data/{name}.csv")))


def write_fixture(name: str, path: Path | str, seed: int = FIXTURE_SEED) -> None:
    Path(path).write_text(fixture_text(name, seed), encoding="utf-8")
