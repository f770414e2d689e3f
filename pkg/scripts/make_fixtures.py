"""Regenerate the shipped Adult-style and Mushroom-style fixture CSVs."""

import argparse
from pathlib import Path

from imrca.fixtures import FIXTURE_SEED, FIXTURES, write_fixture


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "src/imrca/data")
    ap.add_argument("--seed", type=int, default=FIXTURE_SEED)
    args = ap.parse_args()
    for name in FIXTURES:
        path = args.out / f"{name}.csv"
        write_fixture(name, path, args.seed)
        print(path)


if __name__ == "__main__":
    main()
