"""Acceptance gate: one test per criterion, each reporting PASS or FAIL.

Thresholds are the contract values; nothing here is relaxed to make a
criterion pass.  Failing criteria are expected failures of the method on
the published data and are analysed in the project notes.
"""

import csv
import time
from fractions import Fraction

import numpy as np
import pytest

from imrca import classic
from imrca.calculus import finite_difference_values, symbolic_derivative
from imrca.catalog import get_measure, list_measures
from imrca.cli import run
from imrca.cluster import parse_clusters, read_crosstab_csv
from imrca.expr import evaluate
from imrca.fixtures import fixture_path
from imrca.miner import load_transactions, mine_rules
from imrca.rca import COLUMNS, classify_catalog, classify_measure, expected_labels
from imrca.synth import generate
from imrca.tables import CELLS

SPARSE_VALUES = {
    "f11": {0, 1, 10, 11},
    "f00": {1000, 5000, 10000, 25000, 50000, 75000, 100000},
    "f10": {10, 100, 250, 500, 600, 800, 1000},
    "f01": {10, 100, 250, 500, 600, 800, 1000},
}


def report(record_property, n, ok, detail):
    record_property("criterion", n)
    record_property("detail", detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def summary(out_dir):
    with open(out_dir / "summary.csv", newline="") as fh:
        return {row["key"]: row["value"] for row in csv.DictReader(fh)}


def reproduce(capsys, name, out_dir, *extra):
    start = time.perf_counter()
    code = run(["reproduce", name, "--out-dir", str(out_dir), *extra])
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    assert code == 0
    return elapsed


@pytest.fixture(scope="module")
def timed_catalog():
    start = time.perf_counter()
    rows = classify_catalog()
    return rows, time.perf_counter() - start


def test_criterion_1_published_labels(record_property, timed_catalog):
    rows, elapsed = timed_catalog
    want = expected_labels()
    cells = full = 0
    notes = []
    for r in rows:
        got, exp = r.labels(), want[r.measure]
        hits = sum(a == b for a, b in zip(got, exp))
        cells += hits
        full += hits == len(COLUMNS)
        for j, (a, b) in enumerate(zip(got, exp)):
            if a == b:
                continue
            prop, _, cell = COLUMNS[j].partition("_")
            ev = r.evidence.get((prop, cell))
            digest = ev.digest() if ev is not None else "overall label"
            notes.append(f"{r.measure} {COLUMNS[j]}: got {a} want {b}; {digest}; "
                         f"formula {get_measure(r.measure).body_text} ({get_measure(r.measure).source})")
    print("\n".join(notes))
    ok = cells >= 480 and full >= 46 and elapsed < 300
    report(record_property, 1, ok,
           f"cells {cells}/500 (need 480), rows {full}/50 (need 46), {len(notes)} mismatches listed, {elapsed:.1f}s")


def lift_df11(f11, f10, f01, f00):
    f11, f10, f01, f00 = map(Fraction, (f11, f10, f01, f00))
    num = 2 * f10 * f11 * f01 + f10 * f01 * (f10 + f00 + f01) - f11**2 * f00
    return num / ((f10 + f11) ** 2 * (f01 + f11) ** 2)


def test_criterion_2_lift_oracle(record_property):
    lift = get_measure("lift")
    rng = np.random.default_rng(2)
    pts = rng.uniform(1.0, 1e4, size=(1000, 4))
    sym = evaluate(symbolic_derivative(lift.expr, "f11"), dict(zip(CELLS, pts.T)))
    want = np.array([float(lift_df11(*p)) for p in pts])
    worst = float(np.max(np.abs(sym - want) / np.abs(want)))
    labels = classify_measure(lift).labels()
    unai, unzr = labels[:4], labels[5:9]
    overall = (labels[4], labels[9])
    ok = worst < 1e-9 and unai == tuple("YNYY") and unzr == tuple("YPPP") and overall == ("N", "P")
    report(record_property, 2, ok,
           f"max rel err {worst:.1e} over 1000 tables; UNAI {''.join(unai)} UNZR {''.join(unzr)} overall {'/'.join(overall)}")


def test_criterion_3_derivative_cross_check(record_property):
    rng = np.random.default_rng(3)
    total = failures = 0
    worst = []
    for m in list_measures():
        if not m.smooth:
            continue
        for cell in CELLS:
            pts = rng.uniform(1.0, 1000.0, size=(4, 200))
            env = dict(zip(CELLS, pts))
            sym = np.broadcast_to(evaluate(symbolic_derivative(m.expr, cell), env), (200,))
            ctx = {c: env[c] for c in CELLS if c != cell}
            num, _ = finite_difference_values(m, cell, ctx, env[cell])
            bad = ~(np.abs(sym - num) <= 1e-6 * np.abs(sym))
            total += 200
            failures += int(bad.sum())
            if bad.any():
                worst.append(f"{m.id}/{cell}:{int(bad.sum())}")
    print(" ".join(worst))
    rate = failures / total
    report(record_property, 3, rate < 1e-3, f"{failures}/{total} probe failures ({rate:.3%}, tolerance 0.1%)")


def test_criterion_4_marginals(record_property, timed_catalog):
    rows, _ = timed_catalog
    unai_y = sum(r.unai_overall == "Y" for r in rows)
    unzr_y = {r.measure for r in rows if r.unzr_overall == "Y"}
    f00_y = sum(r.unzr["f00"] == "Y" for r in rows)
    target = {"novelty", "piatetsky-shapiro", "collective-strength"}
    ok = unai_y == 37 and unzr_y == target and f00_y == 9
    report(record_property, 4, ok,
           f"UNAI overall Y {unai_y} (need 37); UNZR overall Y {sorted(unzr_y)}; UNZR_f00 Y {f00_y} (need 9)")


def test_criterion_5_synthetic_grids(record_property):
    sparse, dense = generate("sparse"), generate("dense")
    ok = len(sparse) == len(set(sparse)) == 1372 and len(dense) == len(set(dense)) == 1372
    for cell, vals in SPARSE_VALUES.items():
        ok &= {getattr(t, cell) for t in sparse} == vals
    swapped = {"f11": "f00", "f00": "f11", "f10": "f10", "f01": "f01"}
    for cell, vals in SPARSE_VALUES.items():
        ok &= {getattr(t, swapped[cell]) for t in dense} == vals
    report(record_property, 5, ok, f"sparse {len(set(sparse))} unique, dense {len(set(dense))} unique, value sets checked")


@pytest.fixture(scope="module")
def sparse_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sparse") / "run"
    start = time.perf_counter()
    assert run(["reproduce", "sparse", "--out-dir", str(out)]) == 0
    return out, time.perf_counter() - start


def test_criterion_6_sparse_experiment(record_property, sparse_run):
    out, elapsed = sparse_run
    s = summary(out)
    n, yp, rand = int(s["lift_cluster_N"]), float(s["lift_cluster_YP_fraction"]), float(s["rand_index"])
    ok = n == 0 and yp >= 0.75 and rand >= 0.80 and elapsed < 120
    report(record_property, 6, ok,
           f"Lift cluster {s['lift_cluster']} size {s['lift_cluster_size']}: N {n} (need 0), Y+P {yp:.3f} (need 0.75); "
           f"Rand {rand:.3f} (need 0.80), ARI {float(s['adjusted_rand_index']):.3f}; {elapsed:.0f}s")


def test_criterion_7_dense_experiment(record_property, tmp_path, capsys):
    reproduce(capsys, "dense", tmp_path)
    s = summary(tmp_path)
    ca = parse_clusters((tmp_path / "clusters.txt").read_text())
    ct = {row[0]: row for row in read_crosstab_csv(tmp_path / "crosstab.csv")}
    anchors = {ca.label_of(m) for m in ("recall", "lift")}
    anchor_yp = min((ct[c][3] + ct[c][4]) / ct[c][1] for c in anchors)
    smallest = min(row[1] for row in ct.values())
    small = [row for row in ct.values() if row[1] == smallest]
    small_n = sum(r[2] for r in small) / sum(r[1] for r in small)
    rand = float(s["rand_index"])
    ok = anchor_yp >= 0.85 and small_n >= 0.80 and rand >= 0.80
    report(record_property, 7, ok,
           f"Recall/Lift cluster(s) {sorted(anchors)} Y+P {anchor_yp:.3f} (need 0.85); "
           f"{len(small)} smallest clusters (size {smallest}) N {small_n:.3f} (need 0.80); Rand {rand:.3f} (need 0.80)")


def test_criterion_8_fixture_datasets(record_property, tmp_path, capsys):
    parts, ok = [], True
    for name, fixture in (("adult", "adult-style"), ("mushroom", "mushroom-style")):
        m = load_transactions(fixture_path(fixture))
        rules = mine_rules(m, keep_empty=True)
        intact = all(sum(r.table.as_tuple()) == m.n for r in rules)
        reproduce(capsys, name, tmp_path / name)
        s = summary(tmp_path / name)
        yp, nf = float(s["largest_cluster_YP_fraction"]), float(s["largest_cluster_N_fraction"])
        good = intact and yp >= 2 * nf
        ok &= good
        parts.append(f"{name}: {len(rules)} tables reconstruct N={m.n}: {intact}; {s['rules']} filtered rules; "
                     f"largest cluster Y+P {yp:.3f} vs N {nf:.3f}")
    report(record_property, 8, ok, "; ".join(parts))


def test_criterion_9_null_invariance_theorem(record_property, timed_catalog):
    rows, _ = timed_catalog
    by_id = {r.measure: r for r in rows}
    o4 = [m for m in list_measures() if classic.report(m).verdicts["O4"] == "Y"]
    exceptions = [m.id for m in o4 if by_id[m.id].unzr["f00"] != "N" or by_id[m.id].unzr_overall != "N"]
    report(record_property, 9, not exceptions,
           f"{len(o4)} null-invariant measures, exceptions: {exceptions or 'none'}")


def test_criterion_10_determinism(record_property, sparse_run):
    first, _ = sparse_run
    second = first.parent / "again"
    assert run(["reproduce", "sparse", "--out-dir", str(second)]) == 0
    names = sorted(p.name for p in first.iterdir())
    same = names == sorted(p.name for p in second.iterdir()) and all(
        (first / n).read_bytes() == (second / n).read_bytes() for n in names)
    report(record_property, 10, same, f"{len(names)} output files compared byte for byte")
