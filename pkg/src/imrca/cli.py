"""Command-line entry point: ``imrca <subcommand> ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from . import classic, cluster, fixtures, miner, rca, synth
from .calculus import Tolerances, limit_at_infinity, limit_at_zero, symbolic_derivative
from .catalog import catalog_lines, evaluate, get_measure, list_measures
from .expr import to_text
from .report import csv_text, fmt, manifest_text, replace_dir, write_text
from .tables import CELLS, parse_table, read_tables_csv, write_tables_csv

EXPERIMENTS = {
    # name: (published partition key, default label column, rule filter)
    "sparse": ("sparse-synthetic", "UNZR_f11", None),
    "dense": ("dense-synthetic", "UNZR_f00", None),
    "adult": ("adult", "UNZR_f11", miner.filter_sparse),
    "mushroom": ("mushroom", "UNZR_f00", miner.filter_dense),
}
FIXTURE_FOR = {"adult": "adult-style", "mushroom": "mushroom-style"}


class CliError(Exception):
    pass


# --- helpers ---------------------------------------------------------------


def _measures(spec: str) -> list:
    if spec == "all":
        return list_measures()
    return [get_measure(s.strip()) for s in spec.split(",") if s.strip()]


def _floats(text: str, n: int, what: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise CliError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise CliError(f"{what}: not a number in {text!r}") from None


def _grid(args: argparse.Namespace) -> rca.ProbeGrid:
    opts: dict = {}
    if getattr(args, "grid", None):
        try:
            opts = json.loads(Path(args.grid).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.grid}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        if not isinstance(opts, dict):
            raise CliError(f"{args.grid}: expected a JSON object")
    tol = dict(opts.pop("tolerances", {}))
    for item in getattr(args, "tol", None) or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise CliError(f"--tol expects KEY=VALUE, got {item!r}")
        tol[key] = val
    names = {f.name: f.type for f in dataclasses.fields(Tolerances)}
    unknown = sorted(set(tol) - set(names))
    if unknown:
        raise CliError(f"unknown tolerance(s) {unknown}; known: {', '.join(names)}")
    tolerances = Tolerances(**{k: (int(v) if k == "tail" else float(v)) for k, v in tol.items()})
    allowed = {"values", "infinity_ladder", "zero_ladder", "point_feasibility", "max_zero_cells"}
    unknown = sorted(set(opts) - allowed)
    if unknown:
        raise CliError(f"unknown grid key(s) {unknown}; known: {', '.join(sorted(allowed))}")
    for key in ("values", "infinity_ladder", "zero_ladder"):
        if key in opts:
            opts[key] = tuple(float(v) for v in opts[key])
    return rca.ProbeGrid(tolerances=tolerances, **opts)


def _grid_config(grid: rca.ProbeGrid) -> dict:
    return {
        "grid_values": list(grid.values),
        "infinity_ladder": list(grid.infinity_ladder),
        "zero_ladder": list(grid.zero_ladder),
        "point_feasibility": grid.point_feasibility,
        "max_zero_cells": grid.max_zero_cells,
        "tolerances": dataclasses.asdict(grid.tolerances),
    }


def _emit(text: str, out: str | None) -> list[Path]:
    if out:
        return [write_text(out, text)]
    sys.stdout.write(text)
    return []


def _manifest_for_file(command: str, config: dict, outputs: list[Path]) -> None:
    if outputs:
        primary = outputs[0]
        write_text(primary.with_name(primary.name + ".manifest.json"), manifest_text(command, config, outputs, primary.parent))


def _labels_for(args: argparse.Namespace, grid: rca.ProbeGrid | None = None) -> dict[str, tuple[str, ...]]:
    if getattr(args, "classification", None):
        return rca.read_classification_csv(args.classification)
    return {r.measure: r.labels() for r in rca.classify_catalog(grid or rca.ProbeGrid())}


# --- subcommands -----------------------------------------------------------


def cmd_list_measures(args) -> int:
    outputs = _emit("".join(line + "\n" for line in catalog_lines()), args.out)
    _manifest_for_file("list-measures", {}, outputs)
    return 0


def cmd_eval(args) -> int:
    ms = _measures(args.measure)
    if bool(args.table) == bool(args.tables):
        raise CliError("give exactly one of --table or --tables")
    tables = [parse_table(args.table)] if args.table else read_tables_csv(args.tables)
    if len(ms) == 1 and len(tables) == 1 and not args.out:
        print(fmt(evaluate(ms[0], tables[0])))
        return 0
    rows = [[*t.as_tuple(), *(evaluate(m, t) for m in ms)] for t in tables]
    outputs = _emit(csv_text([*CELLS, *(m.id for m in ms)], rows), args.out)
    _manifest_for_file("eval", {"measure": args.measure, "table": args.table, "tables": args.tables}, outputs)
    return 0


def cmd_derive(args) -> int:
    m = get_measure(args.measure)
    if args.cell not in CELLS:
        raise CliError(f"--cell must be one of {', '.join(CELLS)}")
    if m.smooth:
        print(f"d {m.id} / d {args.cell} = {to_text(symbolic_derivative(m.expr, args.cell))}")
    else:
        print(f"d {m.id} / d {args.cell}: non-smooth measure, derivative by finite differences")
    if not args.context:
        return 0
    others = [c for c in CELLS if c != args.cell]
    context = dict(zip(others, _floats(args.context, 3, "--context")))
    rows = []
    for side, est in (("infinity", limit_at_infinity(m, args.cell, context)), ("zero", limit_at_zero(m, args.cell, context))):
        rows += [[side, x, d, ""] for x, d in est.evidence]
        rows.append([side, "limit", est.value, est.verdict])
    outputs = _emit(csv_text(["approach", "point", "derivative", "verdict"], rows), args.out)
    _manifest_for_file("derive", {"measure": m.id, "cell": args.cell, "context": context}, outputs)
    return 0


def cmd_classify(args) -> int:
    grid = _grid(args)
    ms = _measures(args.measure)
    rows = rca.classify_catalog(grid, ms)
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp_csv = Path(tmp) / "table.csv"
        rca.write_classification_csv(rows, tmp_csv)
        outputs.append(write_text(args.out, tmp_csv.read_text(encoding="utf-8")))
    if args.evidence:
        dest = Path(args.evidence)
        dest.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=f".{dest.name}.", dir=dest.parent))
        written = rca.write_evidence(rows, staging, fmt=fmt)
        replace_dir(staging, dest)
        outputs += [dest / p.name for p in written]
    config = {"measure": args.measure, **_grid_config(grid)}
    primary = Path(args.out)
    write_text(primary.with_name(primary.name + ".manifest.json"), manifest_text("classify", config, outputs, primary.parent))
    for r in rows:
        for prop, cell in r.inconclusive:
            print(f"warning: {r.measure} {prop}_{cell} inconclusive: {r.evidence[(prop, cell)].digest()}", file=sys.stderr)
    return 0


def cmd_crosstab(args) -> int:
    labels = _labels_for(args)
    reports = [classic.report(m, args.seed) for m in list_measures()]
    missing = [r.measure for r in reports if r.measure not in labels]
    if missing:
        raise CliError(f"classification lacks measures {missing}")
    rca_rows = [
        rca.RcaClassification(mid, dict(zip(rca.LABEL_CELLS, lab[:4])), dict(zip(rca.LABEL_CELLS, lab[5:9])))
        for mid, lab in labels.items()
    ]
    table = [row for p in classic.PROPERTIES for row in classic.crosstab(reports, rca_rows, p).rows()]
    outputs = [write_text(args.out, csv_text(classic.CROSSTAB_HEADER, table))]
    if args.verdicts:
        vrows = []
        for rep in reports:
            notes = "; ".join(f"{p}: {c.note}" for p, c in rep.counterexamples.items())
            vrows.append([rep.measure, *(rep.verdicts[p] for p in classic.PROPERTIES), notes])
        outputs.append(write_text(args.verdicts, csv_text(["measure", *classic.PROPERTIES, "counterexamples"], vrows)))
    _manifest_for_file("crosstab", {"seed": args.seed, "classification": args.classification}, outputs)
    return 0


def cmd_synth(args) -> int:
    tables = synth.generate(args.preset)
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "t.csv"
        write_tables_csv(tables, p)
        outputs = [write_text(args.out, p.read_text(encoding="utf-8"))]
    _manifest_for_file("synth", {"preset": args.preset}, outputs)
    return 0


def _rules_text(rules: Sequence[miner.Rule]) -> str:
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "r.csv"
        miner.write_rules_csv(rules, p)
        return p.read_text(encoding="utf-8")


def _mine(path: str, min_support: float, keep_empty: bool, which: str) -> list[miner.Rule]:
    rules = miner.mine_rules(miner.load_transactions(path), min_support, keep_empty)
    if which == "sparse":
        rules = miner.filter_sparse(rules)
    elif which == "dense":
        rules = miner.filter_dense(rules)
    return rules


def cmd_mine(args) -> int:
    rules = _mine(args.input, args.min_support, args.keep_empty, args.filter)
    outputs = [write_text(args.out, _rules_text(rules))]
    _manifest_for_file("mine", {"input": Path(args.input).name, "min_support": args.min_support,
                                "keep_empty": args.keep_empty, "filter": args.filter}, outputs)
    print(f"{len(rules)} rules", file=sys.stderr)
    return 0


def cmd_rank(args) -> int:
    rules = miner.read_rules_csv(args.rules)
    ms = _measures(args.measure)
    rm = cluster.rank_rules([r.table for r in rules], ms)
    rows = [
        [r.antecedent, r.consequent, *("" if np.isnan(x) else float(x) for x in rm.ranks[:, i])]
        for i, r in enumerate(rules)
    ]
    outputs = [write_text(args.out, csv_text(["antecedent", "consequent", *rm.measures], rows))]
    _manifest_for_file("rank", {"rules": Path(args.rules).name, "measure": args.measure}, outputs)
    return 0


def _cluster_outputs(out_dir: Path, tables, labels, column: str, threshold: float, compare: str | None) -> tuple[list[Path], dict]:
    ms = list_measures()
    ids = [m.id for m in ms]
    rm = cluster.rank_rules(tables, ms)
    rho = cluster.spearman_matrix(rm)
    ca = cluster.cluster(rho, ids, threshold)
    if column not in rca.COLUMNS:
        raise CliError(f"--column must be one of {', '.join(rca.COLUMNS)}")
    j = rca.COLUMNS.index(column)
    ct = cluster.property_crosstab(ca, {m: labels[m][j] for m in ids})
    outputs = [
        write_text(out_dir / "rho.csv", cluster.rho_csv_text(rho, ids)),
        write_text(out_dir / "clusters.txt", ca.to_text()),
        write_text(out_dir / "crosstab.csv", cluster.crosstab_csv_text(ct)),
    ]
    lift = next(row for row in ct if "lift" in ca.as_dict()[row[0]])
    summary = {
        "rules": len(tables),
        "clusters": len(ca.clusters),
        "fully_masked": " ".join(rm.fully_masked),
        "lift_cluster": lift[0],
        "lift_cluster_size": lift[1],
        "lift_cluster_N": lift[2],
        "lift_cluster_YP_fraction": (lift[3] + lift[4]) / lift[1],
        "largest_cluster_YP_fraction": (ct[0][3] + ct[0][4]) / ct[0][1],
        "largest_cluster_N_fraction": ct[0][2] / ct[0][1],
    }
    if compare:
        pub = cluster.published_partitions()
        if compare not in pub:
            raise CliError(f"unknown published partition {compare!r}; known: {', '.join(pub)}")
        summary["rand_index"] = cluster.rand_index(ca.membership(), pub[compare])
        summary["adjusted_rand_index"] = cluster.adjusted_rand_index(ca.membership(), pub[compare])
    summary_rows = [[k, fmt(v) if isinstance(v, float) else v] for k, v in summary.items()]
    outputs.append(write_text(out_dir / "summary.csv", csv_text(["key", "value"], summary_rows)))
    return outputs, summary


def cmd_cluster(args) -> int:
    out_dir = Path(args.out_dir)
    tables = [r.table for r in miner.read_rules_csv(args.rules)]
    labels = _labels_for(args)
    outputs, summary = _cluster_outputs(out_dir, tables, labels, args.column, args.threshold, args.compare)
    config = {"rules": Path(args.rules).name, "classification": args.classification, "column": args.column,
              "threshold": args.threshold, "compare": args.compare}
    write_text(out_dir / "manifest.json", manifest_text("cluster", config, outputs, out_dir))
    for k, v in summary.items():
        print(f"{k}: {fmt(v) if isinstance(v, float) else v}")
    return 0


def cmd_curve(args) -> int:
    m = get_measure(args.measure)
    if args.vary not in CELLS:
        raise CliError(f"--vary must be one of {', '.join(CELLS)}")
    others = [c for c in CELLS if c != args.vary]
    fixed = dict(zip(others, _floats(args.fixed, 3, "--fixed")))
    lo_s, sep, hi_s = args.range.partition(":")
    try:
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise CliError(f"--range expects LO:HI, got {args.range!r}") from None
    if not sep or not 0 <= lo < hi:
        raise CliError(f"--range needs 0 <= LO < HI, got {args.range!r}")
    if args.points < 2:
        raise CliError("--points must be at least 2")
    scale = args.scale or ("log" if lo > 0 else "linear")
    if scale == "log" and lo <= 0:
        raise CliError("log spacing needs LO > 0")
    xs = np.geomspace(lo, hi, args.points) if scale == "log" else np.linspace(lo, hi, args.points)
    cols = {**{k: np.full(xs.shape, v) for k, v in fixed.items()}, args.vary: xs}
    ys = m.values(*(cols[c] for c in CELLS))
    rows = [[float(x), float(y)] for x, y in zip(xs, np.broadcast_to(ys, xs.shape))]
    outputs = _emit(csv_text([args.vary, m.id], rows), args.out)
    _manifest_for_file("curve", {"measure": m.id, "vary": args.vary, "fixed": fixed, "range": [lo, hi],
                                 "points": args.points, "scale": scale}, outputs)
    return 0


def cmd_reproduce(args) -> int:
    published, default_column, rule_filter = EXPERIMENTS[args.experiment]
    column = args.column or default_column
    out_dir = Path(args.out_dir)
    grid = _grid(args)
    outputs: list[Path] = []
    config: dict = {"experiment": args.experiment, "column": column, "threshold": args.threshold}
    if rule_filter is None:
        tables = synth.generate(args.experiment)
        with tempfile.TemporaryDirectory() as tmp:
            p = Path(tmp) / "t.csv"
            write_tables_csv(tables, p)
            outputs.append(write_text(out_dir / "tables.csv", p.read_text(encoding="utf-8")))
    else:
        source = Path(args.input) if args.input else fixtures.fixture_path(FIXTURE_FOR[args.experiment])
        rules = rule_filter(miner.mine_rules(miner.load_transactions(source)))
        if len(rules) < 2:
            raise CliError(f"{source}: only {len(rules)} rule(s) survive the filter; need at least 2")
        tables = [r.table for r in rules]
        outputs.append(write_text(out_dir / "rules.csv", _rules_text(rules)))
        config["input"] = source.name
    rows = rca.classify_catalog(grid)
    labels = {r.measure: r.labels() for r in rows}
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "c.csv"
        rca.write_classification_csv(rows, p)
        outputs.append(write_text(out_dir / "classification.csv", p.read_text(encoding="utf-8")))
    more, summary = _cluster_outputs(out_dir, tables, labels, column, args.threshold, published)
    outputs += more
    config.update(_grid_config(grid))
    write_text(out_dir / "manifest.json", manifest_text(f"reproduce {args.experiment}", config, outputs, out_dir))
    for k, v in summary.items():
        print(f"{k}: {fmt(v) if isinstance(v, float) else v}")
    return 0


# --- parser ----------------------------------------------------------------


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", help="JSON file overriding probe-grid settings")
    p.add_argument("--tol", action="append", metavar="KEY=VALUE", help="tolerance override (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="imrca", description="Rate-of-change analysis of association-rule interestingness measures.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list-measures", help="print the measure catalog")
    p.add_argument("--out")
    p.set_defaults(func=cmd_list_measures)

    p = sub.add_parser("eval", help="evaluate measures on tables")
    p.add_argument("--measure", required=True, help="id, comma list, or 'all'")
    p.add_argument("--table", help="f11,f10,f01,f00")
    p.add_argument("--tables", help="CSV with f11,f10,f01,f00 columns")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("derive", help="symbolic derivative and limit evidence")
    p.add_argument("--measure", required=True)
    p.add_argument("--cell", required=True)
    p.add_argument("--context", help="values of the other three cells, in f11,f10,f01,f00 order")
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("classify", help="UNAI/UNZR labels for the catalog")
    p.add_argument("--out", required=True)
    p.add_argument("--evidence", help="directory for per-cell evidence CSVs")
    p.add_argument("--measure", default="all")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("crosstab", help="classic properties against UNAI/UNZR")
    p.add_argument("--out", required=True)
    p.add_argument("--verdicts", help="per-measure classic verdicts CSV")
    p.add_argument("--classification", help="classification CSV to reuse")
    p.add_argument("--seed", type=int, default=classic.DEFAULT_SEED)
    p.set_defaults(func=cmd_crosstab)

    p = sub.add_parser("synth", help="synthetic contingency tables")
    p.add_argument("--preset", required=True, choices=sorted(synth.PRESETS))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mine", help="one-to-one rules from a binarized CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-support", type=float, default=0.0)
    p.add_argument("--keep-empty", action="store_true", help="also keep pairs that never co-occur")
    p.add_argument("--filter", choices=("none", "sparse", "dense"), default="none")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("rank", help="rank rules under every measure")
    p.add_argument("--rules", required=True, help="rules CSV or plain table CSV")
    p.add_argument("--measure", default="all")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("cluster", help="correlate rankings and cluster measures")
    p.add_argument("--rules", required=True)
    p.add_argument("--classification", help="classification CSV (computed when absent)")
    p.add_argument("--column", default="UNZR_f11")
    p.add_argument("--threshold", type=float, default=cluster.DEFAULT_THRESHOLD)
    p.add_argument("--compare", help="published partition to score against")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("curve", help="measure values while one cell varies")
    p.add_argument("--measure", required=True)
    p.add_argument("--vary", required=True)
    p.add_argument("--fixed", required=True, help="other three cells, in f11,f10,f01,f00 order")
    p.add_argument("--range", required=True, metavar="LO:HI")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--scale", choices=("log", "linear"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("reproduce", help="end-to-end clustering experiment")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threshold", type=float, default=cluster.DEFAULT_THRESHOLD)
    p.add_argument("--column", help="label column for the cross-tab")
    p.add_argument("--input", help="binarized CSV replacing the shipped fixture (adult, mushroom)")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_reproduce)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"imrca {args.command}: error: {msg}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
