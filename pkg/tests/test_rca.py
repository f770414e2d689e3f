import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imrca.catalog import get_measure, list_measures
from imrca.rca import (
    COLUMNS,
    DEFAULT_GRID_VALUES,
    ProbeGrid,
    classify_measure,
    classify_unai,
    classify_unzr,
    expected_labels,
    marginals,
    overall_unai,
    overall_unzr,
    read_classification_csv,
    unzr_evidence,
    write_classification_csv,
    write_evidence,
)

DOUBLE_ZERO = (
    "contexts with two zero cells (e.g. f01 = f00 = 0) give a zero f11 rate, "
    "so the engine reports P; the published label disagrees with the formula"
)


def test_lift_row():
    r = classify_measure(get_measure("lift"))
    assert r.labels() == ("Y", "N", "Y", "Y", "N", "Y", "P", "P", "P", "P")
    assert r.inconclusive == []


@pytest.mark.parametrize(
    "mid, cell, label",
    [("lift", "f00", "N"), ("lift", "f11", "Y"), ("jaccard", "f00", "Y"), ("support", "f11", "Y")],
)
def test_unai_cells(mid, cell, label):
    assert classify_unai(get_measure(mid), cell) == label


@pytest.mark.parametrize("mid, cell, label", [("lift", "f11", "Y"), ("lift", "f00", "P"), ("lift", "f10", "P")])
def test_unzr_cells(mid, cell, label):
    assert classify_unzr(get_measure(mid), cell) == label


def test_confidence_zero_rate_cells():
    r = classify_measure(get_measure("confidence"))
    assert tuple(r.unzr[c] for c in ("f11", "f00", "f10", "f01")) == ("Y", "N", "Y", "N")
    assert r.unzr_overall == "N"


def test_collective_strength_fully_satisfies_both():
    assert set(classify_measure(get_measure("collective-strength")).labels()) == {"Y"}


@pytest.mark.xfail(strict=True, reason=DOUBLE_ZERO)
def test_reference_piatetsky_shapiro_all_y():
    assert set(classify_measure(get_measure("piatetsky-shapiro")).labels()) == {"Y"}


@pytest.mark.xfail(strict=True, reason=DOUBLE_ZERO)
def test_reference_novelty_f01_y():
    assert classify_unzr(get_measure("novelty"), "f01") == "Y"


@pytest.mark.xfail(strict=True, reason="the f11 rate of Goodman-Kruskal decays to 0 along every probed context")
def test_reference_goodman_kruskal_unai_f11_n():
    assert classify_unai(get_measure("goodman-kruskal"), "f11") == "N"


labels_y_n = st.lists(st.sampled_from("YN"), min_size=4, max_size=4)
labels_ypn = st.lists(st.sampled_from("YPN"), min_size=4, max_size=4)


@given(labels_y_n)
def test_overall_unai_rule(cells):
    assert (overall_unai(cells) == "Y") == all(c == "Y" for c in cells)


@given(labels_ypn)
def test_overall_unzr_rule(cells):
    got = overall_unzr(cells)
    if "N" in cells:
        assert got == "N"
    elif all(c == "Y" for c in cells):
        assert got == "Y"
    else:
        assert got == "P"


def test_catalog_rows_obey_aggregation(catalog_rows):
    assert len(catalog_rows) == 50
    for r in catalog_rows:
        lab = r.labels()
        assert lab[4] == overall_unai(lab[:4])
        assert lab[9] == overall_unzr(lab[5:9])


def test_marginal_keys(catalog_rows):
    counts = marginals(catalog_rows)
    assert counts["UNAI:Y"] + counts.get("UNAI:N", 0) == 50
    assert sum(counts.get(f"UNZR:{x}", 0) for x in "YPN") == 50


def test_rerun_is_identical(catalog_rows):
    again = [classify_measure(m) for m in list_measures()]
    assert [r.labels() for r in again] == [r.labels() for r in catalog_rows]
    for a, b in zip(again, catalog_rows):
        for key in a.evidence:
            assert a.evidence[key].digest() == b.evidence[key].digest()


def test_grid_validation():
    with pytest.raises(ValueError):
        ProbeGrid(values=())
    with pytest.raises(ValueError):
        ProbeGrid(values=(-1.0,))
    with pytest.raises(ValueError):
        ProbeGrid(point_feasibility="sometimes")
    with pytest.raises(ValueError):
        ProbeGrid(max_zero_cells=3)
    assert len(ProbeGrid().contexts("f11")["f10"]) == len(DEFAULT_GRID_VALUES) ** 3


def test_all_zero_contexts_are_never_feasible_for_zero_rate():
    ev = unzr_evidence(get_measure("lift"), "f00")
    ctx = ev.contexts
    all_zero = (ctx["f11"] == 0) & (ctx["f10"] == 0) & (ctx["f01"] == 0)
    assert not ev.feasible[all_zero].any()


@settings(max_examples=8, deadline=None)
@given(st.sets(st.sampled_from(DEFAULT_GRID_VALUES), min_size=2, max_size=5))
def test_more_contexts_never_turn_n_into_y(subset):
    small = ProbeGrid(values=tuple(subset))
    for m in list_measures():
        part = classify_measure(m, small)
        full = classify_measure(m, ProbeGrid())
        for (prop, cell), ev in part.evidence.items():
            if ev.label == "N" and ev.n_feasible > 0:
                assert full.evidence[(prop, cell)].label != "Y", (m.id, prop, cell)


def test_classification_csv_round_trip(tmp_path, catalog_rows):
    p = tmp_path / "t2.csv"
    write_classification_csv(catalog_rows, p)
    back = read_classification_csv(p)
    assert back == {r.measure: r.labels() for r in catalog_rows}
    assert p.read_text().splitlines()[0].split(",")[1:11] == list(COLUMNS)


def test_classification_csv_rejects_bad_labels(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("measure," + ",".join(COLUMNS) + "\nlift," + ",".join("Q" * 10) + "\n")
    with pytest.raises(ValueError, match="Y, P or N"):
        read_classification_csv(p)


def test_evidence_files(tmp_path, by_measure):
    written = write_evidence([by_measure["lift"]], tmp_path / "ev")
    assert len(written) == 8
    rows = (tmp_path / "ev" / "lift.UNZR.f00.csv").read_text().splitlines()
    assert rows[0].startswith("f11,f10,f01,feasible,verdict,limit,d@0.01")
    assert len(rows) == 1 + len(DEFAULT_GRID_VALUES) ** 3


def test_expected_labels_transcription():
    exp = expected_labels()
    assert len(exp) == 50
    assert exp["lift"] == ("Y", "N", "Y", "Y", "N", "Y", "P", "P", "P", "P")
    for lab in exp.values():
        assert lab[4] == overall_unai(lab[:4])
