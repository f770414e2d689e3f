import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imrca.catalog import list_measures
from imrca.cluster import (
    ClusterAssignment,
    adjusted_rand_index,
    assignment_from_blocks,
    cluster,
    parse_clusters,
    property_crosstab,
    published_partitions,
    rand_index,
    rank_desc,
    rank_rules,
    rank_values,
    read_crosstab_csv,
    read_rho_csv,
    rho_csv_text,
    crosstab_csv_text,
    spearman,
    spearman_matrix,
)
from imrca.rca import COLUMNS, expected_labels
from imrca.synth import generate


def test_rank_examples():
    assert rank_desc([3.2, 1.0, 1.0]).tolist() == [1.0, 2.5, 2.5]
    assert rank_desc([1.0, 2.0, 3.0, 4.0]).tolist() == [4.0, 3.0, 2.0, 1.0]
    r = rank_desc([5.0, math.nan, 1.0])
    assert r[0] == 1 and math.isnan(r[1]) and r[2] == 2
    assert rank_desc([math.inf, 1.0, -math.inf]).tolist() == [1.0, 2.0, 3.0]


def test_spearman_examples():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    assert spearman(a, a) == 1.0
    assert spearman(a, -a) == -1.0
    # ranks (1,2,3) vs (1,3,2): 1 - 6*2/24
    assert spearman(np.array([3.0, 2.0, 1.0]), np.array([3.0, 1.0, 2.0])) == pytest.approx(0.5)


def test_spearman_missing_when_overlap_small():
    a = np.array([1.0, 2.0, math.nan, math.nan])
    b = np.array([1.0, 2.0, 3.0, 4.0])
    assert math.isnan(spearman(a, b))
    assert math.isnan(spearman(np.ones(5), np.arange(5.0)))


def test_cluster_examples():
    rho = np.array([[1, 0.9, 0.1], [0.9, 1, 0.2], [0.1, 0.2, 1]])
    ca = cluster(rho, ["m1", "m2", "m3"])
    assert ca.clusters == (("A", ("m1", "m2")), ("B", ("m3",)))
    assert len(cluster(np.full((3, 3), 0.95), ["a", "b", "c"]).clusters) == 1
    assert len(cluster(np.eye(4), list("abcd")).clusters) == 4


def test_missing_rho_is_below_threshold():
    rho = np.array([[1, math.nan], [math.nan, 1]])
    assert len(cluster(rho, ["a", "b"]).clusters) == 2


def test_cluster_validation():
    with pytest.raises(ValueError):
        cluster(np.eye(2), ["a", "b"], threshold=1.0)
    with pytest.raises(ValueError):
        cluster(np.eye(2), ["a"])


def test_labels_by_size_then_name():
    ca = assignment_from_blocks([["z"], ["c", "d"], ["a"]])
    assert ca.clusters == (("A", ("c", "d")), ("B", ("a",)), ("C", ("z",)))
    assert ca.label_of("z") == "C"


value_rows = st.lists(
    st.lists(st.integers(-100, 100).map(float), min_size=6, max_size=6),
    min_size=3, max_size=6,
)


@given(value_rows)
def test_spearman_matrix_symmetric_unit_diagonal(rows):
    rho = spearman_matrix(rank_values([f"m{i}" for i in range(len(rows))], np.array(rows)))
    assert np.array_equal(np.nan_to_num(rho, nan=9), np.nan_to_num(rho.T, nan=9))
    assert (np.diag(rho) == 1).all()
    finite = rho[~np.isnan(rho)]
    assert ((finite >= -1) & (finite <= 1)).all()


@given(value_rows)
def test_monotone_transform_keeps_partition(rows):
    ids = [f"m{i}" for i in range(len(rows))]
    values = np.array(rows)
    base = cluster(spearman_matrix(rank_values(ids, values)), ids)
    warped = np.exp(values / 25.0)
    assert cluster(spearman_matrix(rank_values(ids, warped)), ids) == base


@settings(max_examples=25)
@given(value_rows, st.randoms())
def test_input_order_does_not_matter(rows, rnd):
    ids = [f"m{i}" for i in range(len(rows))]
    perm = list(range(len(rows)))
    rnd.shuffle(perm)
    values = np.array(rows)
    a = cluster(spearman_matrix(rank_values(ids, values)), ids)
    b = cluster(spearman_matrix(rank_values([ids[i] for i in perm], values[perm])), [ids[i] for i in perm])
    assert a.membership() == b.membership()


def test_pairwise_exclusion_matches_direct_spearman():
    vals = np.array([[1.0, 2.0, 3.0, math.nan, 5.0], [2.0, 1.0, 4.0, 3.0, 5.0], [5.0, 4.0, 3.0, 2.0, 1.0]])
    rm = rank_values(["a", "b", "c"], vals)
    rho = spearman_matrix(rm)
    assert rho[0, 1] == pytest.approx(spearman(vals[0], vals[1]))
    assert rho[1, 2] == pytest.approx(spearman(vals[1], vals[2]))


def test_rank_matrix_invariant():
    rm = rank_rules(generate("dense")[:200], list_measures())
    for row, ok in zip(rm.ranks, rm.defined):
        n = ok.sum()
        assert np.isnan(row[~ok]).all()
        assert ((row[ok] >= 1) & (row[ok] <= n)).all()
        assert row[ok].sum() == pytest.approx(n * (n + 1) / 2)


def _published_assignment(key):
    blocks = {}
    for m, lab in published_partitions()[key].items():
        blocks.setdefault(lab, []).append(m)
    return ClusterAssignment(tuple(sorted((lab, tuple(b)) for lab, b in blocks.items())))


@pytest.mark.parametrize(
    "key, column, row",
    [
        ("sparse-synthetic", "UNZR_f11", ("A", 21, 0, 4, 17)),
        ("adult", "UNZR_f11", ("A", 36, 2, 12, 22)),
        ("dense-synthetic", "UNZR_f00", ("A", 24, 3, 15, 6)),
    ],
)
def test_crosstab_of_published_partitions(key, column, row):
    j = COLUMNS.index(column)
    labels = {m: lab[j] for m, lab in expected_labels().items()}
    ct = property_crosstab(_published_assignment(key), labels)
    assert ct[0] == row
    assert all(r[1] == r[2] + r[3] + r[4] for r in ct)


def test_crosstab_requires_labels():
    with pytest.raises(KeyError):
        property_crosstab(ClusterAssignment((("A", ("x",)),)), {})


def test_published_partitions_cover_catalog():
    ids = {m.id for m in list_measures()}
    pub = published_partitions()
    assert set(pub) == {"sparse-synthetic", "adult", "dense-synthetic", "mushroom"}
    for part in pub.values():
        assert set(part) == ids


def test_rand_index():
    a = {"x": "A", "y": "A", "z": "B"}
    assert rand_index(a, a) == 1.0
    assert adjusted_rand_index(a, a) == 1.0
    b = {"x": "A", "y": "B", "z": "B"}
    assert rand_index(a, b) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        rand_index({"x": "A"}, {"x": "A"})


@given(st.lists(st.sampled_from("ABC"), min_size=2, max_size=12), st.lists(st.sampled_from("PQ"), min_size=12, max_size=12))
def test_rand_index_bounds_and_symmetry(la, lb):
    a = {str(i): x for i, x in enumerate(la)}
    b = {str(i): lb[i] for i in range(len(la))}
    assert 0.0 <= rand_index(a, b) <= 1.0
    assert rand_index(a, b) == rand_index(b, a)


def test_io_round_trips(tmp_path):
    rho = np.array([[1.0, 0.123456789012345], [0.123456789012345, 1.0]])
    rho[0, 1] = rho[1, 0] = math.nan
    p = tmp_path / "rho.csv"
    p.write_text(rho_csv_text(rho, ["a", "b"]))
    names, back = read_rho_csv(p)
    assert names == ["a", "b"] and np.array_equal(np.isnan(back), np.isnan(rho))
    ca = assignment_from_blocks([["a", "b"], ["c"]])
    assert parse_clusters(ca.to_text()) == ca
    rows = [("A", 2, 0, 1, 1), ("B", 1, 1, 0, 0)]
    q = tmp_path / "ct.csv"
    q.write_text(crosstab_csv_text(rows))
    assert read_crosstab_csv(q) == rows
