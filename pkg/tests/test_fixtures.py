import pytest

from imrca.fixtures import FIXTURES, fixture_path, fixture_text, generate_fixture
from imrca.miner import filter_dense, filter_sparse, load_transactions, mine_rules


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_shipped_csv_matches_generator(name):
    assert fixture_path(name).read_text(encoding="utf-8") == fixture_text(name)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_one_hot_structure(name):
    m = generate_fixture(name)
    spec = FIXTURES[name]
    assert m.n == spec.rows
    start = 0
    for attr in spec.attributes:
        block = m.rows[:, start:start + len(attr.levels)]
        assert (block.sum(axis=1) == 1).all()
        start += len(attr.levels)


def test_shapes_match_their_role():
    adult = mine_rules(load_transactions(fixture_path("adult-style")))
    mush = mine_rules(load_transactions(fixture_path("mushroom-style")))
    assert len(filter_sparse(adult)) > 0.8 * len(adult)
    assert len(filter_dense(mush)) >= 100


def test_seed_changes_data():
    assert fixture_text("adult-style", seed=1) != fixture_text("adult-style")


def test_unknown_fixture():
    with pytest.raises(ValueError, match="unknown fixture"):
        generate_fixture("iris")
