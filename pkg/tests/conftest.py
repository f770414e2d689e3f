import pytest
from hypothesis import strategies as st

from imrca.rca import classify_catalog
from imrca.tables import ContingencyTable

counts = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def tables(draw, cell=counts):
    vals = [draw(cell) for _ in range(4)]
    if sum(vals) <= 0:
        vals[0] = 1.0
    return ContingencyTable(*vals)


@st.composite
def interior_tables(draw):
    return ContingencyTable(*(draw(st.floats(min_value=1.0, max_value=1e4)) for _ in range(4)))


@pytest.fixture(scope="session")
def catalog_rows():
    return classify_catalog()


@pytest.fixture(scope="session")
def by_measure(catalog_rows):
    return {r.measure: r for r in catalog_rows}


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, in criterion order."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance.py::test_criterion_" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            lines.append((props.get("criterion", 0), "PASS" if outcome == "passed" else "FAIL", props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, status, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {n:>2}: {status}  {detail}")
