import pytest

from cuberoutes.generators import theta, torus, torus_vertex
from cuberoutes.routes import make_route


@pytest.fixture(scope="session")
def theta_route():
    """THETA route p -a- q -b- p through the circles {a,c} and {b,c}."""
    X = theta()
    return make_route(X, [0, 1, 0], [{(0, 0), (0, 1), (1, 0)}, {(0, 0), (0, 1), (1, 1)}])


@pytest.fixture(scope="session")
def torus_square_route():
    """Length-4 route around a 2x2 square in TORUS(6,6); the last piece runs the long way."""
    X = torus(6, 6)
    t = lambda i, j: torus_vertex(6, 6, i, j)
    seg = lambda pts: X.induced_cells([t(*p) for p in pts])
    pieces = [
        seg([(i, 0) for i in range(3)]),
        seg([(2, j) for j in range(3)]),
        seg([(i, 2) for i in range(3)]),
        seg([(0, j) for j in range(2, 7)]),
    ]
    return make_route(X, [t(0, 0), t(2, 0), t(2, 2), t(0, 2), t(0, 0)], pieces)


def pytest_terminal_summary(terminalreporter):
    """One verdict line per acceptance criterion."""
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nid or rep.when not in ("call", "setup"):
                continue
            num = int(nid.split("test_criterion_")[1].split("_")[0])
            ok = outcome == "passed"
            rows[num] = rows.get(num, True) and ok
    if rows:
        terminalreporter.section("acceptance criteria")
        for num in sorted(rows):
            terminalreporter.write_line(f"criterion {num}: {'PASS' if rows[num] else 'FAIL'}")
