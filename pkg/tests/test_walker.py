import pytest

from cuberoutes import generators as gen
from cuberoutes.complex_core import PreconditionError
from cuberoutes.walker import (
    STAY, AmbiguousImitation, check_gammasquare, check_reversibility, end_vertex,
    entrapment_check, imitate, imitator_cover, trace_lines,
)

from oracles import all_loops


def _edge_between(X, a, b):
    return next(e for e in range(X.n_edges) if set(X.edge_corners(e)) == {a, b})


def _end(X, a, b):
    e = _edge_between(X, a, b)
    return (e, 0) if X.edge_corners(e)[0] == a else (e, 1)


def test_copy_inside_y():
    X = gen.torus(3, 3)
    row = X.closure([k for (ka, kb), k in X.factor_index.items() if kb == (0, 0)])
    path = [(k[1], 0) for (ka, kb), k in X.factor_index.items() if k[0] == 1 and kb == (0, 0)]
    path.sort(key=lambda e: X.edge_corners(e[0]))
    assert imitate(X, row, 0, path) == path


def test_segment_example():
    X = gen.segment(3)
    Y = X.closure({(1, 0)})
    ev = imitate(X, Y, 0, [(0, 0), (1, 0)])
    assert ev == [(0, 0), STAY]
    assert end_vertex(X, 0, ev) == 1


def test_square_example():
    X = gen.grid(1, 1)
    v = lambda i, j: gen.grid_vertex(1, 1, i, j)
    bottom = X.closure({(1, _edge_between(X, v(0, 0), v(1, 0)))})
    up = _end(X, v(0, 0), v(0, 1))
    right = _end(X, v(0, 1), v(1, 1))
    down = _end(X, v(1, 1), v(1, 0))
    ev = imitate(X, bottom, v(0, 0), [up, right, down])
    assert ev[0] is STAY and ev[2] is STAY
    assert ev[1] == _end(X, v(0, 0), v(1, 0))
    assert trace_lines([up, right, down], ev)[1].startswith("step 1 walker")
    assert trace_lines([up, right, down], ev)[0].endswith("imitator stay")


def test_trace_reverse_marker():
    X = gen.theta()
    ev = imitate(X, X.closure({(1, 0)}), 1, [(0, 1)])
    assert trace_lines([(0, 1)], ev) == ["step 0 walker 0~ imitator 0~"]


def test_broken_path():
    X = gen.segment(3)
    with pytest.raises(ValueError):
        imitate(X, X.closure({(1, 0)}), 0, [(0, 0), (2, 0)])


def test_needs_directly_special():
    X = gen.rose(1)
    with pytest.raises(PreconditionError):
        imitate(X, X.whole(), 0, [(0, 0)])
    with pytest.raises(AmbiguousImitation):
        imitate(X, X.whole(), 0, [(0, 0)], check=False)


def _ds_pairs():
    for name, X in gen.iter_fixtures():
        from cuberoutes.complex_core import pathology_report, is_locally_convex
        if pathology_report(X).classification != "directly-special":
            continue
        for key in X.keys():
            Y = X.closure({key})
            if is_locally_convex(X, Y):
                yield name, X, Y


def test_square_and_reversibility_exhaustive():
    n = 0
    for name, X, Y in _ds_pairs():
        assert check_gammasquare(X, Y).ok, name
        assert check_reversibility(X, Y) == [], name
        n += 1
    assert n > 10


def test_theta_cover_kills_ab():
    X = gen.theta()
    ic = imitator_cover(X, X.closure({(1, 0)}), 0)
    w = ic.basepoint
    cov = ic.cover
    assert cov.degree <= 2
    assert cov.lift_path(w, [(0, 0), (1, 1)]) != w


def test_torus_cover_semantics():
    X = gen.torus(2, 2)
    row = X.closure([k for (ka, kb), k in X.factor_index.items() if kb == (0, 0)])
    ic = imitator_cover(X, row, 0)
    assert ic.cover.degree <= 2
    for L in range(1, 7):
        for loop in all_loops(X, 0, L):
            closed = ic.cover.lift_path(ic.basepoint, loop) == ic.basepoint
            assert closed == (end_vertex(X, 0, imitate(X, row, 0, loop)) == 0)


def test_entrapment_clauses():
    X = gen.torus(4, 4)
    v = lambda i, j: gen.torus_vertex(4, 4, i, j)
    row = X.induced_cells([v(i, 0) for i in range(3)])
    zone = X.induced_cells([v(i, j) for i in range(2) for j in range(4)])
    rep = entrapment_check(X, row, zone, trials=100, length=10, seed=7)
    assert rep.violations == []
    assert rep.suspended > 0
