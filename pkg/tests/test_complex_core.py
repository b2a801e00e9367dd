import pytest
from hypothesis import given, settings, strategies as st

from cuberoutes.complex_core import (
    NotNPCError, inclusion, is_local_isometry, is_locally_convex, pathology_report,
    hyperplane_classes_bruteforce, compose, subcomplex_osculations,
)
from cuberoutes import generators as gen

from oracles import carrier_by_cubes, parallel_classes


def test_fixtures_are_npc():
    for name, X in gen.iter_fixtures():
        assert X.validate().npc, name


def test_bad_links_detected():
    for X in (gen.double_edge_link(), gen.hollow_cube_corner()):
        rep = X.validate()
        assert not rep.npc
        assert rep.link_violations
        with pytest.raises(NotNPCError):
            X.require_npc()


@pytest.mark.parametrize("a,b", [(2, 2), (3, 2), (4, 5)])
def test_torus_hyperplane_count(a, b):
    # one hyperplane per edge of each circle factor
    X = gen.torus(a, b)
    assert len(X.hyperplanes) == a + b
    assert all(h.two_sided for h in X.hyperplanes)


def test_cube_hyperplanes_pairwise_cross():
    X = gen.cube(3)
    assert len(X.hyperplanes) == 3
    assert all(len(h.edges) == 4 for h in X.hyperplanes)
    assert all(h.carrier.cells == frozenset(X.keys()) for h in X.hyperplanes)


def test_hyperplanes_match_oracle_on_fixtures():
    for name, X in gen.iter_fixtures():
        got = sorted((h.edges for h in X.hyperplanes), key=min)
        assert got == parallel_classes(X), name
        for h in X.hyperplanes:
            assert h.carrier.cells == carrier_by_cubes(X, h.edges), name


def test_library_bruteforce_agrees():
    X = gen.torus(3, 2)
    brute = sorted(hyperplane_classes_bruteforce(X), key=min)
    assert [frozenset(c) for c in brute] == parallel_classes(X)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4))
def test_grid_hyperplanes_property(m, n):
    X = gen.grid(m, n)
    assert len(X.hyperplanes) == m + n
    assert sorted((h.edges for h in X.hyperplanes), key=min) == parallel_classes(X)


def test_classification_expected():
    assert pathology_report(gen.torus(2, 2)).classification == "directly-special"
    assert pathology_report(gen.theta()).classification == "directly-special"
    salv = pathology_report(gen.salvetti(([0, 1], [(0, 1)])))
    assert salv.classification == "NPC-only"
    assert len(salv.self_osculations) == 2
    assert pathology_report(gen.rose(2)).classification == "NPC-only"
    assert pathology_report(gen.double_edge_link()).classification == "not-NPC"


def test_summary_string():
    rep = pathology_report(gen.salvetti(([0, 1], [(0, 1)])))
    assert rep.summary() == "NPC-only; self-osculations: 2"


def test_locally_convex_square_corner():
    X = gen.cube(2)
    corner = X.closure({(1, e) for e in range(X.n_edges) if 0 in X.edge_corners(e)})
    assert not is_locally_convex(X, corner)
    assert is_locally_convex(X, X.closure({(1, 0)}))


def test_inclusion_is_local_isometry():
    X = gen.torus(3, 3)
    row = [k for (ka, kb), k in X.factor_index.items() if kb == (0, 0)]
    phi = inclusion(X, X.subcomplex(row))
    assert phi.embedded
    assert is_local_isometry(phi).ok
    assert phi.domain.n_vertices == 3


def test_compose_identity():
    X = gen.cube(2)
    phi = inclusion(X, X.whole())
    psi = compose(phi, phi)
    assert psi.cells == phi.cells


def test_induced_cells():
    X = gen.grid(2, 2)
    cells = X.induced_cells([gen.grid_vertex(2, 2, i, j) for i in (0, 1) for j in (0, 1)])
    assert sum(1 for k in cells if k[0] == 2) == 1
    assert sum(1 for k in cells if k[0] == 1) == 4


def test_osculation_with_subcomplex():
    # each horizontal hyperplane touches a vertical circle once per vertex, never crossing it
    X = gen.torus(2, 2)
    col = X.subcomplex([k for (ka, kb), k in X.factor_index.items() if ka == (0, 0)])
    assert is_locally_convex(X, col.cells)
    H = X.hyp_of_edge
    horiz = {H[k[1]] for (ka, kb), k in X.factor_index.items() if k[0] == 1 and ka[0] == 1}
    assert len(horiz) == 2
    for h in horiz:
        rep = subcomplex_osculations(X, h, col)
        assert not rep.intersects
        assert len(rep.witnesses) == 2
