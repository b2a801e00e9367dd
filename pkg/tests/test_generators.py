import pytest

from cuberoutes import generators as gen


def test_counts():
    assert [len(r) for r in gen.torus(2, 3).cells_by_dim] == [6, 12, 6]
    assert [len(r) for r in gen.cube(3).cells_by_dim] == [8, 12, 6, 1]
    assert [len(r) for r in gen.grid(2, 3).cells_by_dim] == [12, 17, 6]
    assert gen.theta().n_edges == 3
    assert gen.rose(4).n_vertices == 1


def test_cycle_too_small():
    with pytest.raises(ValueError):
        gen.cycle(1)


def test_salvetti_truncate():
    k3 = ([0, 1, 2], [(0, 1), (1, 2), (0, 2)])
    assert gen.salvetti(k3).max_dim == 3
    with pytest.raises(ValueError):
        gen.salvetti(k3, max_dim=2)
    assert gen.salvetti(k3, max_dim=2, truncate=True).max_dim == 2


def test_vertex_helpers():
    assert gen.torus_vertex(3, 4, 4, -1) == 1 * 4 + 3
    X = gen.grid(2, 2)
    v = gen.grid_vertex(2, 2, 1, 2)
    assert X.n_vertices == 9 and v == 5


def test_fixture_table():
    for name, make in gen.FIXTURES.items():
        assert make().n_vertices > 0, name
