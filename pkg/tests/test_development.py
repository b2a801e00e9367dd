import random

import pytest
from hypothesis import given, settings, strategies as st

from cuberoutes import generators as gen
from cuberoutes.complex_core import NotNPCError
from cuberoutes.development import (
    DevBall, RadiusExhausted, bridge, deck_elements, deck_apply, gate, hull, is_convex,
    orthogonal_complement, project, stabilizer_in_ball, verify_orthcomp_prop,
    verify_projection_prop, elevation_in_ball, crosses,
)

from oracles import bfs, box, grid_dist, grid_gate, grid_separators, lattice_coords


@pytest.fixture(scope="module")
def plane():
    """Universal cover of TORUS(8,8) around the origin: a piece of Z^2."""
    b = DevBall(gen.torus(8, 8), 0, 12)
    c = lattice_coords(b)
    at = {p: v for v, p in c.items()}
    return b, c, at


def _nbrs(b):
    return {u: b.neighbors(u) for u in range(b.n)}


def test_ball_sizes():
    assert DevBall(gen.cycle(2), 0, 3).n == 7
    assert DevBall(gen.torus(2, 2), 0, 2).n == 13
    assert DevBall(gen.theta(), 0, 2).n == 10


def test_ball_rejects_non_npc():
    with pytest.raises(NotNPCError):
        DevBall(gen.double_edge_link(), 0, 2)


def test_ball_distances_match_lattice(plane):
    b, c, _ = plane
    assert all(b.dist[v] == grid_dist(c[v], (0, 0)) for v in range(b.n))


def test_gate_example(plane):
    b, c, at = plane
    A = hull(b, {at[(-2, 0)], at[(2, 0)]})
    assert sorted(c[v] for v in A.vertices) == [(i, 0) for i in range(-2, 3)]
    assert c[gate(b, A, at[(2, 3)])] == (2, 0)
    assert gate(b, A, at[(1, 0)]) == at[(1, 0)]


def test_hull_rectangle(plane):
    b, c, at = plane
    H = hull(b, {at[(0, 0)], at[(2, 1)]})
    assert sorted(c[v] for v in H.vertices) == [(i, j) for i in range(3) for j in range(2)]
    assert len(H.hyps) == 3
    assert hull(b, {at[(1, 1)]}).vertices == {at[(1, 1)]}


def test_hull_escape_raises(plane):
    b, _c, at = plane
    with pytest.raises(RadiusExhausted) as exc:
        hull(b, {at[(5, 0)], at[(0, 5)]})
    assert exc.value.needed is not None


def test_tree_hull_is_geodesic():
    b = DevBall(gen.theta(), 0, 10)
    adj = _nbrs(b)
    rng = random.Random(3)
    S = [v for v in range(b.n) if b.dist[v] <= b.safe]
    for _ in range(30):
        u, v = rng.sample(S, 2)
        du, dv = bfs(adj, u), bfs(adj, v)
        geo = {x for x in range(b.n) if du[x] + dv[x] == du[v]}
        assert hull(b, {u, v}).vertices == geo


def test_tree_gate_edge():
    b = DevBall(gen.theta(), 0, 10)
    adj = _nbrs(b)
    u = b.neighbors(0)[0]
    A = hull(b, {0, u})
    for x in range(b.n):
        if b.dist[x] <= b.safe:
            d = bfs(adj, x)
            assert gate(b, A, x) == min((0, u), key=lambda a: d[a])


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
       st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
       st.tuples(st.integers(-4, 4), st.integers(-4, 4)))
def test_gate_characterization(plane, p, q, x):
    b, c, at = plane
    if grid_dist(x, (0, 0)) > b.safe:
        return
    A = hull(b, {at[p], at[q]})
    g = gate(b, A, at[x])
    bx = box([p, q])
    assert c[g] == grid_gate(bx, x)
    dx = bfs(_nbrs(b), at[x])
    assert dx[g] == min(dx[a] for a in A.vertices)
    # separating count: hyperplanes with x on one side and all of A on the other
    seps = set.intersection(*(grid_separators(x, c[a]) for a in A.vertices))
    assert dx[g] == len(seps)


def test_bridge_grid_lines(plane):
    b, c, at = plane
    A = hull(b, {at[(-2, 0)], at[(2, 0)]})
    B = hull(b, {at[(-1, 2)], at[(1, 2)]})
    br = bridge(b, A, B)
    assert all(br.checks.values())
    assert sorted(c[v] for v in br.C.vertices) == [(i, 0) for i in (-1, 0, 1)]
    assert len(br.D) == 3 and len(br.separators) == 2
    assert {c[v][0] for v in br.D.vertices} == {c[br.a][0]}


def test_bridge_equal_sets(plane):
    b, _c, at = plane
    A = hull(b, {at[(0, 0)], at[(1, 1)]})
    br = bridge(b, A, A)
    assert br.C.vertices == A.vertices
    assert len(br.D) == 1 and not br.separators


def test_bridge_tree_edges():
    b = DevBall(gen.theta(), 0, 12)
    adj = _nbrs(b)
    far = [v for v in range(b.n) if b.dist[v] == 3][0]
    A = hull(b, {0, b.neighbors(0)[0]})
    nb = [w for w in b.neighbors(far) if b.dist[w] == 4][0]
    B = hull(b, {far, nb})
    br = bridge(b, A, B)
    assert len(br.C) == 1 and len(br.C_B) == 1
    d = bfs(adj, br.a)
    assert len(br.D) == d[br.b] + 1


def test_orthogonal_complement_grid(plane):
    b, c, at = plane
    A = hull(b, {at[(-1, 0)], at[(1, 0)]})
    oc = orthogonal_complement(b, A, at[(0, 0)])
    assert {c[v][0] for v in oc.B.vertices} == {0}
    assert len(oc.B) == 2 * b.safe + 1
    assert not oc.B.complete
    sl = oc.slice(b, at[(0, 1)])
    assert sorted(c[v] for v in sl.vertices) == [(-1, 1), (0, 1), (1, 1)]


def test_orthogonal_complement_square():
    X = gen.cube(2)
    b = DevBall(X, 0, 8)
    e = b.neighbors(0)[0]
    A = hull(b, {0, e})
    oc = orthogonal_complement(b, A, 0)
    assert len(oc.B) == 2 and oc.B.vertices != A.vertices
    assert oc.B.complete and oc.chart_ok
    assert len(oc.region) == 4


def test_orthogonal_complement_tree():
    b = DevBall(gen.theta(), 0, 8)
    A = hull(b, {0, b.neighbors(0)[0]})
    assert orthogonal_complement(b, A, 0).B.vertices == {0}


def test_transversality_characterization():
    X = gen.torus(4, 4)
    b = DevBall(X, 0, 12)
    c = lattice_coords(b)
    at = {p: v for v, p in c.items()}
    for A in (hull(b, {at[(-1, 0)], at[(2, 0)]}), hull(b, {at[(0, 0)], at[(1, 1)]}), hull(b, {at[(0, 0)]})):
        oc = orthogonal_complement(b, A, at[(0, 0)])
        visible = {b.hyp_of_edge[b.edge(u, w)] for u in oc.B.vertices for w in b.neighbors(u)
                   if max(b.dist[u], b.dist[w]) <= b.safe}
        trans = {h for h in visible if h not in A.hyps and all(crosses(b, h, k) for k in A.hyps)}
        assert oc.B.hyps == trans


def test_project_is_hull_of_gates(plane):
    b, c, at = plane
    A = hull(b, {at[(-2, 0)], at[(2, 0)]})
    B = hull(b, {at[(0, 2)], at[(1, 3)]})
    P = project(b, A, B)
    assert sorted(c[v] for v in P.vertices) == [(0, 0), (1, 0)]


def test_deck_simply_connected():
    b = DevBall(gen.grid(2, 2), 0, 6)
    assert [g.image for g in deck_elements(b, 1)] == [0]


def test_deck_line_translations():
    b = DevBall(gen.cycle(2), 0, 4)
    imgs = sorted(g.image for g in deck_elements(b, 1))
    assert all(b.proj[o] == b.proj[0] for o in imgs)
    assert sorted(b.dist[o] for o in imgs) == [0, 2, 2]
    assert all(b.dist[o] % 2 == 0 for o in imgs)


def test_deck_torus_even_vectors(plane):
    b = DevBall(gen.torus(2, 2), 0, 8)
    c = lattice_coords(b)
    vecs = {c[g.image] for g in deck_elements(b, 1)}
    assert (0, 0) in vecs and (2, 0) in vecs and (0, -2) in vecs
    assert all(x % 2 == 0 and y % 2 == 0 for x, y in vecs)
    # deck action is translation on coordinates
    g = next(g for g in deck_elements(b, 1) if c[g.image] == (2, 0))
    for v in range(b.n):
        if b.dist[v] <= 2:
            gv = deck_apply(b, g.image, v)
            assert c[gv] == (c[v][0] + 2, c[v][1])


def test_stabilizer_of_line():
    X = gen.torus(2, 2)
    b = DevBall(X, 0, 10)
    c = lattice_coords(b)
    row = [k for (ka, kb), k in X.factor_index.items() if kb == (0, 0)]
    from cuberoutes.complex_core import inclusion
    phi = inclusion(X, X.subcomplex(row))
    A, _ = elevation_in_ball(b, phi, 0, 0)
    st_ = stabilizer_in_ball(b, A)
    assert not st_.exact
    assert {c[g.image] for g in st_.elements} == {(x, 0) for x in (-4, -2, 0, 2, 4)}


def test_convexity_checks(plane):
    b, c, at = plane
    assert is_convex(b, {at[(0, 0)], at[(1, 0)]})
    assert not is_convex(b, {at[(0, 0)], at[(1, 1)]})


def _circles(X):
    row = X.subcomplex([k for (ka, kb), k in X.factor_index.items() if kb == (0, 0)])
    col = X.subcomplex([k for (ka, kb), k in X.factor_index.items() if ka == (0, 0)])
    return row, col


def test_projection_prop_examples():
    X = gen.torus(2, 2)
    row, col = _circles(X)
    same = verify_projection_prop(X, row, row, R=8)
    assert same.ok
    cross = verify_projection_prop(X, row, col, R=8)
    assert cross.ok and len(cross.data["C"]) == 1 and cross.data["G_C"] == [0]
    b = DevBall(X, 0, 8)
    c = lattice_coords(b)
    off = next(v for v in range(b.n) if c[v] == (0, 2))
    par = verify_projection_prop(X, row, row, R=8, elev_b=off)
    assert par.ok
    assert {c[v][1] for v in par.data["C"].vertices} == {0}
    assert len(par.data["G_C"]) > 1


def test_orthcomp_prop_examples():
    X = gen.torus(2, 2)
    row, _ = _circles(X)
    rep = verify_orthcomp_prop(X, row, R=8)
    assert rep.ok and not rep.exact
    pt = verify_orthcomp_prop(X, X.subcomplex([(0, 0)]), R=8)
    assert pt.ok and not pt.exact
    tree = verify_orthcomp_prop(gen.theta(), gen.theta().subcomplex([(1, 0)]), R=8)
    assert tree.ok and len(tree.data["B"]) == 1
