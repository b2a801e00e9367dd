import pytest

from cuberoutes import generators as gen
from cuberoutes.complex_core import PreconditionError
from cuberoutes.covers import group_cover, trivial_cover
from cuberoutes.development import DevBall
from cuberoutes.routes import (
    CoverCertificate, Essential, NonEssential, ball_chains, check_hyp_j, check_trap, closed_elevations,
    compute_Pj, embedded_route_in_cover, is_essential, make_route, omega_family, paths_along,
    project_route, route_elevations, route_in_cover, separate_Y2_Yn, synthesize_cover, trap_cover,
    trap_hypotheses, verify_no_closed_elevations,
)
from cuberoutes.walker import imitator_cover

from oracles import theta_word

A, B, C = (1, 0), (1, 1), (1, 2)  # THETA edge keys


def _theta_edges_route():
    X = gen.theta()
    return make_route(X, [0, 1, 0], [{A}, {B}])


def _theta_trap_route():
    X = gen.theta()
    return make_route(X, [0, 1, 1, 0, 0], [{A}, {(0, 1)}, {B}, {(0, 0)}])


def _grid_notrap():
    X = gen.grid(3, 3)
    v = lambda i, j: gen.grid_vertex(3, 3, i, j)
    seg = lambda pts: X.induced_cells([v(*p) for p in pts])
    pieces = [seg([(0, 0), (1, 0), (2, 0)]), seg([(1, 0), (1, 1), (1, 2)]),
              seg([(1, 2), (0, 2)]), seg([(0, 2), (0, 1), (0, 0)])]
    return X, v, make_route(X, [v(0, 0), v(1, 0), v(1, 2), v(0, 2), v(0, 0)], pieces)


def test_paths_along_theta():
    r = _theta_edges_route()
    one = [p.realization for p in paths_along(r, 1)]
    assert one == [((0, 0), (1, 1))]
    three = {p.realization for p in paths_along(r, 3)}
    assert ((0, 0), (0, 1), (0, 0), (1, 1)) in three
    assert all(len(p) % 2 == 0 for p in three)


def test_paths_along_trivial_segments():
    X = gen.theta()
    r = make_route(X, [0, 0], [{A}])
    assert [p.segments for p in paths_along(r, 0)] == [((),)]


def test_route_validation():
    S = gen.segment(2)
    with pytest.raises(ValueError):
        make_route(S, [0, 2], [{(1, 0)}])
    assert _theta_edges_route().closed and _theta_edges_route().embedded


def test_degree_one_elevations(theta_route):
    els = route_elevations(theta_route, trivial_cover(theta_route.X))
    assert len(els) == 1 and els[0].closed


def test_theta_imitator_cover_kills(theta_route):
    X = theta_route.X
    ic = imitator_cover(X, theta_route.components[0].cells, 0)
    assert closed_elevations(theta_route, ic.cover) == []
    ok, lines = verify_no_closed_elevations(theta_route, ic.cover)
    assert ok and lines[-1] == "result no closed elevations"


def test_nonessential_backtrack():
    X = gen.theta()
    r = make_route(X, [0, 1, 0], [{A}, {A}])
    res = is_essential(r, 8)
    assert isinstance(res, NonEssential) and not res
    assert isinstance(synthesize_cover(r), NonEssential)


def test_theta_essential_with_hint(theta_route):
    ic = imitator_cover(theta_route.X, theta_route.components[0].cells, 0)
    res = is_essential(theta_route, 4, cover_hints=[ic.cover])
    assert isinstance(res, Essential)


def test_torus_unit_loop_essential():
    # (1,0) realized by two finite segments; both elevations are finite
    X = gen.torus(3, 3)
    t = lambda i, j: gen.torus_vertex(3, 3, i, j)
    e = lambda a, b: next(k for k in range(X.n_edges) if X.edge_corners(k) == (a, b))
    Y1 = X.closure({(1, e(t(0, 0), t(1, 0))), (1, e(t(1, 0), t(2, 0)))})
    Y2 = X.closure({(1, e(t(2, 0), t(0, 0)))})
    r = make_route(X, [t(0, 0), t(2, 0), t(0, 0)], [Y1, Y2])
    res = is_essential(r, 8)
    assert isinstance(res, Essential) and res.how == "ball-exhaustion"


def test_trap_holds_on_theta():
    r = _theta_trap_route()
    assert check_trap(r) == (True, [])
    assert trap_hypotheses(r) == []
    cert = trap_cover(r)
    assert cert.method == "trap" and cert.verify()[0]


def test_trap_fails_on_grid():
    X, v, r = _grid_notrap()
    ok, wit = check_trap(r)
    assert not ok
    e = next(k for k in range(X.n_edges) if set(X.edge_corners(k)) == {v(0, 0), v(1, 0)})
    assert (v(1, 0), e, 3) in wit
    with pytest.raises(PreconditionError):
        trap_cover(r)


def test_trap_needs_length_four(theta_route):
    with pytest.raises(PreconditionError):
        check_trap(theta_route)


def test_hyp_j_fails_on_grid():
    X, v, r = _grid_notrap()
    res = check_hyp_j(r, 3, 16)
    assert res.status == "fails"
    H = X.hyp_of_edge
    e = next(k for k in range(X.n_edges) if set(X.edge_corners(k)) == {v(0, 0), v(1, 0)})
    ball = DevBall(X, r.vertices[0], 16)
    assert ball.base.hyp_of_edge[e] == H[e]
    assert res.witness["i"] == 2


def test_hyp_j_trivial_and_tree():
    r = _theta_trap_route()
    assert check_hyp_j(r, 2).status == "holds"
    assert check_hyp_j(r, 3, 10).status == "holds"


def test_torus_poset_and_projection(torus_square_route):
    r = torus_square_route
    assert isinstance(is_essential(r, 16), Essential)
    assert check_hyp_j(r, 3, 10).status == "fails"
    P = compute_Pj(r, 3, 12)
    assert P.kappa == 1 and P.exact
    ball = DevBall(r.X, 0, 16)
    chains, _ = ball_chains(r, ball, 4)
    pr = project_route(r, chains[0], 3, 16, ball=ball)
    assert all(pr.checks.values()) and len(pr.checks) == 3
    assert pr.route.vertices[0] == r.vertices[0] and pr.route.vertices[-1] == r.vertices[-1]
    assert pr.route.components[1].phi.domain.n_vertices == 9
    assert len(omega_family(r, 3, 16)) == 1
    assert omega_family(r, 2) == [r]


def test_synthesize_theta(theta_route):
    cert = synthesize_cover(theta_route)
    assert isinstance(cert, CoverCertificate)
    assert cert.cover.degree <= 64
    assert cert.verify()[0]
    # the realization word (a c~)(c b~) = x y^-1 must not close in the cover
    w0 = cert.cover.fibers[0][0]
    assert theta_word([(0, 0), (1, 1)]) == (1, -2)
    assert cert.cover.lift_path(w0, [(0, 0), (1, 1)]) != w0


def test_synthesize_trap_route():
    cert = synthesize_cover(_theta_trap_route())
    assert cert.method == "trap"


def test_separate_disjoint_is_trivial():
    assert separate_Y2_Yn(_theta_trap_route()).degree == 1


def test_closed_elevations_are_essential(torus_square_route):
    # a closed elevation of an essential route to a finite cover is essential
    r = torus_square_route
    X = r.X
    seam = {}
    for e in range(X.n_edges):
        u, w = X.edge_corners(e)
        if u // 6 == 5 and w // 6 == 0:
            seam[e] = (1,)
    cov = group_cover(X, (2,), seam)
    found = 0
    for re in closed_elevations(r, cov):
        up = route_in_cover(re, r, cov)
        assert not isinstance(is_essential(up, 16), NonEssential)
        found += 1
    assert found > 0
    re = route_elevations(r, cov, starts=[cov.fibers[0][0]])[0]
    assert embedded_route_in_cover(re, r, cov).embedded


def test_open_route_rejected():
    X = gen.theta()
    r = make_route(X, [0, 1], [{A}])
    with pytest.raises(PreconditionError):
        is_essential(r)
    with pytest.raises(PreconditionError):
        synthesize_cover(r)
