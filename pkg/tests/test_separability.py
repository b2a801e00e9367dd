import pytest

from cuberoutes import generators as gen
from cuberoutes.complex_core import LocalIsometry, PreconditionError, inclusion, is_local_isometry
from cuberoutes.covers import trivial_cover
from cuberoutes.routes import CoverCertificate, synthesize_cover
from cuberoutes.separability import (
    FreeGroupOracle, StaleCertificate, SubgroupPresentation, build_separating_route,
    certify_nonmembership, realizations_check, torus_oracle, verify_nonmembership,
)

from oracles import all_loops, free_reduce, theta_word, z2_in_lattice_sum

a, b, c = (0, 0), (1, 0), (2, 0)


def rv(e):
    return (e[0], 1 - e[1])


def theta_K1():
    X = gen.theta()
    phi = inclusion(X, X.subcomplex({(1, 0), (1, 2)}))
    y = next(y for y in range(phi.domain.n_vertices) if phi.vertex(y) == 0)
    return X, SubgroupPresentation(phi, y, (), "K1")


def torus_data():
    """K1 = horizontal circle at row 0, K2 = index-2 vertical subgroup (a 4-cycle wrapping twice)."""
    X = gen.torus(2, 2)
    H = [k for (ka, kb), k in X.factor_index.items() if k[0] == 1 and ka[0] == 1 and kb == (0, 0)]
    V = [k for (ka, kb), k in X.factor_index.items() if k[0] == 1 and kb[0] == 1 and ka == (0, 0)]
    p1 = inclusion(X, X.subcomplex(H))
    K1 = SubgroupPresentation(p1, next(y for y in range(p1.domain.n_vertices) if p1.vertex(y) == 0), (), "K1")
    ve = {X.edge_corners(k[1]): k[1] for k in V}
    cells = {}
    lap = [0, 1, 0, 1]
    for i in range(4):
        cells[(0, i)] = ((0, lap[i]), (0,))
        cells[(1, i)] = ((1, ve[(lap[i], lap[(i + 1) % 4])]), (0, 1))
    p2 = LocalIsometry(gen.cycle(4), X, cells)
    assert is_local_isometry(p2).ok
    K2 = SubgroupPresentation(p2, 0, (), "K2")
    hcyc = [(k[1], 0) for k in sorted(H, key=lambda k: X.edge_corners(k[1]))]
    vcyc = [(k[1], 0) for k in sorted(V, key=lambda k: X.edge_corners(k[1]))]
    return X, K1, K2, hcyc, vcyc


def test_theta_free_membership_oracle():
    assert theta_word([a, rv(c), a, rv(c)]) == (1, 1)
    assert free_reduce((1, -1, 2)) == (2,)


def test_theta_certificate():
    X, K1 = theta_K1()
    assert K1.loops()
    sep = build_separating_route([K1], (b, rv(c)), R=12)
    assert sep.exact and not sep.nonessential
    cert = synthesize_cover(sep.route)
    assert isinstance(cert, CoverCertificate)
    nm = certify_nonmembership(sep, cert)
    assert nm.verify()
    assert any("none lifts closed" in ln for ln in nm.transcript)


def test_theta_realizations_match_oracle():
    X, K1 = theta_K1()
    g = (b, rv(c))
    sep = build_separating_route([K1], g, R=12)
    orc = FreeGroupOracle(X, [2])
    rep = realizations_check(sep.route, orc, [[orc.element([a, rv(c)])]], orc.inv(orc.element(g)), 6, inner_len=2)
    assert rep.ok


def test_theta_dictionary_short_words():
    # g in <a c~> (the oracle) iff the route is not essential
    X, K1 = theta_K1()
    for L in (2, 4):
        for g in all_loops(X, 0, L):
            w = theta_word(g)
            inside = all(x == 1 for x in w) or all(x == -1 for x in w)
            sep = build_separating_route([K1], g, R=12)
            assert sep.nonessential == inside, g


def test_torus_certificate():
    X, K1, K2, h, v = torus_data()
    sep = build_separating_route([K1, K2], tuple(h + v), R=16)
    assert not sep.nonessential
    assert [c_.phi.domain.n_vertices for c_ in sep.route.components] == [2, 12]
    cert = synthesize_cover(sep.route)
    assert isinstance(cert, CoverCertificate)
    assert certify_nonmembership(sep, cert).verify()


def test_torus_inside_product():
    X, K1, K2, h, v = torus_data()
    assert build_separating_route([K1, K2], tuple(h + v + v), R=16).nonessential


def test_torus_realizations():
    X, K1, K2, h, v = torus_data()
    orc = torus_oracle(X, (2, 2))
    assert orc.element(h + v) == (1, 1)
    sep = build_separating_route([K1, K2], tuple(h + v), R=16)
    rep = realizations_check(sep.route, orc, [[(1, 0)], [(0, 2)]], orc.inv((1, 1)), 8, outer_len=8)
    assert rep.ok


def test_torus_dictionary_short_loops():
    X, K1, K2, h, v = torus_data()
    orc = torus_oracle(X, (2, 2))
    for g in all_loops(X, 0, 2):
        vec = orc.element(list(g))
        inside = z2_in_lattice_sum(vec, [(1, 0), (0, 2)])
        assert build_separating_route([K1, K2], g, R=16).nonessential == inside, g


def test_degree_one_rejected():
    X, K1 = theta_K1()
    sep = build_separating_route([K1], (b, rv(c)), R=12)
    fake = CoverCertificate(trivial_cover(X), sep.route, [], "none")
    with pytest.raises(PreconditionError):
        certify_nonmembership(sep, fake)


def test_stale_certificate():
    X, K1 = theta_K1()
    sep = build_separating_route([K1], (b, rv(c)), R=12)
    nm = certify_nonmembership(sep, synthesize_cover(sep.route))
    nm.base_digest = "0" * 64
    with pytest.raises(StaleCertificate):
        verify_nonmembership(nm)


def test_g_must_be_loop():
    X, K1 = theta_K1()
    with pytest.raises(PreconditionError):
        build_separating_route([K1], (b,), R=12)
