import itertools

from hypothesis import given, settings, strategies as st

from cuberoutes import generators as gen
from cuberoutes.complex_core import inclusion
from cuberoutes.covers import (
    abelian_candidates, based_elevation, compose_covers, elevations, fiber_product, group_cover,
    regularize, trivial_cover, verify_cover, embed_elevations_search, cover_from_voltage, Voltage,
)


def _cut(X, h):
    """Voltage 1 across one hyperplane: a cocycle, so squares lift."""
    return {e: (1,) for e in X.hyperplanes[h].edges}


def test_cyclic_cover_of_circle():
    X = gen.cycle(3)
    cov = group_cover(X, (5,), {1: (1,)})
    assert cov.degree == 5
    assert verify_cover(cov) == []
    assert cov.total.n_vertices == 15
    assert cov.is_regular()
    # going once around moves one sheet
    w = cov.fibers[0][0]
    loop = [(0, 0), (1, 0), (2, 0)]
    assert cov.lift_path(w, loop) != w
    assert cov.lift_path(w, loop * 5) == w


def test_fiber_product_degrees():
    X = gen.cycle(2)
    a = group_cover(X, (2,), {0: (1,)})
    b = group_cover(X, (3,), {0: (1,)})
    assert fiber_product([a, b]).degree == 6
    assert fiber_product([a, a]).degree == 2


def test_trivial_and_compose():
    X = gen.torus(2, 2)
    t = trivial_cover(X)
    assert t.degree == 1 and t.total.n_vertices == 4
    lower = group_cover(X, (2,), _cut(X, 0))
    upper = group_cover(lower.total, (2,), _cut(lower.total, 1))
    comp = compose_covers(lower, upper)
    assert verify_cover(comp) == []
    assert comp.degree == 4


def test_regularize_of_irregular_cover():
    # a connected, non-regular degree-3 cover of the rose with two petals
    X = gen.rose(2)
    cov = cover_from_voltage(X, Voltage(3, [(1, 0, 2), (0, 2, 1)]))
    assert cov.degree == 3
    assert not cov.is_regular()
    reg = regularize(cov)
    assert reg.is_regular()
    assert reg.degree == 6


def test_elevations_of_circle():
    # the vertical circle of TORUS(2,2) under a horizontal double cover: two elevations
    X = gen.torus(2, 2)
    col = inclusion(X, X.subcomplex([k for (ka, kb), k in X.factor_index.items() if ka == (0, 0)]))
    e0 = next(k[1] for (ka, kb), k in X.factor_index.items() if k[0] == 1 and ka[0] == 1)
    cov = group_cover(X, (2,), _cut(X, X.hyp_of_edge[e0]))
    els = elevations(col, cov)
    assert sum(el.domain.n_vertices for el in els) == 2 * col.domain.n_vertices
    el = based_elevation(col, cov, 0, cov.fibers[col.vertex(0)][0])
    assert el.embedded


def test_abelian_candidate_order():
    X = gen.cycle(2)
    cands = list(itertools.islice(abelian_candidates(X, 4), 12))
    assert [m for m, _ in cands][:3] == [(2,), (2,), (3,)]
    assert all(len(a) == 1 for _m, a in cands)


def test_embed_search_trivial():
    X = gen.torus(2, 2)
    row = inclusion(X, X.subcomplex([k for (ka, kb), k in X.factor_index.items() if kb == (0, 0)]))
    assert embed_elevations_search(X, [row]).degree == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(2, 6), st.integers(0, 5))
def test_cyclic_covers_verify(k, m, s):
    X = gen.cycle(k)
    cov = group_cover(X, (m,), {0: (s % m,)})
    assert verify_cover(cov) == []
    # component through the root: degree m / gcd(m, s)
    from math import gcd
    assert cov.degree == m // gcd(m, s % m or m)
