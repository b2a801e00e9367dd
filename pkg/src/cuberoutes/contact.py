"""Contact graphs of developed balls and the translate-guarding cover.

Two hyperplanes are in contact when their carriers share a vertex.  Inside a
ball only contacts witnessed at vertices of the exact region are trusted.  A
hyperplane is *interior* when its carrier comes within ``safe // 2`` of the
root; by the Helly property two interior hyperplanes in contact
anywhere are in contact at a vertex of the exact region, so the ball sees
every such contact.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .complex_core import PreconditionError
from .covers import fiber_product, trivial_cover
from .development import DevBall, _nearest_edge, deck_apply, hull, tree_path
from .routes import (
    Component, CoverCertificate, NonEssential, Route, _ball_piece, _dom_of,
    synthesize_cover, verify_no_closed_elevations,
)


def interior_radius(ball):
    return ball.safe // 2


def carrier_vertices(ball, h):
    """Carrier vertices of ball hyperplane ``h`` inside the exact region."""
    T = ball.total
    out = set()
    for e in ball.hyp_edges[h]:
        a, b = T.edge_corners(e)
        out.update(x for x in (a, b) if ball.dist[x] <= ball.safe)
    return frozenset(out)


@dataclass
class ContactGraph:
    ball: DevBall
    graph: nx.Graph
    interior: frozenset
    frontier: frozenset
    _dist: dict = field(default_factory=dict, repr=False)

    def distances_from(self, v):
        if v not in self._dist:
            self._dist[v] = nx.single_source_shortest_path_length(self.graph, v)
        return self._dist[v]

    def adjacency(self):
        """Adjacency lists keyed by hyperplane id (export format)."""
        return {v: sorted(self.graph.neighbors(v)) for v in sorted(self.graph.nodes)}

    def adjacency_lines(self):
        tag = lambda v: "" if v in self.interior else "*"
        return [f"{v}{tag(v)}: {' '.join(map(str, nb))}" for v, nb in self.adjacency().items()]


def contact_graph(ball) -> ContactGraph:
    G = nx.Graph()
    G.add_nodes_from(range(ball.n_hyp))
    at = {}
    for h in range(ball.n_hyp):
        for v in carrier_vertices(ball, h):
            at.setdefault(v, set()).add(h)
    for hs in at.values():
        for a, b in itertools.combinations(sorted(hs), 2):
            G.add_edge(a, b)
    s = interior_radius(ball)
    inner = set()
    for h in range(ball.n_hyp):
        if any(min(ball.dist[x] for x in ball.total.edge_corners(e)) <= s for e in ball.hyp_edges[h]):
            inner.add(h)
    return ContactGraph(ball, G, frozenset(inner), frozenset(set(G.nodes) - inner))


@dataclass
class ContactDistance:
    d: object  # int, or None when disconnected within the ball
    certified: bool
    path: list
    reason: str = ""


def _carrier_gap(ball, v, w):
    """Graph distance between the two carriers (exact region only)."""
    A, B = carrier_vertices(ball, v), carrier_vertices(ball, w)
    seen = {a: 0 for a in A}
    q = deque(A)
    while q:
        u = q.popleft()
        if u in B:
            return seen[u]
        for x in ball.neighbors(u):
            if x not in seen and ball.dist[x] <= ball.safe:
                seen[x] = seen[u] + 1
                q.append(x)
    return None


def contact_distance(ball, v, w, graph=None) -> ContactDistance:
    cg = graph or contact_graph(ball)
    if v not in cg.interior or w not in cg.interior:
        raise PreconditionError("contact distance needs interior hyperplanes")
    if v == w:
        return ContactDistance(0, True, [v], "equal")
    try:
        path = nx.shortest_path(cg.graph, v, w)
    except nx.NetworkXNoPath:
        return ContactDistance(None, False, [], "disconnected within the ball")
    d = len(path) - 1
    if d == 1:
        return ContactDistance(1, True, path, "contact witnessed")
    if d == 2:
        return ContactDistance(2, True, path, "no contact (Helly) and a witnessed 2-chain")
    if ball.base.max_dim == 1:
        gap = _carrier_gap(ball, v, w)
        if gap is not None and gap + 1 == d:
            return ContactDistance(d, True, path, "tree: every separating edge lies on any chain")
    return ContactDistance(d, False, path, "upper bound only")


def theta_route_length(ball, v, w, max_n=8):
    """Least ``n`` with carriers ``N(v)=N(H_1), ..., N(H_n)=N(w)`` consecutively meeting.

    Brute-force iterative deepening over hyperplane sequences; returns None
    when nothing is found up to ``max_n``.
    """
    car = [carrier_vertices(ball, h) for h in range(ball.n_hyp)]
    if v == w:
        return 1

    def meets(a, b):
        return bool(car[a] & car[b])

    for n in range(2, max_n + 1):
        def rec(seq):
            if len(seq) == n - 1:
                return meets(seq[-1], w)
            for h in range(ball.n_hyp):
                if h not in seq and h != w and meets(seq[-1], h) and rec(seq + [h]):
                    return True
            return False

        if rec([v]):
            return n
    return None


# -- guarding translates -------------------------------------------------------------
def _ball_hyp_of(ball, a, b):
    e = ball.edge(a, b)
    return None if e is None else ball.hyp_of_edge[e]


def _hyp_translate(ball, g_image, h):
    """Ball hyperplane ``g . h`` using a dual edge of ``h`` in the exact region."""
    e = _nearest_edge(ball, h)
    a, b = ball.total.edge_corners(e)
    ga, gb = deck_apply(ball, g_image, a), deck_apply(ball, g_image, b)
    if ga is None or gb is None:
        return None
    return _ball_hyp_of(ball, ga, gb)


def _descend_hyp(ball, h):
    e = ball.hyp_edges[h][0]
    return ball.base.hyp_of_edge[ball.cov.project((1, e))[1]]


def shortcut_routes(X, hv, hw, n_max):
    """Carrier routes ``(y0, N(H1), y1, ..., N(Hn), yn)`` in X with ``H1=hv, Hn=hw``, ``n <= n_max``."""
    hyps = X.hyperplanes
    cv = [frozenset(k[1] for k in h.carrier.cells if k[0] == 0) for h in hyps]
    out = []

    def seqs(n):
        def rec(seq):
            if len(seq) == n:
                if seq[-1] == hw:
                    yield list(seq)
                return
            for h in range(len(hyps)):
                if cv[seq[-1]] & cv[h]:
                    yield from rec(seq + [h])

        yield from rec([hv])

    for n in range(1, n_max + 1):
        for seq in seqs(n):
            choices = [sorted(cv[seq[0]])]
            for a, b in zip(seq, seq[1:]):
                choices.append(sorted(cv[a] & cv[b]))
            choices.append(sorted(cv[seq[-1]]))
            for ys in itertools.product(*choices):
                out.append((tuple(seq), tuple(ys)))
    return out


def _carrier_component(X, h, a, b, name):
    return Component.from_sub(X, X.hyperplanes[h].carrier, a, b, name=name)


@dataclass
class GuardReport:
    d: int
    certified_d: bool
    routes: int
    cover_degree: int
    checked: list  # (g image, in subgroup, d(v, g w) or None, certified)
    radius: int
    transcript: list

    @property
    def ok(self):
        return all((not inside) or (dist is not None and dist >= self.d and cert)
                   for _g, inside, dist, cert in self.checked)

    def lines(self):
        out = [f"d(v,w) = {self.d} ({'certified' if self.certified_d else 'upper bound'})",
               f"shortcut routes: {self.routes}; cover degree {self.cover_degree}",
               f"deck elements checked: |g| <= {self.radius}"]
        for g, inside, dist, cert in self.checked:
            tag = "in" if inside else "out"
            out.append(f"g {g} {tag} d(v,gw) {dist}{'' if cert else '?'}")
        out.append("result " + ("no shortening" if self.ok else "SHORTENING FOUND"))
        return out


def guard_subgroup(X, v, w, max_degree=64, r=4, R=None, basepoint=0):
    """Cover whose deck translates never bring ``w`` closer to ``v``.

    ``v``, ``w`` are hyperplane ids of ``DevBall(X, basepoint, R)``.
    """
    from .walker import require_directly_special

    require_directly_special(X)
    R = R or 32
    ball = DevBall(X, basepoint, R)
    cg = contact_graph(ball)
    cd = contact_distance(ball, v, w, cg)
    if cd.d is None:
        raise PreconditionError("v and w are not connected inside the ball")
    d = cd.d
    transcript = [f"d(v,w) = {d}: {cd.reason}"]
    if d <= 1 and v != w:
        rts = []
    else:
        hv, hw = _descend_hyp(ball, v), _descend_hyp(ball, w)
        rts = shortcut_routes(X, hv, hw, d) if v != w else []
    transcript.append(f"shortcut routes: {len(rts)}")
    covers, plus_routes = [], []
    nv, nw = carrier_vertices(ball, v), carrier_vertices(ball, w)
    for seq, ys in rts:
        y0, yn = ys[0], ys[-1]
        t0 = min((a for a in nv if ball.proj[a] == y0), key=lambda a: (ball.dist[a], a), default=None)
        tn = min((a for a in nw if ball.proj[a] == yn), key=lambda a: (ball.dist[a], a), default=None)
        if t0 is None or tn is None:
            raise PreconditionError("carrier lift not found in the exact region")
        Z = hull(ball, {t0, tn})
        phi, inc = _ball_piece(ball, Z.vertices, "Z")
        comps = [_carrier_component(X, h, a, b, f"N{h}") for h, a, b in zip(seq, ys, ys[1:])]
        comps.append(Component(phi, _dom_of(inc, tn), _dom_of(inc, t0), name="Z"))
        route = Route(X, list(ys) + [y0], comps)
        plus_routes.append(route)
        if any(verify_no_closed_elevations(route, c)[0] for c in covers):
            continue
        found = synthesize_cover(route, max_degree=max_degree)
        if isinstance(found, NonEssential):
            raise RuntimeError(f"augmented route {seq} {ys} is not essential")
        if not isinstance(found, CoverCertificate):
            transcript.append(f"route {seq} {ys}: {found.reason}")
            return found.__class__(f"no cover for an augmented route: {found.reason}", transcript)
        covers.append(found.cover)
        transcript.append(f"route {seq} {ys}: killed by {found.method} (degree {found.cover.degree})")
    cov = trivial_cover(X) if not covers else covers[0] if len(covers) == 1 else fiber_product(covers)
    for route in plus_routes:
        if not verify_no_closed_elevations(route, cov)[0]:
            raise RuntimeError("combined cover fails on an augmented route")
    transcript.append(f"combined cover degree {cov.degree}")
    w0 = cov.fibers[ball.proj[0]][0]
    checked = []
    for o in range(ball.n):
        if ball.proj[o] != ball.proj[0] or ball.dist[o] > r:
            continue
        inside = cov.lift_path(w0, tree_path(ball, o)) == w0
        gw = _hyp_translate(ball, o, w)
        if gw is None or gw not in cg.interior:
            checked.append((o, inside, None, False))
            continue
        dd = contact_distance(ball, v, gw, cg)
        checked.append((o, inside, dd.d, dd.certified))
    return cov, GuardReport(d, cd.certified, len(plus_routes), cov.degree, checked, r, transcript)
