"""Bounded developments of universal covers and their median geometry.

``DevBall(X, x0, R)`` builds the radius-R ball of the universal cover by BFS:
a new neighbour across an end is identified with an existing vertex exactly
when a square at the current vertex forces it (quadrangle completion).  The
region within ``safe`` of the root has exact distances, intervals and
hyperplane identities; everything that needs more raises
:class:`RadiusExhausted` instead of answering approximately.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .complex_core import CubeComplex
from .covers import CoveringMap, lift_complex


class RadiusExhausted(RuntimeError):
    def __init__(self, msg, needed=None):
        super().__init__(msg + (f" (try radius >= {needed})" if needed else ""))
        self.needed = needed


class ConsistencyError(RuntimeError):
    """An invariant that theory guarantees failed: a bug trap."""


@dataclass(frozen=True)
class ConvexSubcomplex:
    vertices: frozenset
    hyps: frozenset  # ball hyperplane ids crossing it
    complete: bool = True

    def __contains__(self, v):
        return v in self.vertices

    def __len__(self):
        return len(self.vertices)


class DevBall:
    """Radius-``R`` development of the universal cover of ``X`` at ``x0``."""

    def __init__(self, X: CubeComplex, x0=0, R=6):
        X.require_npc()
        self.base = X
        self.x0 = x0
        self.R = R
        self.safe = max(R // 2 - 1, 0)
        self._develop()
        lifted = lift_complex(X, lambda end, u: self.nbr[u].get(end), [(x0, 0)], order=lambda vl: vl[1])
        self.cov = CoveringMap(X, lifted)
        self.total = lifted.total
        if [lab[1] for lab in lifted.labels[0]] != list(range(len(self.proj))):
            raise ConsistencyError("ball vertex order")
        self._hyperplanes()

    # -- development --------------------------------------------------
    def _develop(self):
        X = self.base
        square_at = [dict() for _ in range(X.n_vertices)]
        for v in range(X.n_vertices):
            for ends, key, q in X.link_simplices[v]:
                if key[0] == 2:
                    square_at[v][frozenset(ends)] = (key, q, ends)
        self.proj = [self.x0]
        self.dist = [0]
        self.nbr = [dict()]
        layer = [0]
        for k in range(self.R):
            nxt = []
            for u in layer:
                v = self.proj[u]
                for end in X.ends_at[v]:
                    if end in self.nbr[u]:
                        continue
                    w = self._identify(u, end, square_at[v])
                    if w is None:
                        w = len(self.proj)
                        self.proj.append(X.head(end))
                        self.dist.append(k + 1)
                        self.nbr.append(dict())
                        nxt.append(w)
                    self.nbr[u][end] = w
                    back = X.reverse(end)
                    if back in self.nbr[w] and self.nbr[w][back] != u:
                        raise ConsistencyError(f"end {back} at {w} assigned twice")
                    self.nbr[w][back] = u
            layer = nxt
        self.n = len(self.proj)

    def _identify(self, u, eps, squares):
        X = self.base
        k = self.dist[u]
        found = set()
        for eta, t in self.nbr[u].items():
            if self.dist[t] != k - 1:
                continue
            hit = squares.get(frozenset((eps, eta)))
            if hit is None:
                continue
            key, q, ends = hit
            i = ends.index(eps)
            j = ends.index(eta)
            u2 = self.nbr[t].get(X.corner_end(key, q ^ (1 << j), i))
            if u2 is None:
                continue
            w = self.nbr[u2].get(X.corner_end(key, q ^ (1 << j) ^ (1 << i), j))
            if w is not None:
                found.add(w)
        if len(found) > 1:
            raise ConsistencyError(f"quadrangle completion ambiguous at {u}")
        return found.pop() if found else None

    def _hyperplanes(self):
        T = self.total
        parent = list(range(T.n_edges))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        self.crossings = set()
        if T.max_dim >= 2:
            for sid in range(T.count(2)):
                ce = T.cube_edges[(2, sid)]
                for a, b in ((ce[(0, 0)][0], ce[(2, 0)][0]), (ce[(0, 1)][0], ce[(1, 1)][0])):
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        roots = sorted({find(e) for e in range(T.n_edges)})
        rid = {r: i for i, r in enumerate(roots)}
        self.hyp_of_edge = [rid[find(e)] for e in range(T.n_edges)]
        self.hyp_edges = [[] for _ in roots]
        for e, h in enumerate(self.hyp_of_edge):
            self.hyp_edges[h].append(e)
        if T.max_dim >= 2:
            for sid in range(T.count(2)):
                ce = T.cube_edges[(2, sid)]
                h1, h2 = self.hyp_of_edge[ce[(0, 0)][0]], self.hyp_of_edge[ce[(0, 1)][0]]
                self.crossings.add((min(h1, h2), max(h1, h2)))
        self.n_hyp = len(roots)

    # -- space-over-X protocol -----------------------------------------
    def proj_vertex(self, w):
        return self.proj[w]

    def lift_end(self, w, end):
        return self.cov.lift_end(w, end)

    def cube_at(self, key, q, w):
        return self.cov.cube_at(key, q, w)

    def step(self, w, end):
        return self.nbr[w].get(end)

    # -- metric ---------------------------------------------------------
    def neighbors(self, u):
        return sorted(self.nbr[u].values())

    def edge(self, u, v):
        for end, w in self.nbr[u].items():
            if w == v:
                return self.cov.lift_end(u, end)[0]
        return None

    def dists(self, s):
        return _bfs(self, s)

    def d(self, a, b):
        return self.dists(a)[b]

    def interior(self, v, margin=0):
        return self.dist[v] <= self.safe - margin

    def require_safe(self, vertices, what="set"):
        far = [v for v in vertices if self.dist[v] > self.safe]
        if far:
            worst = max(self.dist[v] for v in far)
            raise RadiusExhausted(f"{what} reaches distance {worst} beyond the exact region {self.safe}", 2 * worst + 2)

    def edge_hyp(self, u, v):
        return self.hyp_of_edge[self.edge(u, v)]

    def hyps_of(self, vertices):
        vs = set(vertices)
        out = set()
        for v in vs:
            for end, w in self.nbr[v].items():
                if w in vs:
                    out.add(self.hyp_of_edge[self.cov.lift_end(v, end)[0]])
        return frozenset(out)

    def geodesic(self, a, b):
        """One geodesic vertex path from ``a`` to ``b`` (exact inside the safe region)."""
        db = self.dists(b)
        path = [a]
        while path[-1] != b:
            u = path[-1]
            path.append(min(w for w in self.neighbors(u) if db[w] == db[u] - 1))
        return path

    def separating(self, a, b):
        """Hyperplanes separating vertices ``a`` and ``b``."""
        p = self.geodesic(a, b)
        return frozenset(self.edge_hyp(x, y) for x, y in zip(p, p[1:]))

    def side(self, h, x):
        """0 or 1: which corner of a dual edge of ``h`` is on ``x``'s side."""
        e = _safe_edge(self, h)
        if e is None:
            e = self.hyp_edges[h][0]
        a, b = self.total.edge_corners(e)
        da = self.dists(x)
        return 0 if da[a] < da[b] else 1

    # -- convexity ------------------------------------------------------------
    def convex(self, vertices, complete=True) -> ConvexSubcomplex:
        vs = frozenset(vertices)
        return ConvexSubcomplex(vs, self.hyps_of(vs), complete)

    def interval(self, a, b):
        da, db = self.dists(a), self.dists(b)
        n = da[b]
        return frozenset(x for x in range(self.n) if da[x] + db[x] == n)

    def vertex_cells(self, vertices):
        """All cells of the ball with every corner in ``vertices``."""
        vs = set(vertices)
        T = self.total
        out = set()
        for key in T.keys():
            if all(c in vs for c in T.cell(key).corners):
                out.add(key)
        return frozenset(out)


def _bfs(ball, s):
    cache = ball.__dict__.setdefault("_dcache", {})
    if s in cache:
        return cache[s]
    dist = [None] * ball.n
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for w in ball.nbr[u].values():
            if dist[w] is None:
                dist[w] = dist[u] + 1
                q.append(w)
    if len(cache) > 4096:
        cache.clear()
    cache[s] = dist
    return dist


def develop(X, basepoint=0, R=6) -> DevBall:
    return DevBall(X, basepoint, R)


# -- hulls, gates, projections ---------------------------------------------
def _reach(ball, start, allowed, limit=None, clip=None):
    """Vertices reachable from ``start`` crossing only hyperplanes in ``allowed``.

    Leaving ``limit`` raises; vertices beyond ``clip`` are silently skipped.
    """
    seen = {start}
    q = deque([start])
    while q:
        u = q.popleft()
        for end, w in ball.nbr[u].items():
            if w in seen:
                continue
            te = ball.cov.lift_end(u, end)[0]
            if ball.hyp_of_edge[te] in allowed:
                if clip is not None and ball.dist[w] > clip:
                    continue
                if limit is not None and ball.dist[w] > limit:
                    raise RadiusExhausted("set leaves the exact region", 2 * ball.dist[w] + 2)
                seen.add(w)
                q.append(w)
    return frozenset(seen)


def hull(ball: DevBall, S) -> ConvexSubcomplex:
    """Smallest convex subcomplex containing the vertex set ``S``."""
    S = sorted(set(S))
    if not S:
        raise ValueError("empty set")
    ball.require_safe(S, "hull input")
    s0 = S[0]
    T = set()
    for s in S[1:]:
        T |= ball.separating(s0, s)
    verts = _reach(ball, s0, T, limit=ball.safe)
    return ConvexSubcomplex(verts, frozenset(T), True)


def is_convex(ball, vertices):
    vs = set(vertices)
    if not vs:
        return True
    return hull(ball, vs).vertices == frozenset(vs)


def gate(ball: DevBall, A: ConvexSubcomplex, x):
    """Nearest vertex of ``A`` to ``x``, certified as a local minimum on ``A``."""
    ball.require_safe([x], "gate query")
    dx = ball.dists(x)
    cand = [a for a in A.vertices if ball.dist[a] <= ball.safe]
    if not cand:
        raise RadiusExhausted("convex set has no vertex in the exact region", 2 * ball.R)
    g = min(cand, key=lambda a: (dx[a], a))
    # certify: no A-neighbour is closer and all A-neighbours are inside the ball
    for w in ball.neighbors(g):
        if w in A.vertices and dx[w] < dx[g]:
            raise ConsistencyError("gate not a local minimum")
    if not A.complete and len(ball.nbr[g]) < len(ball.base.ends_at[ball.proj[g]]):
        raise RadiusExhausted("gate candidate on the ball boundary", 2 * ball.R)
    return g


def project(ball, A: ConvexSubcomplex, B: ConvexSubcomplex) -> ConvexSubcomplex:
    """``Pi_A(B)``: hull of the gates of ``B``'s vertices."""
    return hull(ball, {gate(ball, A, b) for b in B.vertices})


def separating_hyps(ball, A: ConvexSubcomplex, B: ConvexSubcomplex):
    """Hyperplanes with ``A`` on one side and ``B`` on the other."""
    a = min(A.vertices)
    b = gate(ball, B, a)
    a = gate(ball, A, b)
    out = set()
    for h in ball.separating(a, b):
        sa = {ball.side(h, x) for x in A.vertices}
        sb = {ball.side(h, x) for x in B.vertices}
        if len(sa) == 1 and len(sb) == 1 and sa != sb:
            out.add(h)
    return frozenset(out)


@dataclass
class BridgeDecomposition:
    A: ConvexSubcomplex
    B: ConvexSubcomplex
    C: ConvexSubcomplex
    C_B: ConvexSubcomplex
    D: ConvexSubcomplex
    a: int
    b: int
    region: ConvexSubcomplex
    chart: dict  # region vertex -> (C vertex, D vertex)
    separators: frozenset
    checks: dict = field(default_factory=dict)


def product_chart(ball, P: ConvexSubcomplex, F1: ConvexSubcomplex, F2: ConvexSubcomplex):
    """Map ``x -> (gate into F1, gate into F2)``; verify it is a cube-product chart."""
    chart = {x: (gate(ball, F1, x), gate(ball, F2, x)) for x in P.vertices}
    ok = len(set(chart.values())) == len(chart) == len(F1) * len(F2)
    for x in P.vertices:
        for w in ball.neighbors(x):
            if w not in P.vertices:
                continue
            (c1, d1), (c2, d2) = chart[x], chart[w]
            moved = (c1 != c2) + (d1 != d2)
            if moved != 1:
                ok = False
            elif c1 != c2 and ball.edge(c1, c2) is None:
                ok = False
            elif d1 != d2 and ball.edge(d1, d2) is None:
                ok = False
    return chart, ok


def bridge(ball, A: ConvexSubcomplex, B: ConvexSubcomplex) -> BridgeDecomposition:
    C = project(ball, A, B)
    CB = project(ball, B, A)
    a = min(C.vertices)
    b = gate(ball, B, a)
    D = hull(ball, {a, b})
    region = hull(ball, set(C.vertices) | set(D.vertices))
    chart, chart_ok = product_chart(ball, region, C, D)
    seps = separating_hyps(ball, A, B)
    checks = {
        "H(C) = H(A) & H(B)": C.hyps == (A.hyps & B.hyps),
        "region & A = C": (region.vertices & A.vertices) == C.vertices,
        "region & B = Pi_B(A)": (region.vertices & B.vertices) == CB.vertices,
        "H(D) = separators": D.hyps == seps,
        "product chart": chart_ok,
    }
    if not all(checks.values()):
        bad = [k for k, v in checks.items() if not v]
        raise ConsistencyError(f"bridge invariants failed: {bad}")
    return BridgeDecomposition(A, B, C, CB, D, a, b, region, chart, seps, checks)


# -- transversality and orthogonal complements -------------------------------
def crosses(ball, h1, h2):
    """Whether two ball hyperplanes cross (exact for hyperplanes meeting the safe region)."""
    if h1 == h2:
        return False
    if (min(h1, h2), max(h1, h2)) in ball.crossings:
        return True
    e1 = _safe_edge(ball, h1)
    e2 = _safe_edge(ball, h2)
    if e1 is None or e2 is None:
        raise RadiusExhausted("hyperplane misses the exact region", 2 * ball.R)
    # a crossing square would lie in the hull of the two edges
    H = hull(ball, set(ball.total.edge_corners(e1)) | set(ball.total.edge_corners(e2)))
    return h1 in H.hyps and h2 in H.hyps and _has_square(ball, H.vertices, h1, h2)


def _safe_edge(ball, h):
    cache = ball.__dict__.setdefault("_near_edge", {})
    if h not in cache:
        cache[h] = _nearest_edge(ball, h)
    return cache[h]


def _nearest_edge(ball, h):
    T = ball.total
    best = None
    for e in ball.hyp_edges[h]:
        a, b = T.edge_corners(e)
        m = max(ball.dist[a], ball.dist[b])
        if m <= ball.safe and (best is None or m < best[0]):
            best = (m, e)
    return None if best is None else best[1]


def _has_square(ball, vertices, h1, h2):
    T = ball.total
    if T.max_dim < 2:
        return False
    for sid in range(T.count(2)):
        c = T.cell((2, sid))
        if not all(v in vertices for v in c.corners):
            continue
        ce = T.cube_edges[(2, sid)]
        pair = {ball.hyp_of_edge[ce[(0, 0)][0]], ball.hyp_of_edge[ce[(0, 1)][0]]}
        if pair == {h1, h2}:
            return True
    return False


def contact(ball, h1, h2):
    """Whether carriers of two hyperplanes share a vertex (cross or osculate)."""
    if h1 == h2:
        return True
    T = ball.total
    v1 = {v for e in ball.hyp_edges[h1] for v in T.edge_corners(e)}
    v2 = {v for e in ball.hyp_edges[h2] for v in T.edge_corners(e)}
    return bool(v1 & v2)


@dataclass
class OrthComplement:
    A: ConvexSubcomplex
    x: int
    B: ConvexSubcomplex
    transverse: frozenset
    region: ConvexSubcomplex
    chart: dict
    chart_ok: bool

    def slice(self, ball, w):
        """The parallel copy of ``A`` through ``w`` in ``B``."""
        return ConvexSubcomplex(_reach(ball, w, self.A.hyps), self.A.hyps, self.A.complete)


def transverse_set(ball, A: ConvexSubcomplex, candidates):
    out = set()
    for h in candidates:
        if h in A.hyps:
            continue
        if all(crosses(ball, h, k) for k in A.hyps):
            out.add(h)
    return frozenset(out)


def orthogonal_complement(ball, A: ConvexSubcomplex, x) -> OrthComplement:
    """Largest convex subcomplex through ``x`` orthogonal to ``A``.

    Explored by BFS across hyperplanes transverse to all of ``A``'s; the part
    within the exact region is returned, flagged incomplete when it touches
    the region's edge.
    """
    if x not in A.vertices:
        raise ValueError("base vertex must lie in A")
    seen = {x}
    q = deque([x])
    T = set()
    rejected = set()
    complete = True
    while q:
        u = q.popleft()
        for end, w in sorted(ball.nbr[u].items()):
            if w in seen:
                continue
            h = ball.hyp_of_edge[ball.cov.lift_end(u, end)[0]]
            if h in rejected:
                continue
            if h not in T:
                if h in A.hyps or not all(crosses(ball, h, k) for k in A.hyps):
                    rejected.add(h)
                    continue
                T.add(h)
            if ball.dist[w] > ball.safe:
                complete = False
                continue
            seen.add(w)
            q.append(w)
    B = ConvexSubcomplex(frozenset(seen), ball.hyps_of(seen), complete)
    region_v = set()
    for w in B.vertices:
        for v in _reach(ball, w, A.hyps, limit=None):
            if ball.dist[v] <= ball.safe:
                region_v.add(v)
    region = ConvexSubcomplex(frozenset(region_v), ball.hyps_of(region_v), complete and A.complete)
    chart = {}
    ok = True
    for v in region.vertices:
        a = gate(ball, A, v) if A.complete else None
        b = gate(ball, B, v) if B.complete else None
        chart[v] = (a, b)
    if A.complete and B.complete:
        ok = len(set(chart.values())) == len(chart) == len(A) * len(B)
    return OrthComplement(A, x, B, frozenset(T), region, chart, ok)


# -- deck transformations ---------------------------------------------------------
@dataclass
class PartialDeck:
    """Deck transformation ``g`` of the universal cover with ``g(root) = image``."""

    ball: DevBall = field(repr=False)
    image: int
    status: str  # "extends-to-ball" or "boundary-truncated"

    def __call__(self, x):
        return deck_apply(self.ball, self.image, x)


def tree_path(ball, x):
    """Base ends along a BFS tree path from the root to ``x``."""
    cache = ball.__dict__.setdefault("_tree", None)
    if cache is None:
        parent = {0: None}
        q = deque([0])
        while q:
            u = q.popleft()
            for end, w in sorted(ball.nbr[u].items()):
                if w not in parent:
                    parent[w] = (u, end)
                    q.append(w)
        ball._tree = cache = parent
    ends = []
    while cache[x] is not None:
        u, end = cache[x]
        ends.append(end)
        x = u
    return ends[::-1]


def deck_apply(ball, image, x):
    """``g(x)`` where ``g(root) = image``; None if it leaves the ball."""
    w = image
    for end in tree_path(ball, x):
        w = ball.nbr[w].get(end)
        if w is None:
            return None
    return w


def deck_elements(ball, r):
    """Deck transformations moving the root by at most ``2 * (R - r)``, with status."""
    out = []
    for o in range(ball.n):
        if ball.proj[o] != ball.proj[0]:
            continue
        status = "extends-to-ball" if ball.dist[o] + r <= ball.R else "boundary-truncated"
        if ball.dist[o] > ball.R - r and status == "boundary-truncated" and ball.dist[o] > ball.safe:
            continue
        out.append(PartialDeck(ball, o, status))
    return out


def deck_translation_length(ball, g):
    return ball.dist[g.image]


@dataclass
class StabilizerResult:
    elements: list
    exact: bool


def stabilizer_in_ball(ball, A: ConvexSubcomplex, r=None):
    """Deck elements ``g`` with ``g(a) in A`` and ``g(H(A)) = H(A)`` on the visible part."""
    r = ball.safe if r is None else r
    a0 = min(A.vertices, key=lambda v: (ball.dist[v], v))
    out = []
    for g in deck_elements(ball, 0):
        if ball.dist[g.image] > r:
            continue
        ga = g(a0)
        if ga is None or ga not in A.vertices:
            continue
        if _stabilizes_hyps(ball, A, g):
            out.append(g)
    exact = A.complete
    return StabilizerResult(out, exact)


def _stabilizes_hyps(ball, A, g):
    T = ball.total
    for e in range(T.n_edges):
        a, b = T.edge_corners(e)
        if a in A.vertices and b in A.vertices:
            ga, gb = g(a), g(b)
            if ga is None or gb is None or max(ball.dist[ga], ball.dist[gb]) > ball.safe:
                continue  # not visible in the exact region
            ge = ball.edge(ga, gb)
            if ge is None or ball.hyp_of_edge[ge] not in A.hyps:
                if ga in A.vertices and gb in A.vertices:
                    continue
                return False
    return True


# -- elevations in the ball ----------------------------------------------------
def elevation_in_ball(ball, phi, y, w):
    """Vertex set of the based elevation of ``phi`` at ``(y, w)`` in the ball."""
    from .covers import based_elevation

    el = based_elevation(phi, ball, y, w)
    verts = el.image_vertices
    complete = el.complete and all(ball.dist[v] <= ball.safe for v in verts)
    return ConvexSubcomplex(verts, ball.hyps_of(verts), complete), el


# -- proposition checks ------------------------------------------------------------
@dataclass
class PropReport:
    checks: dict
    exact: bool
    data: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())


def _quotient_embeds(ball, S: ConvexSubcomplex, stab):
    """Vertices of ``S`` with equal projection to X differ by a found stabilizer element."""
    by_proj = {}
    for v in S.vertices:
        if ball.dist[v] <= ball.safe:
            by_proj.setdefault(ball.proj[v], []).append(v)
    # orbits under the group generated by the found elements, restricted to S
    verts = set().union(*by_proj.values()) if by_proj else set()
    adj = {v: set() for v in verts}
    for g in stab:
        for v in verts:
            gv = g(v)
            if gv in adj:
                adj[v].add(gv)
                adj[gv].add(v)
    for vs in by_proj.values():
        orbit = _reach_set(adj, vs[0])
        if any(v not in orbit for v in vs[1:]):
            return False
    return True


def _reach_set(adj, s):
    seen = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in adj[u] - seen:
            seen.add(w)
            q.append(w)
    return seen


def verify_projection_prop(X, A_cells, B_cells, R=8, elev_b=None):
    """Check ``G_C = G_A & G_B`` and that ``C / G_C`` embeds, for elevations in a ball.

    ``A_cells``/``B_cells`` are locally convex subcomplexes of X.  Ã is the
    elevation through the root; B̃ through ``elev_b`` (default: the root's
    lift of B's least vertex).
    """
    from .complex_core import inclusion, pathology_report

    rep = pathology_report(X)
    if rep.classification not in ("weakly-special", "directly-special"):
        raise ValueError("X must be weakly special")
    ball = DevBall(X, 0, R)
    phiA, phiB = inclusion(X, A_cells), inclusion(X, B_cells)
    A, _ = elevation_in_ball(ball, phiA, _lift_index(phiA, X, 0), 0)
    if elev_b is None:
        b0 = min(phiB.vertex(y) for y in range(phiB.domain.n_vertices))
        cand = [w for w in range(ball.n) if ball.proj[w] == b0]
        elev_b = min(cand, key=lambda w: (ball.dist[w], w))
    yb = _lift_index(phiB, X, ball.proj[elev_b])
    B, _ = elevation_in_ball(ball, phiB, yb, elev_b)
    full = A.hyps & B.hyps
    # stabilizers are read off the unclipped elevations: an elevation of an
    # embedded subcomplex is the only one through each of its vertices
    sA = stabilizer_in_ball(ball, A).elements
    sB = stabilizer_in_ball(ball, B).elements
    A = _clip(ball, A)
    B = _clip(ball, B)
    C = project(ball, A, B)
    # gates of a clipped B only see part of C; regrow it inside the exact region
    # from the hyperplanes common to both elevations (Ĥ(C) = Ĥ(A) & Ĥ(B))
    cv = _reach(ball, min(C.vertices, key=lambda v: (ball.dist[v], v)), full, clip=ball.safe)
    C = ConvexSubcomplex(cv, ball.hyps_of(cv), A.complete and B.complete)
    sC = stabilizer_in_ball(ball, C).elements
    ia = {g.image for g in sA}
    ib = {g.image for g in sB}
    ic = {g.image for g in sC}
    inter = ia & ib
    checks = {
        "G_C = G_A & G_B": ic == inter,
        "C/G_C embeds": _quotient_embeds(ball, C, sC),
    }
    return PropReport(checks, A.complete and B.complete, {"C": C, "G_C": sorted(ic)})


def _lift_index(phi, X, x):
    ys = [y for y in range(phi.domain.n_vertices) if phi.vertex(y) == x]
    if not ys:
        raise ValueError(f"vertex {x} not in the subcomplex")
    return ys[0]


def _clip(ball, S):
    vs = frozenset(v for v in S.vertices if ball.dist[v] <= ball.safe)
    return ConvexSubcomplex(vs, ball.hyps_of(vs), S.complete)


def verify_orthcomp_prop(X, A_cells, R=8, x=0):
    """Check the orthogonal-complement proposition for the elevation of A through the root."""
    from .complex_core import inclusion, pathology_report

    rep = pathology_report(X)
    if rep.classification not in ("weakly-special", "directly-special"):
        raise ValueError("X must be weakly special")
    ball = DevBall(X, 0, R)
    phiA = inclusion(X, A_cells)
    A, _ = elevation_in_ball(ball, phiA, _lift_index(phiA, X, ball.proj[x]), x)
    A = _clip(ball, A)
    oc = orthogonal_complement(ball, A, x)
    B = oc.B
    sA = stabilizer_in_ball(ball, A).elements
    sB = stabilizer_in_ball(ball, B).elements
    commute = True
    for g in sA:
        for h in sB:
            gh = g(h.image)
            hg = h(g.image)
            if gh is not None and hg is not None and gh != hg:
                commute = False
    split = True
    for g in sA:
        for w in B.vertices:
            # G_A acts trivially on the B factor: gate of g(w) into B is w
            gw = g(w)
            if gw is None or ball.dist[gw] > ball.safe:
                continue
            if gate(ball, _as_complete(B), gw) != w:
                split = False
    for h in sB:
        for a in A.vertices:
            ha = h(a)
            if ha is None or ball.dist[ha] > ball.safe:
                continue
            if gate(ball, _as_complete(A), ha) != a:
                split = False
    checks = {
        "B/G_B embeds": _quotient_embeds(ball, B, sB),
        "G_A and G_B commute": commute,
        "product action split": split,
        "H(B) transverse to H(A)": all(crosses(ball, h, k) for h in B.hyps for k in A.hyps),
    }
    return PropReport(checks, A.complete and B.complete, {"B": B, "G_A": sorted(g.image for g in sA), "G_B": sorted(g.image for g in sB)})


def _as_complete(S):
    return ConvexSubcomplex(S.vertices, S.hyps, True)
