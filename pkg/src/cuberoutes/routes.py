"""Routes, their elevations, and the cover-synthesis pipeline.

A route ``(y0, Y1, y1, ..., Yn, yn)`` strings together local isometries
``Yi -> X`` with marked entry/exit vertices.  An elevation to a cover (or to
a developed ball) chooses a based elevation of each piece at the previous
exit lift, and then a lift of the next exit inside it.

Certificates are checked by :func:`verify_no_closed_elevations`, which walks
the cover's own cells and projection and shares no code with the searches
that produce covers.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .complex_core import (
    CubeComplex, LocalIsometry, PreconditionError, SubcomplexRef, compose, inclusion,
    inter_osculating_hyperplanes, is_local_isometry, pathology_report,
)
from .covers import (
    CoveringMap, LiftError, Unknown, abelian_candidates, based_elevation, compose_covers,
    fiber_product, group_cover, regularize, trivial_cover,
)
from .development import (
    ConvexSubcomplex, DevBall, RadiusExhausted, elevation_in_ball, gate, orthogonal_complement,
    project,
)


# -- data -------------------------------------------------------------------------
class Component:
    """One piece ``phi: Y -> X`` of a route with entry/exit vertices of Y."""

    def __init__(self, phi: LocalIsometry, entry, exit, name=None):
        self.phi = phi
        self.entry = entry
        self.exit = exit
        self.name = name
        if not (0 <= entry < phi.domain.n_vertices and 0 <= exit < phi.domain.n_vertices):
            raise ValueError("marked vertex outside the component")

    @classmethod
    def from_sub(cls, X, sub, entry, exit, name=None, vertex_ids="ambient"):
        if not isinstance(sub, SubcomplexRef):
            sub = X.subcomplex(sub)
        phi = inclusion(X, sub)
        if vertex_ids == "ambient":
            entry = _domain_vertex(phi, entry)
            exit = _domain_vertex(phi, exit)
        return cls(phi, entry, exit, name)

    @property
    def embedded(self):
        if self.phi.source_sub is not None:
            return True
        return len(self.phi.image_cells()) == len(self.phi.cells)

    @property
    def cells(self):
        """Image cells in X."""
        return self.phi.image_cells()

    @property
    def entry_x(self):
        return self.phi.vertex(self.entry)

    @property
    def exit_x(self):
        return self.phi.vertex(self.exit)

    def __repr__(self):
        return f"Component({self.name or '?'}, {self.entry_x}->{self.exit_x}, {self.phi.domain.n_vertices}v)"


def _domain_vertex(phi, x):
    for y in range(phi.domain.n_vertices):
        if phi.vertex(y) == x:
            return y
    raise ValueError(f"vertex {x} not in the component image")


class Route:
    def __init__(self, X: CubeComplex, vertices, components):
        if len(vertices) != len(components) + 1:
            raise ValueError("need n+1 vertices for n components")
        self.X = X
        self.vertices = list(vertices)
        self.components = list(components)
        for i, c in enumerate(self.components, start=1):
            if c.entry_x != self.vertices[i - 1] or c.exit_x != self.vertices[i]:
                raise ValueError(f"component {i} marked vertices do not match the route")

    @property
    def n(self):
        return len(self.components)

    @property
    def closed(self):
        return self.vertices[0] == self.vertices[-1]

    @property
    def embedded(self):
        return all(c.embedded for c in self.components)

    def __repr__(self):
        return f"Route(n={self.n}, vertices={self.vertices})"

    def key(self):
        """Canonical form for deduplication (components by image and marked vertices)."""
        parts = []
        for c in self.components:
            img = tuple(sorted(k for k, _ in c.phi.cells.values()))
            parts.append((img, c.entry_x, c.exit_x, c.phi.domain.n_vertices))
        return tuple(self.vertices), tuple(parts)


def make_route(X, vertices, subs, names=None):
    """Embedded route from ambient vertex ids and subcomplex cell sets."""
    comps = []
    for i, s in enumerate(subs, start=1):
        nm = names[i - 1] if names else f"Y{i}"
        comps.append(Component.from_sub(X, s, vertices[i - 1], vertices[i], name=nm))
    return Route(X, vertices, comps)


# -- paths along routes ------------------------------------------------------------
def component_paths(comp: Component, L):
    """All edge paths in Y from entry to exit of length <= L, as Y-ends."""
    Y = comp.phi.domain
    out = []

    def rec(v, acc):
        if v == comp.exit:
            out.append(tuple(acc))
        if len(acc) == L:
            return
        for end in Y.ends_at[v]:
            acc.append(end)
            rec(Y.head(end), acc)
            acc.pop()

    rec(comp.entry, [])
    out.sort(key=lambda p: (len(p), p))
    return out


@dataclass
class SegmentedPath:
    segments: tuple  # per component: tuple of X-ends

    @property
    def realization(self):
        return tuple(e for seg in self.segments for e in seg)


def paths_along(route: Route, L):
    per = [[tuple(c.phi.end(e) for e in p) for p in component_paths(c, L)] for c in route.components]
    for combo in itertools.product(*per):
        yield SegmentedPath(combo)


# -- elevations of routes --------------------------------------------------
@dataclass
class RouteElevation:
    lifts: tuple  # (w0, ..., wn) in the space
    pieces: tuple  # per component: (Elevation, entry vertex of domain, exit vertex of domain)

    @property
    def closed(self):
        return self.lifts[0] == self.lifts[-1]


def _elev_cache(space):
    return space.__dict__.setdefault("_route_elev_cache", {})


def component_elevation(space, comp, w):
    cache = _elev_cache(space)
    k = (id(comp.phi), comp.entry, w)
    if k not in cache:
        cache[k] = based_elevation(comp.phi, space, comp.entry, w)
    return cache[k]


def _exits(el, comp):
    out = []
    for yh in range(el.domain.n_vertices):
        if el.descent_vertex(yh) == comp.exit:
            out.append((el.image_vertex(yh), yh))
    return sorted(out)


def route_elevations(route: Route, space, starts=None, limit=100000):
    """Enumerate elevations of ``route`` to ``space`` (a cover or a ball)."""
    if starts is None:
        starts = space.fibers[route.vertices[0]]
    out = []

    def rec(i, w, lifts, pieces):
        if len(out) >= limit:
            return
        if i == route.n:
            out.append(RouteElevation(tuple(lifts), tuple(pieces)))
            return
        comp = route.components[i]
        el = component_elevation(space, comp, w)
        entry = el.vertex(comp.entry, w)
        for x, yh in _exits(el, comp):
            rec(i + 1, x, lifts + [x], pieces + [(el, entry, yh)])

    for w0 in starts:
        rec(0, w0, [w0], [])
    return out


elevations_of_route = route_elevations


def closed_elevations(route, space, limit=100000):
    return [r for r in route_elevations(route, space, limit=limit) if r.closed]


def route_in_cover(re: RouteElevation, route: Route, cov: CoveringMap) -> Route:
    """An elevation of a route viewed as a route in the cover's total space."""
    comps = []
    for (el, entry, ex), c in zip(re.pieces, route.components):
        comps.append(Component(el.to_total, entry, ex, name=c.name))
    return Route(cov.total, list(re.lifts), comps)


def embedded_route_in_cover(re: RouteElevation, route: Route, cov: CoveringMap) -> Route:
    """As :func:`route_in_cover`, with embedded pieces replaced by image subcomplexes."""
    comps = []
    T = cov.total
    for i, ((el, entry, ex), c) in enumerate(zip(re.pieces, route.components)):
        if el.embedded:
            comps.append(Component.from_sub(T, el.image_cells, re.lifts[i], re.lifts[i + 1], name=c.name))
        else:
            comps.append(Component(el.to_total, entry, ex, name=c.name))
    return Route(T, list(re.lifts), comps)


# -- the independent verifier ---------------------------------------------------
def _total_ends(cov, w):
    """Ends at ``w`` with their projected base ends (reads only cells + projection)."""
    T = cov.total
    out = []
    for te, s in T.ends_at[w]:
        _, be = cov.project((1, te))
        out.append(((be, s), T.head((te, s))))
    return out


def verify_no_closed_elevations(route: Route, cov: CoveringMap):
    """Exhaustive, independent check; returns ``(ok, transcript lines)``."""
    T = cov.total
    proj_v = [cov.project((0, w))[1] for w in range(T.n_vertices)]
    reach_cache = {}

    def reach(i, w):
        k = (i, w)
        if k in reach_cache:
            return reach_cache[k]
        comp = route.components[i]
        Y = comp.phi.domain
        seen = {(comp.entry, w)}
        q = deque(seen)
        while q:
            y, x = q.popleft()
            ends = _total_ends(cov, x)
            for f in Y.ends_at[y]:
                target = comp.phi.end(f)
                nxt = [h for be, h in ends if be == target]
                if len(nxt) != 1:
                    raise ValueError("projection is not a covering at vertex %d" % x)
                st = (Y.head(f), nxt[0])
                if st not in seen:
                    seen.add(st)
                    q.append(st)
        res = sorted({x for y, x in seen if y == comp.exit})
        reach_cache[k] = res
        return res

    lines = [f"cover vertices {T.n_vertices} route n={route.n}"]
    ok = True
    starts = [w for w in range(T.n_vertices) if proj_v[w] == route.vertices[0]]
    for w0 in starts:
        cur = {w0}
        sizes = []
        for i in range(route.n):
            nxt = set()
            for w in cur:
                nxt.update(reach(i, w))
            cur = nxt
            sizes.append(len(cur))
        closed = w0 in cur
        lines.append(f"start {w0} reach {' '.join(map(str, sizes))} closed {'yes' if closed else 'no'}")
        if closed:
            ok = False
    lines.append("result " + ("no closed elevations" if ok else "closed elevation found"))
    return ok, lines


# -- essentialness ------------------------------------------------------------
@dataclass
class NonEssential:
    witness: tuple

    def __bool__(self):
        return False


@dataclass
class Essential:
    how: str
    detail: object = None


def _ball_stage_sets(route, ball, upto=None):
    """Per stage, lifts reachable from the root, parents, and completeness."""
    upto = route.n if upto is None else upto
    stages = [{0: None}]
    complete = True
    for i in range(upto):
        comp = route.components[i]
        nxt = {}
        for w in sorted(stages[-1]):
            S, el = _ball_elev(ball, comp, w)
            if not S.complete:
                complete = False
            for x, _yh in _exits(el, comp):
                nxt.setdefault(x, w)
        stages.append(nxt)
    return stages, complete


def is_essential(route: Route, R=8, cover_hints=(), ball=None):
    if not route.closed:
        raise PreconditionError("route is not closed")
    ball = ball or DevBall(route.X, route.vertices[0], R)
    stages, complete = _ball_stage_sets(route, ball)
    if 0 in stages[-1]:
        path = [0]
        for i in range(route.n, 0, -1):
            path.append(stages[i][path[-1]])
        return NonEssential(tuple(reversed(path)))
    if complete:
        return Essential("ball-exhaustion", {"radius": ball.R})
    for cov in cover_hints:
        ok, lines = verify_no_closed_elevations(route, cov)
        if ok:
            return Essential("cover", {"degree": cov.degree, "transcript": lines})
    return Unknown("ball exploration incomplete and no cover hint kills the route")


# -- property (Trap) ---------------------------------------------------------------
def check_trap(route: Route):
    if route.n < 4:
        raise PreconditionError("(Trap) needs n >= 4")
    if not route.embedded:
        raise PreconditionError("route must be embedded")
    X = route.X
    H = X.hyp_of_edge
    Y1, Y2 = route.components[0].cells, route.components[1].cells
    hyps_in = [{H[k[1]] for k in c.cells if k[0] == 1} for c in route.components]
    wit = []
    for y in sorted(k[1] for k in Y1 if k[0] == 0 and k in Y2):
        for end in X.ends_at[y]:
            e = end[0]
            if (1, e) in Y1 and (1, e) not in Y2:
                for i in range(2, route.n):
                    if H[e] in hyps_in[i - 1]:
                        wit.append((y, e, i))
    return not wit, sorted(set(wit))


# -- chains in the universal cover -------------------------------------------------
@dataclass
class ChainStep:
    S: ConvexSubcomplex
    elevation: object
    entry: int
    exit: int


def ball_chains(route, ball, upto, limit=20000):
    """Elevations of the first ``upto`` pieces starting at the root, up to deck action."""
    out = []
    truncated = False

    def rec(i, w, acc):
        nonlocal truncated
        if len(out) >= limit:
            truncated = True
            return
        if i == upto:
            out.append(list(acc))
            return
        comp = route.components[i]
        S, el = _ball_elev(ball, comp, w)
        for x, _yh in _exits(el, comp):
            acc.append(ChainStep(S, el, w, x))
            rec(i + 1, x, acc)
            acc.pop()

    rec(0, 0, [])
    return out, truncated


def _ball_elev(ball, comp, w):
    cache = ball.__dict__.setdefault("_conv_cache", {})
    k = (id(comp.phi), comp.entry, w)
    if k not in cache:
        cache[k] = elevation_in_ball(ball, comp.phi, comp.entry, w)
    return cache[k]


def _chain_exact(ball, chain):
    return all(st.S.complete for st in chain)


@dataclass
class HypResult:
    status: str  # "holds", "fails", "unknown"
    semantics: str = ""  # "exact" or "in-ball" for holds
    witness: object = None

    def __bool__(self):
        return self.status == "holds"


def check_hyp_j(route, j, R=8, ball=None):
    if not 2 <= j <= route.n - 1:
        raise PreconditionError("need 2 <= j <= n-1")
    if j == 2:
        return HypResult("holds", "exact")
    try:
        ball = ball or DevBall(route.X, route.vertices[0], R)
        chains, truncated = ball_chains(route, ball, j)
    except RadiusExhausted as exc:
        return HypResult("unknown", witness=str(exc))
    exact = not truncated
    for chain in chains:
        H1, Hj = chain[0].S.hyps, chain[j - 1].S.hyps
        inter = H1 & Hj
        if not _chain_exact(ball, chain[:j]):
            exact = False
        for i in range(1, j - 1):
            missing = inter - chain[i].S.hyps
            if missing and chain[i].S.complete and _near(ball, chain, missing):
                h = min(missing)
                return HypResult("fails", witness={"chain": [st.exit for st in chain], "i": i + 1, "hyperplane": h})
            if missing:
                exact = False
    return HypResult("holds", "exact" if exact else "in-ball")


def _near(ball, chain, hyps):
    """Witness hyperplanes have a dual edge in the exact region of the ball."""
    from .development import _safe_edge

    return all(_safe_edge(ball, h) is not None for h in hyps)


def hyp_index(route, R=8, ball=None):
    """Largest j with (Hyp_l) for all 2 <= l <= j (lower bound when not exact)."""
    j = 2
    for l in range(3, route.n):
        if check_hyp_j(route, l, R, ball=ball).status != "holds":
            break
        j = l
    return j


# -- the poset P_j ------------------------------------------------------------------
@dataclass
class PjPoset:
    j: int
    elements: list  # frozensets of X-cells (subcomplexes of Y1)
    witnesses: list  # per element, a chain (ball vertices) and the projection
    leq: set  # pairs (a, b) of element indices with a <= b
    classes: list  # list of lists of element indices
    kappa: int
    exact: bool

    def maximal_classes(self):
        out = []
        for ci, cl in enumerate(self.classes):
            a = cl[0]
            if not any((a, b) in self.leq and (b, a) not in self.leq for b in range(len(self.elements))):
                out.append(ci)
        return out

    def class_of(self, i):
        for ci, cl in enumerate(self.classes):
            if i in cl:
                return ci
        raise KeyError(i)


def _descend(ball, S: ConvexSubcomplex):
    cells = ball.vertex_cells(S.vertices)
    return frozenset(ball.cov.project(k) for k in cells)


def compute_Pj(route, j, R=8, ball=None):
    if not 2 <= j <= route.n - 1:
        raise PreconditionError("need 2 <= j <= n-1")
    if not route.embedded:
        raise PreconditionError("route must be embedded")
    ball = ball or DevBall(route.X, route.vertices[0], R)
    chains, truncated = ball_chains(route, ball, j)
    exact = not truncated
    elements, wits, reps = [], [], []
    for chain in chains:
        A, B = chain[0].S, chain[j - 1].S
        if not (A.complete and B.complete):
            exact = False
        C = project(ball, A, B)
        Z = _descend(ball, C)
        if Z not in elements:
            elements.append(Z)
            wits.append({"chain": [0] + [st.exit for st in chain], "projection": sorted(C.vertices)})
            reps.append(C)
    leq = set()
    for a, Za in enumerate(elements):
        for b, Zb in enumerate(elements):
            if a == b or _leq(ball, reps[a], Zb, route.X):
                leq.add((a, b))
    # transitive closure (the relation is transitive in theory; the search is bounded)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(leq), repeat=2):
            if b == c and (a, d) not in leq:
                leq.add((a, d))
                changed = True
    classes = []
    for i in range(len(elements)):
        for cl in classes:
            if (i, cl[0]) in leq and (cl[0], i) in leq:
                cl.append(i)
                break
        else:
            classes.append([i])
    dag = nx.DiGraph()
    dag.add_nodes_from(range(len(classes)))
    for ci, c1 in enumerate(classes):
        for cj, c2 in enumerate(classes):
            if ci != cj and (c1[0], c2[0]) in leq:
                dag.add_edge(ci, cj)
    kappa = nx.dag_longest_path_length(dag) + 1 if classes else 0
    return PjPoset(j, elements, wits, leq, classes, kappa, exact)


def _leq(ball, rep_a: ConvexSubcomplex, Zb, X):
    """Some elevation of ``Zb`` in the ball carries every hyperplane of ``rep_a``."""
    need = rep_a.hyps
    if not need:
        return True
    phi = inclusion(X, Zb)
    zb = 0
    target = phi.vertex(zb)
    for w in range(ball.n):
        if ball.proj[w] != target or ball.dist[w] > ball.safe:
            continue
        S, _el = elevation_in_ball(ball, phi, zb, w)
        if need <= S.hyps:
            return True
    return False


# -- projected routes and Omega --------------------------------------------------
@dataclass
class ProjectedRoute:
    route: Route
    chain: list
    Z: ConvexSubcomplex
    W: ConvexSubcomplex
    P: list
    x_tilde: list
    checks: dict = field(default_factory=dict)


def _ball_piece(ball, vertices, name):
    """A finite ball subcomplex as its own complex mapped to X."""
    cells = ball.vertex_cells(vertices)
    inc = inclusion(ball.total, cells)
    phi = compose(ball.cov.as_map(), inc)
    rep = is_local_isometry(phi)
    if not rep.ok:
        raise PreconditionError(f"projected piece {name} does not map locally isometrically: {rep.witnesses[:2]}")
    return phi, inc


def _dom_of(inc, v):
    for y in range(inc.domain.n_vertices):
        if inc.vertex(y) == v:
            return y
    raise ValueError(v)


def project_route(route, chain, j, R=8, ball=None, poset=None, verify=True):
    """The route with pieces ``2..j-1`` replaced by product regions (finite case)."""
    ball = ball or DevBall(route.X, route.vertices[0], R)
    if not 3 <= j <= route.n - 1:
        raise PreconditionError("need 3 <= j <= n-1")
    Y1, Yj = chain[0].S, chain[j - 1].S
    Z = project(ball, Y1, Yj)
    poset = poset or compute_Pj(route, j, R, ball=ball)
    zc = _descend(ball, Z)
    idx = poset.elements.index(zc)
    if poset.class_of(idx) not in poset.maximal_classes():
        raise PreconditionError("projection is not <=-maximal; use another elevation")
    y = [0] + [st.exit for st in chain]
    x1 = gate(ball, Z, y[1])
    oc = orthogonal_complement(ball, Z, x1)
    W = oc.B
    xt = [None] + [gate(ball, W, y[l]) for l in range(1, j)]
    comps = [route.components[0]]
    comps[0] = Component(route.components[0].phi, route.components[0].entry,
                         _domain_vertex(route.components[0].phi, ball.proj[xt[1]]), route.components[0].name)
    Ps = []
    for l in range(2, j):
        Wl = project(ball, W, chain[l - 1].S)
        Pv = set()
        for w in Wl.vertices:
            Pv |= oc.slice(ball, w).vertices
        if not Z.complete or any(ball.dist[v] > ball.safe for v in Pv):
            raise RadiusExhausted("product region is not finite inside the exact region", 2 * ball.R)
        Ps.append(frozenset(Pv))
        phi, inc = _ball_piece(ball, Pv, f"P{l}")
        comps.append(Component(phi, _dom_of(inc, xt[l - 1]), _dom_of(inc, xt[l]), name=f"P{l}"))
    cj = route.components[j - 1]
    elj = chain[j - 1].elevation
    entry_j = None
    for yh in range(elj.domain.n_vertices):
        if elj.image_vertex(yh) == xt[j - 1]:
            entry_j = elj.descent_vertex(yh)
    if entry_j is None:
        raise PreconditionError("x_{j-1} not in the j-th elevation")
    comps.append(Component(cj.phi, entry_j, cj.exit, cj.name))
    comps.extend(route.components[j:])
    verts = [route.vertices[0]] + [ball.proj[xt[l]] for l in range(1, j)] + route.vertices[j:]
    new = Route(route.X, verts, comps)
    out = ProjectedRoute(new, chain, Z, W, Ps, xt)
    if verify:
        out.checks = check_projected(route, new, j, R)
    return out


def check_projected(route, new, j, R=8):
    ess = is_essential(new, R)
    checks = {
        "essential": not isinstance(ess, NonEssential),
        f"(Hyp_{j})": check_hyp_j(new, j, R).status != "fails",
    }
    for l in range(2, j):
        if check_hyp_j(route, l, R).status == "holds":
            checks[f"(Hyp_{l}) preserved"] = check_hyp_j(new, l, R).status != "fails"
    return checks


def omega_family(route, j, R=8, ball=None):
    if j == 2:
        return [route]
    ball = ball or DevBall(route.X, route.vertices[0], R)
    poset = compute_Pj(route, j, R, ball=ball)
    maxc = set(poset.maximal_classes())
    chains, _ = ball_chains(route, ball, route.n)
    out, seen = [], set()
    for chain in chains:
        Z = project(ball, chain[0].S, chain[j - 1].S)
        idx = poset.elements.index(_descend(ball, Z))
        if poset.class_of(idx) not in maxc:
            continue
        pr = project_route(route, chain, j, R, ball=ball, poset=poset, verify=False)
        k = pr.route.key()
        if k not in seen:
            seen.add(k)
            out.append(pr.route)
    return out


# -- certificates --------------------------------------------------------------------
@dataclass
class CoverCertificate:
    cover: CoveringMap
    route: Route
    transcript: list
    method: str = ""

    def verify(self):
        return verify_no_closed_elevations(self.route, self.cover)


def certify(route, cov, method, transcript=None):
    ok, lines = verify_no_closed_elevations(route, cov)
    if not ok:
        return None
    return CoverCertificate(cov, route, list(transcript or []) + lines, method)


def trap_hypotheses(route):
    """Failed preconditions of the trapping construction (empty when all hold)."""
    bad = []
    X = route.X
    if pathology_report(X).classification != "directly-special":
        bad.append("X not directly special")
    if route.n < 4:
        bad.append("n < 4")
        return bad
    if not route.embedded:
        bad.append("route not embedded")
        return bad
    if not route.closed:
        bad.append("route not closed")
    ok, wit = check_trap(route)
    if not ok:
        bad.append(f"(Trap) fails: {wit[:3]}")
    if inter_osculating_hyperplanes(X, SubcomplexRef(route.components[-1].cells)):
        bad.append("Y_n inter-osculates with hyperplanes")
    if route.components[1].cells & route.components[-1].cells:
        bad.append("Y_2 meets Y_n")
    return bad


def trap_cover(route) -> CoverCertificate:
    from .walker import imitator_cover

    bad = trap_hypotheses(route)
    if bad:
        raise PreconditionError("; ".join(bad))
    ic = imitator_cover(route.X, route.components[0].cells, route.vertices[0])
    reg = regularize(ic.cover)
    cert = certify(route, reg, "trap", [f"imitator cover degree {ic.cover.degree}", f"regularized degree {reg.degree}"])
    if cert is None:
        raise RuntimeError("trap cover has a closed elevation (should be impossible)")
    return cert


def _imitator_family(route, max_degree):
    from .walker import imitator_cover

    X = route.X
    if pathology_report(X).classification != "directly-special":
        return
    seen = set()
    for c in route.components:
        if not c.embedded:
            continue
        cells = c.cells
        for y in sorted(k[1] for k in cells if k[0] == 0):
            key = (cells, y)
            if key in seen:
                continue
            seen.add(key)
            try:
                ic = imitator_cover(X, cells, y)
            except PreconditionError:
                continue
            if ic.cover.degree <= max_degree:
                yield f"imitator(Y={c.name}, y={y})", ic.cover
                if not ic.cover.is_regular():
                    reg = regularize(ic.cover)
                    if reg.degree <= max_degree:
                        yield f"regularized imitator(Y={c.name}, y={y})", reg


def _group_family(X, max_degree, max_candidates):
    n = 0
    for moduli, assign in abelian_candidates(X, max_degree):
        n += 1
        if n > max_candidates:
            return
        try:
            cov = group_cover(X, moduli, assign)
        except LiftError:
            continue
        yield f"abelian{moduli} {sorted(assign.items())}", cov


def search_cover(route, max_degree=64, max_candidates=400, transcript=None):
    """Canonical search over imitator, abelian and product covers, exactly verified."""
    transcript = transcript if transcript is not None else []
    tried = []
    fams = itertools.chain(_imitator_family(route, max_degree), _group_family(route.X, max_degree, max_candidates))
    for label, cov in fams:
        cert = certify(route, cov, label)
        if cert:
            transcript.append(f"search: {label} degree {cov.degree} kills the route")
            cert.transcript = transcript + cert.transcript
            return cert
        tried.append((label, cov))
        if len(tried) >= max_candidates:
            break
    small = [t for t in tried if t[1].degree <= 8][:12]
    for (la, ca), (lb, cb) in itertools.combinations(small, 2):
        if ca.degree * cb.degree > max_degree:
            continue
        fp = fiber_product([ca, cb])
        cert = certify(route, fp, f"product[{la} | {lb}]")
        if cert:
            transcript.append(f"search: product of {la} and {lb} degree {fp.degree}")
            cert.transcript = transcript + cert.transcript
            return cert
    transcript.append(f"search: {len(tried)} single candidates and their small products failed")
    return Unknown("cover search budget exhausted", transcript)


def separate_Y2_Yn(route, max_degree=64, R=8, transcript=None):
    """Cover in which every closed elevation has disjoint 2nd and last pieces."""
    transcript = transcript if transcript is not None else []
    X = route.X
    if route.n < 4:
        raise PreconditionError("needs n >= 4")
    Y2, Yn = route.components[1].cells, route.components[-1].cells
    shared = sorted(k[1] for k in Y2 & Yn if k[0] == 0)
    if not shared:
        transcript.append("Y2 and Yn already disjoint: degree 1")
        return trivial_cover(X)
    covers = []
    for x in shared:
        c = route.components
        r1 = make_route(X, [route.vertices[0], route.vertices[1], x, route.vertices[-1]],
                        [c[0].cells, c[1].cells, c[-1].cells], names=[c[0].name, c[1].name, c[-1].name])
        r2 = make_route(X, [x] + route.vertices[2:-1] + [x],
                        [cc.cells for cc in c[1:]], names=[cc.name for cc in c[1:]])
        chosen = None
        for label, r in (("R_x^1", r1), ("R_x^2", r2)):
            ess = is_essential(r, R)
            if isinstance(ess, NonEssential):
                transcript.append(f"x={x}: {label} not essential")
                continue
            sub = synthesize_cover(r, max_degree=max_degree, R=R, depth=1)
            if isinstance(sub, CoverCertificate):
                transcript.append(f"x={x}: {label} killed by degree {sub.cover.degree} ({sub.method})")
                chosen = sub.cover
                break
        if chosen is None:
            return Unknown(f"could not kill R_x^1 or R_x^2 at x={x}", transcript)
        covers.append(chosen)
    fp = covers[0] if len(covers) == 1 else fiber_product(covers)
    for re in closed_elevations(route, fp):
        a = re.pieces[1][0].image_cells
        b = re.pieces[-1][0].image_cells
        if a & b:
            raise RuntimeError("separation failed on a closed elevation")
    transcript.append(f"separating cover degree {fp.degree}")
    return fp


def synthesize_cover(route, max_degree=64, R=8, depth=0, max_candidates=400):
    """Find and verify a finite cover with no closed elevations of ``route``."""
    transcript = [f"route n={route.n} vertices={route.vertices}"]
    if not route.closed:
        raise PreconditionError("route is not closed")
    ess = is_essential(route, R)
    if isinstance(ess, NonEssential):
        return ess
    transcript.append(f"essentialness: {type(ess).__name__}")
    if route.n >= 4 and route.embedded and not trap_hypotheses(route):
        cert = trap_cover(route)
        cert.transcript = transcript + ["stage: trap hypotheses hold"] + cert.transcript
        return cert
    found = search_cover(route, max_degree, max_candidates, transcript)
    if isinstance(found, CoverCertificate) or route.n < 4 or depth > 1:
        return found
    return _inductive(route, max_degree, R, depth, transcript)


def _inductive(route, max_degree, R, depth, transcript):
    """n >= 4: separate Y2 from Yn, then trap every closed elevation upstairs."""
    transcript.append("stage: inductive pipeline")
    if route.embedded:
        for j in range(3, route.n):
            hj = check_hyp_j(route, j, R)
            transcript.append(f"(Hyp_{j}): {hj.status} {hj.semantics}")
    sep = separate_Y2_Yn(route, max_degree, R, transcript)
    if isinstance(sep, Unknown):
        return sep
    parts = []
    for re in closed_elevations(route, sep):
        up = embedded_route_in_cover(re, route, sep)
        if trap_hypotheses(up):
            transcript.append("closed elevation upstairs misses the trap hypotheses")
            return Unknown("inductive pipeline stalled before (Trap)", transcript)
        parts.append(compose_covers(sep, trap_cover(up).cover))
    total = sep if not parts else fiber_product(parts)
    cert = certify(route, total, "inductive", transcript)
    return cert or Unknown("inductive cover failed verification", transcript)
