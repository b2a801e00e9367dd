"""Subgroup products and routes.

A subgroup ``K`` of ``pi_1(X, x)`` is given geometrically by a local
isometry ``phi: (Y, y) -> X`` and a path ``gamma`` from ``x`` to ``phi(y)``:
``K = gamma . phi_*(pi_1(Y, y)) . gamma^-1``.  For subgroups ``K_1..K_n`` and
an element ``g`` we build a closed route whose paths realize exactly
``K_1 ... K_n g^-1``; a cover without closed elevations of it shows
``g`` lies outside ``G' K_1 ... K_n`` for a finite-index ``G'``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .complex_core import LocalIsometry, PreconditionError, is_local_isometry
from .covers import LiftError, lift_complex
from .development import DevBall, RadiusExhausted, _reach
from .routes import (
    Component, CoverCertificate, NonEssential, Route, component_paths, is_essential,
    verify_no_closed_elevations,
)


@dataclass
class SubgroupPresentation:
    phi: LocalIsometry
    y: int
    gamma: tuple = ()  # X-ends from x to phi(y)
    name: str = "K"

    def __post_init__(self):
        rep = is_local_isometry(self.phi)
        if not rep.ok:
            raise PreconditionError(f"{self.name}: not a local isometry")
        X = self.phi.codomain
        v = None
        for end in self.gamma:
            if v is not None and X.tail(end) != v:
                raise PreconditionError(f"{self.name}: broken connecting path")
            v = X.head(end)
        if v is not None and v != self.phi.vertex(self.y):
            raise PreconditionError(f"{self.name}: path does not end at phi(y)")

    @property
    def basepoint(self):
        """The vertex ``x`` of X at which the subgroup lives."""
        return self.phi.codomain.tail(self.gamma[0]) if self.gamma else self.phi.vertex(self.y)

    def loops(self):
        """Generating loops of ``K`` at ``x``, as X-end sequences."""
        X = self.phi.codomain
        Y = self.phi.domain
        parent = {self.y: None}
        order = [self.y]
        for u in order:
            for end in Y.ends_at[u]:
                w = Y.head(end)
                if w not in parent:
                    parent[w] = end
                    order.append(w)
        tree = {end[0] for end in parent.values() if end is not None}

        def path_to(v):
            out = []
            while parent[v] is not None:
                out.append(parent[v])
                v = Y.tail(parent[v])
            return out[::-1]

        gam = list(self.gamma)
        back = [X.reverse(e) for e in reversed(gam)]
        out = []
        for e in range(Y.n_edges):
            if e in tree or Y.tail((e, 0)) not in parent:
                continue
            up = path_to(Y.tail((e, 0)))
            down = [Y.reverse(f) for f in reversed(path_to(Y.head((e, 0))))]
            yl = up + [(e, 0)] + down
            out.append(tuple(gam + [self.phi.end(f) for f in yl] + back))
        return out


def _lift(ball, w, ends):
    for end in ends:
        w = ball.nbr[w].get(end)
        if w is None:
            return None
    return w


def _reverse_path(X, ends):
    return tuple(X.reverse(e) for e in reversed(ends))


class _UF:
    def __init__(self):
        self.p = {}

    def find(self, a):
        self.p.setdefault(a, a)
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[max(ra, rb)] = min(ra, rb)


@dataclass
class EnlargedPiece:
    component: Component
    orbit: list  # ball images k(root) found for the subgroup
    exact: bool
    notes: list = field(default_factory=list)


def _subgroup_images(ball, K: SubgroupPresentation):
    X = ball.base
    gens = []
    exact = True
    for loop in K.loops():
        a = _lift(ball, 0, loop)
        b = _lift(ball, 0, _reverse_path(X, loop))
        if a is None or b is None:
            exact = False
            continue
        gens += [a, b]
    from .development import deck_apply

    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = deck_apply(ball, g, s)
                if h is None or ball.dist[h] > ball.safe:
                    continue
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return sorted(seen), exact


def enlarge(ball, K: SubgroupPresentation, marks, name=None) -> EnlargedPiece:
    """Quotient by ``K`` of the hull of its elevation and ``K . marks``.

    ``marks`` are ball vertices; the returned component has entry at the
    root's class and exit at the class of ``marks[-1]``.
    """
    from .covers import based_elevation
    from .development import deck_apply

    X = ball.base
    notes = []
    w = _lift(ball, 0, K.gamma)
    if w is None:
        raise RadiusExhausted("connecting path leaves the ball", 2 * ball.R)
    el = based_elevation(K.phi, ball, K.y, w)
    images, exact = _subgroup_images(ball, K)
    S = {v for v in el.image_vertices if ball.dist[v] <= ball.safe}
    for k in images:
        for m in [0] + list(marks):
            v = deck_apply(ball, k, m)
            if v is not None and ball.dist[v] <= ball.safe:
                S.add(v)
    S = sorted(S)
    s0 = S[0]
    T = set()
    for s in S[1:]:
        T |= ball.separating(s0, s)
    region = _reach(ball, s0, T)
    uf = _UF()
    inner = [v for v in region if ball.dist[v] <= ball.safe]
    for k in images:
        for v in inner:
            kv = deck_apply(ball, k, v)
            if kv is not None and kv in region:
                uf.union(v, kv)
    classes = {}
    for v in region:
        classes.setdefault(uf.find(v), []).append(v)
    rep = {}
    for members in classes.values():
        best = min(members, key=lambda v: (ball.dist[v], v))
        for v in members:
            rep[v] = best

    def step(end, r):
        u = ball.nbr[r].get(end)
        if u is None or u not in region:
            return None
        return rep[u]

    try:
        lifted = lift_complex(X, step, [(ball.proj[0], rep[0])])
    except LiftError as exc:
        raise RadiusExhausted(f"quotient of the enlarged piece is not consistent: {exc}", 2 * ball.R) from exc
    used = {lab for _v, lab in lifted.labels[0]}
    if any(ball.dist[r] >= ball.safe for r in used):
        exact = False
        notes.append("a class representative sits on the edge of the exact region")
    cells = {}
    for d, row in enumerate(lifted.labels):
        for tid, (bid, _l) in enumerate(row):
            cells[(d, tid)] = ((d, bid), tuple(range(1 << d)))
    phi = LocalIsometry(lifted.total, X, cells)
    if not is_local_isometry(phi).ok:
        raise RadiusExhausted("enlarged piece does not map locally isometrically", 2 * ball.R)
    entry = lifted.index[0][(ball.proj[0], rep[0])]
    last = marks[-1] if marks else 0
    key = (ball.proj[last], rep.get(last))
    if key not in lifted.index[0]:
        raise RadiusExhausted("marked point not captured by the enlarged piece", 2 * ball.R)
    comp = Component(phi, entry, lifted.index[0][key], name=name or K.name)
    return EnlargedPiece(comp, images, exact, notes)


@dataclass
class SeparatingRoute:
    route: Route
    g: tuple
    subgroups: list
    exact: bool
    essential: object  # NonEssential, Essential or Unknown
    notes: list = field(default_factory=list)

    @property
    def provisional(self):
        return not self.exact

    @property
    def nonessential(self):
        return isinstance(self.essential, NonEssential)


def build_separating_route(Ks, g, R=16):
    """Route ``(x, Y1', x, ..., Yn', x)`` whose realizations are ``K1...Kn g^-1``."""
    if not Ks:
        raise PreconditionError("need at least one subgroup")
    x = Ks[0].basepoint
    X = Ks[0].phi.codomain
    for K in Ks:
        if K.basepoint != x or K.phi.codomain is not X:
            raise PreconditionError("subgroups must share the base vertex and complex")
    if g and X.tail(g[0]) != x or (g and X.head(g[-1]) != x):
        raise PreconditionError("g must be a loop at the base vertex")
    ball = DevBall(X, x, R)
    ginv = _lift(ball, 0, _reverse_path(X, g))
    if ginv is None or ball.dist[ginv] > ball.safe:
        raise RadiusExhausted("g^-1 leaves the exact region", 2 * len(g) + 2)
    comps, exact, notes = [], True, []
    for i, K in enumerate(Ks):
        marks = [ginv] if i == len(Ks) - 1 else []
        piece = enlarge(ball, K, marks, name=f"{K.name}")
        comps.append(piece.component)
        exact &= piece.exact
        notes += piece.notes
    route = Route(X, [x] * (len(Ks) + 1), comps)
    ess = is_essential(route, R, ball=ball)
    return SeparatingRoute(route, tuple(g), list(Ks), exact, ess, notes)


# -- oracles -------------------------------------------------------------------------
class FreeGroupOracle:
    """Free group of a graph: one generator per non-tree edge."""

    def __init__(self, X, tree_edges):
        self.X = X
        self.gens = [e for e in range(X.n_edges) if e not in set(tree_edges)]
        self.index = {e: i for i, e in enumerate(self.gens)}

    identity = ()

    @staticmethod
    def reduce(word):
        out = []
        for a in word:
            if out and out[-1] == -a:
                out.pop()
            else:
                out.append(a)
        return tuple(out)

    def element(self, ends):
        w = []
        for e, s in ends:
            if e in self.index:
                g = self.index[e] + 1
                w.append(g if s == 0 else -g)
        return self.reduce(w)

    def mul(self, a, b):
        return self.reduce(a + b)

    def inv(self, a):
        return tuple(-x for x in reversed(a))


class VectorOracle:
    """Abelian fixtures: each edge end carries an integer vector."""

    def __init__(self, dim, edge_vectors):
        self.dim = dim
        self.vec = edge_vectors

    @property
    def identity(self):
        return (0,) * self.dim

    def element(self, ends):
        out = [0] * self.dim
        for e, s in ends:
            sign = 1 if s == 0 else -1
            for i, c in enumerate(self.vec[e]):
                out[i] += sign * c
        return tuple(out)

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)


def torus_oracle(X, periods):
    """Vector oracle for a product of cycles via its factor structure."""
    vec = {}
    nf = len(periods)
    for (ka, kb), key in X.factor_index.items():
        if key[0] != 1:
            continue
        v = [0] * nf
        if ka[0] == 1:
            v[0] = 1
        else:
            v[1] = 1
        vec[key[1]] = v
    return _PeriodOracle(nf, vec, periods)


class _PeriodOracle(VectorOracle):
    def __init__(self, dim, vec, periods):
        super().__init__(dim, vec)
        self.periods = periods

    def element(self, ends):
        raw = super().element(ends)
        return tuple(c // p if c % p == 0 else c / p for c, p in zip(raw, self.periods))


def _words(oracle, gens, length):
    """Products of at most ``length`` generators and inverses."""
    letters = list(gens) + [oracle.inv(a) for a in gens]
    out = {oracle.identity}
    frontier = {oracle.identity}
    for _ in range(length):
        nxt = set()
        for w in frontier:
            for a in letters:
                nxt.add(oracle.mul(w, a))
        frontier = nxt - out
        out |= nxt
    return out


@dataclass
class RealizationReport:
    realized: set
    expected_inner: set
    expected_outer: set
    missing: set
    extra: set

    @property
    def ok(self):
        return not self.missing and not self.extra


def realizations_check(route, oracle, K_gens, tail, L, inner_len=1, outer_len=None):
    """Compare realizations of paths of length <= L per piece with ``K1...Kn . tail``.

    ``K_gens[i]`` are oracle elements generating ``K_i``.  Products of
    ``inner_len`` generators must all be realized; every realization must be a
    product of at most ``outer_len`` generators (default ``L``).
    """
    outer_len = L if outer_len is None else outer_len
    per = [component_paths(c, L) for c in route.components]
    realized = set()
    for combo in itertools.product(*per):
        ends = [c.phi.end(e) for c, p in zip(route.components, combo) for e in p]
        realized.add(oracle.element(ends))

    def products(n):
        acc = {oracle.identity}
        for gens in K_gens:
            acc = {oracle.mul(a, b) for a in acc for b in _words(oracle, gens, n)}
        return {oracle.mul(a, tail) for a in acc}

    inner = products(inner_len)
    outer = products(outer_len)
    return RealizationReport(realized, inner, outer, inner - realized, realized - outer)


# -- certificates ---------------------------------------------------------------------
class StaleCertificate(ValueError):
    pass


@dataclass
class NonMembershipCertificate:
    g: tuple
    subgroups: list
    route: Route
    cover_certificate: CoverCertificate
    transcript: list
    base_digest: str
    path_bound: int

    def verify(self):
        return verify_nonmembership(self)


def _sampled_paths(route, L, limit):
    per = [component_paths(c, L) for c in route.components]
    for n, combo in enumerate(itertools.product(*per)):
        if n >= limit:
            return
        yield [c.phi.end(e) for c, p in zip(route.components, combo) for e in p]


def _lifts_open(cov, route, L, limit):
    """Every sampled realization lifts to a non-closed path from every start."""
    starts = cov.fibers[route.vertices[0]]
    count = 0
    for ends in _sampled_paths(route, L, limit):
        count += 1
        for w in starts:
            if cov.lift_path(w, ends) == w:
                return False, count, ends
    return True, count, None


def certify_nonmembership(sep: SeparatingRoute, cert: CoverCertificate, L=6, limit=5000):
    route = sep.route
    if cert.route is not route and cert.route.key() != route.key():
        raise PreconditionError("certificate is for a different route")
    if cert.cover.base.digest() != route.X.digest():
        raise StaleCertificate("cover base does not match the route's complex")
    if cert.cover.degree == 1:
        raise PreconditionError("degree-1 cover cannot kill a closed route")
    ok, lines = verify_no_closed_elevations(route, cert.cover)
    if not ok:
        raise PreconditionError("cover has a closed route elevation")
    open_ok, count, bad = _lifts_open(cert.cover, route, L, limit)
    if not open_ok:
        raise RuntimeError(f"sampled realization lifts closed: {bad}")
    transcript = [
        f"route n={route.n} at vertex {route.vertices[0]}; g of length {len(sep.g)}",
        f"cover degree {cert.cover.degree}, base {cert.cover.base.digest()[:12]}",
        *lines,
        f"sampled {count} paths along the route (per-piece length <= {L}); none lifts closed",
        "no closed elevation => no path along the route lifts closed => g is outside G'K1...Kn "
        "for the finite-index subgroup G' of the cover",
    ]
    if sep.provisional:
        transcript.append("route provisional: stabilizer enumeration not exact")
    return NonMembershipCertificate(tuple(sep.g), list(sep.subgroups), route, cert, transcript,
                                    route.X.digest(), L)


def verify_nonmembership(nmc: NonMembershipCertificate, limit=5000):
    """Recheck from the cover and route alone."""
    cov = nmc.cover_certificate.cover
    if cov.base.digest() != nmc.base_digest or nmc.route.X.digest() != nmc.base_digest:
        raise StaleCertificate("complex hash mismatch")
    if cov.degree == 1:
        return False
    ok, _ = verify_no_closed_elevations(nmc.route, cov)
    if not ok:
        return False
    open_ok, _, _ = _lifts_open(cov, nmc.route, nmc.path_bound, limit)
    return open_ok
