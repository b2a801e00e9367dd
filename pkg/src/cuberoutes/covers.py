"""Finite covers, fibre products, regularization and elevations.

Everything here is built by one routine, :func:`lift_complex`: given a base
complex and a *step* rule ``step(end, label) -> label`` that says where the
lift of an oriented edge goes, it explores the labelled vertices reachable
from some roots and lifts every cube whose 1-skeleton lifts.  Cube lifts are
checked for consistency around every edge (a failure means the step rule
does not define a covering).

A *space over X* is anything offering ``total``, ``proj_vertex(w)``,
``lift_end(w, end)`` (``None`` when the lift leaves the known region) and
``cube_at(key, corner, w)``.  Covers and developed balls both qualify.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .complex_core import (
    Cell, CubeComplex, LocalIsometry, PreconditionError, insert_bit,
    is_local_isometry, pathology_report, subcomplex_osculations,
)


class LiftError(ValueError):
    """A cube's 1-skeleton does not lift consistently."""

    def __init__(self, key, msg=""):
        super().__init__(f"cube {key} does not lift{': ' + msg if msg else ''}")
        self.key = key


@dataclass
class Unknown:
    """Budget exhausted; ``transcript`` says where."""

    reason: str
    transcript: list = field(default_factory=list)

    def __bool__(self):
        return False


@dataclass
class Lifted:
    total: CubeComplex
    labels: list  # labels[d][id] = (base id, label of corner 0)
    index: list  # index[d][(base id, label)] = id
    complete: bool


def cube_corner_labels(base, key, l0, step):
    """Labels at all corners of cube ``key`` given label ``l0`` at corner 0."""
    d = key[0]
    lab = [None] * (1 << d)
    lab[0] = l0
    for q in range(1, 1 << d):
        i = (q & -q).bit_length() - 1
        src = lab[q ^ (1 << i)]
        e, flip = base.cube_edges[key][(q ^ (1 << i), i)]
        nxt = step((e, flip), src)
        if nxt is None:
            return None
        lab[q] = nxt
    for (p, i), (e, flip) in base.cube_edges[key].items():
        if step((e, flip), lab[p]) != lab[p | (1 << i)]:
            raise LiftError(key, f"edge {e} at corner {p}")
    return lab


def lift_complex(base: CubeComplex, step, roots, name=None, order=None) -> Lifted:
    """Explore from ``roots`` (pairs ``(base vertex, label)``) and lift cubes.

    Total vertices are sorted by ``order`` (default: the pair itself).
    """
    seen = set(roots)
    queue = deque(sorted(seen))
    complete = True
    while queue:
        v, l = queue.popleft()
        for end in base.ends_at[v]:
            l2 = step(end, l)
            if l2 is None:
                complete = False
                continue
            nxt = (base.head(end), l2)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    verts = sorted(seen, key=order)
    index = [{key: i for i, key in enumerate(verts)}]
    labels = [verts]
    by_v = {}
    for v, l in verts:
        by_v.setdefault(v, []).append(l)
    levels = [[Cell(0, (i,)) for i in range(len(verts))]]
    for d in range(1, base.max_dim + 1):
        row, lab_row, idx = [], [], {}
        for cid, c in enumerate(base.cells_by_dim[d]):
            for l0 in by_v.get(c.corners[0], ()):
                lab = cube_corner_labels(base, (d, cid), l0, step)
                if lab is None:
                    complete = False
                    continue
                corners = tuple(index[0][(c.corners[q], lab[q])] for q in range(1 << d))
                facets = []
                for slot, (f, perm) in enumerate(c.facets):
                    i, s = divmod(slot, 2)
                    j = perm.index(0)
                    fl = lab[insert_bit(j, i, s)]
                    facets.append((index[d - 1][(f, fl)], perm))
                idx[(cid, l0)] = len(row)
                row.append(Cell(d, corners, tuple(facets)))
                lab_row.append((cid, l0))
        levels.append(row)
        labels.append(lab_row)
        index.append(idx)
    return Lifted(CubeComplex(levels, name=name), labels, index, complete)


class CoveringMap:
    """A cover ``total -> base`` produced by :func:`lift_complex`.

    Total cells are keyed by (base cell, label at corner 0) and have the same
    corner order as their base cell.
    """

    def __init__(self, base: CubeComplex, lifted: Lifted, name=None):
        self.base = base
        self.total = lifted.total
        self.labels = lifted.labels
        self.index = lifted.index
        self.complete = lifted.complete
        if name:
            self.total.name = name

    def __repr__(self):
        return f"CoveringMap(degree={self.degree}, total={self.total!r})"

    def project(self, key):
        return (key[0], self.labels[key[0]][key[1]][0])

    def proj_vertex(self, w):
        return self.labels[0][w][0]

    def vertex_label(self, w):
        return self.labels[0][w][1]

    def lift_vertex(self, v, label):
        return self.index[0].get((v, label))

    @cached_property
    def _ends(self):
        out = {}
        T = self.total
        for te in range(T.n_edges):
            e = self.labels[1][te][0]
            a, b = T.edge_corners(te)
            out[(a, (e, 0))] = (te, 0)
            out[(b, (e, 1))] = (te, 1)
        return out

    def lift_end(self, w, end):
        return self._ends.get((w, end))

    def step(self, w, end):
        te = self.lift_end(w, end)
        return None if te is None else self.total.head(te)

    @cached_property
    def _cubes(self):
        out = {}
        T = self.total
        for d in range(1, T.max_dim + 1):
            for tid, c in enumerate(T.cells_by_dim[d]):
                k = (d, self.labels[d][tid][0])
                for q, w in enumerate(c.corners):
                    out[(k, q, w)] = (d, tid)
        return out

    def cube_at(self, key, q, w):
        if key[0] == 0:
            return (0, w)
        return self._cubes.get((key, q, w))

    def fiber(self, v):
        return [w for w in range(self.total.n_vertices) if self.labels[0][w][0] == v]

    @cached_property
    def fibers(self):
        out = [[] for _ in range(self.base.n_vertices)]
        for w in range(self.total.n_vertices):
            out[self.labels[0][w][0]].append(w)
        return out

    @property
    def degree(self):
        sizes = {len(f) for f in self.fibers}
        if len(sizes) != 1:
            return max(sizes)
        return sizes.pop()

    def as_map(self) -> LocalIsometry:
        cells = {}
        for d, row in enumerate(self.labels):
            for tid, (bid, _l) in enumerate(row):
                cells[(d, tid)] = ((d, bid), tuple(range(1 << d)))
        return LocalIsometry(self.total, self.base, cells)

    def edge_voltages(self):
        """Per base edge, images of fibre indices (fibres indexed by sorted total ids)."""
        pos = {}
        for v, fib in enumerate(self.fibers):
            for i, w in enumerate(fib):
                pos[w] = i
        out = []
        for e in range(self.base.n_edges):
            a = self.base.edge_corners(e)[0]
            out.append(tuple(pos[self.step(w, (e, 0))] for w in self.fibers[a]))
        return out

    def lift_path(self, w, ends):
        for end in ends:
            w = self.step(w, end)
        return w

    def deck_group_order(self):
        """Number of deck transformations (equals degree iff regular)."""
        if not self.fibers or not self.fibers[0]:
            return 0
        v0 = 0
        w0 = self.fibers[v0][0]
        count = 0
        for w1 in self.fibers[v0]:
            if _deck_from(self, w0, w1) is not None:
                count += 1
        return count

    def is_regular(self):
        return self.deck_group_order() == self.degree


def _deck_from(cov, w0, w1):
    """Deck transformation sending ``w0`` to ``w1``, as a vertex map, or None."""
    m = {w0: w1}
    queue = deque([w0])
    while queue:
        a = queue.popleft()
        b = m[a]
        v = cov.proj_vertex(a)
        for end in cov.base.ends_at[v]:
            a2, b2 = cov.step(a, end), cov.step(b, end)
            if a2 in m:
                if m[a2] != b2:
                    return None
            else:
                m[a2] = b2
                queue.append(a2)
    if len(set(m.values())) != len(m):
        return None
    return m


def verify_cover(cov: CoveringMap) -> list:
    """Independent check that ``cov`` is a covering map; returns problems."""
    B, T = cov.base, cov.total
    bad = []
    phi = cov.as_map()
    rep = is_local_isometry(phi)
    if not rep.ok:
        bad.extend(rep.witnesses)
    for w in range(T.n_vertices):
        v = cov.proj_vertex(w)
        img = sorted(phi.end(e) for e in T.ends_at[w])
        if img != B.ends_at[v]:
            bad.append(("link-not-surjective", w))
        ts = sorted(tuple(sorted(phi.end(e) for e in s)) for s, _k, _q in T.link_simplices[w])
        bs = sorted(tuple(sorted(s)) for s, _k, _q in B.link_simplices[v])
        if ts != bs:
            bad.append(("link-simplices", w))
    return bad


# -- constructions ---------------------------------------------------------
@dataclass
class Voltage:
    m: int
    perms: list  # perms[e][i] = image of fibre element i along e (corner 0 -> 1)

    @classmethod
    def identity(cls, X, m=1):
        return cls(m, [tuple(range(m))] * X.n_edges)


def _voltage_step(v: Voltage):
    inv = []
    for p in v.perms:
        q = [0] * len(p)
        for i, j in enumerate(p):
            q[j] = i
        inv.append(tuple(q))

    def step(end, l):
        e, s = end
        return v.perms[e][l] if s == 0 else inv[e][l]

    return step


def cover_from_voltage(X: CubeComplex, v: Voltage, component=False, root=None) -> CoveringMap:
    X.require_npc()
    if len(v.perms) != X.n_edges:
        raise ValueError("voltage must assign a permutation to every edge")
    for p in v.perms:
        if sorted(p) != list(range(v.m)):
            raise ValueError(f"not a permutation of 0..{v.m - 1}: {p}")
    step = _voltage_step(v)
    if component:
        roots = [root or (0, 0)]
    else:
        roots = [(x, i) for x in range(X.n_vertices) for i in range(v.m)]
    return CoveringMap(X, lift_complex(X, step, roots))


def spanning_tree_edges(X: CubeComplex):
    """Edges of a BFS spanning forest (deterministic)."""
    seen = set()
    tree = set()
    for r in range(X.n_vertices):
        if r in seen:
            continue
        seen.add(r)
        queue = deque([r])
        while queue:
            x = queue.popleft()
            for end in X.ends_at[x]:
                y = X.head(end)
                if y not in seen:
                    seen.add(y)
                    tree.add(end[0])
                    queue.append(y)
    return tree


def group_cover(X: CubeComplex, moduli, assignment, root=0) -> CoveringMap:
    """Regular cover with deck group ``Z/m1 x ... x Z/mk``.

    ``assignment[e]`` is the group element (tuple) carried by edge ``e`` from
    corner 0 to corner 1; missing edges carry zero.  Returns the component of
    ``(root, 0)``.
    """
    moduli = tuple(moduli)
    zero = (0,) * len(moduli)

    def step(end, g):
        e, s = end
        h = assignment.get(e, zero)
        sign = 1 if s == 0 else -1
        return tuple((a + sign * b) % m for a, b, m in zip(g, h, moduli))

    return CoveringMap(X, lift_complex(X, step, [(root, zero)]))


def cover_from_step(X, step, roots, name=None) -> CoveringMap:
    return CoveringMap(X, lift_complex(X, step, roots), name=name)


def fiber_product(covers, root=None) -> CoveringMap:
    """Component of the fibre product through the tuple of first-fibre lifts."""
    if not covers:
        raise ValueError("need at least one cover")
    base = covers[0].base
    for c in covers[1:]:
        if c.base is not base and c.base.digest() != base.digest():
            raise ValueError("covers have different bases")
    if root is None:
        x0 = 0
        root = (x0, tuple(c.fibers[x0][0] for c in covers))

    def step(end, tup):
        out = []
        for c, w in zip(covers, tup):
            n = c.step(w, end)
            if n is None:
                return None
            out.append(n)
        return tuple(out)

    return CoveringMap(base, lift_complex(base, step, [root]))


def factor_map(prod: CoveringMap, i, cover: CoveringMap):
    """Vertex map from a fibre product onto its ``i``-th factor."""
    return {w: prod.vertex_label(w)[i] for w in range(prod.total.n_vertices)}


def regularize(cov: CoveringMap, x0=0) -> CoveringMap:
    """Galois closure: component of ``(x0, fibre(x0))`` in the m-fold product."""
    fib = tuple(cov.fibers[x0])

    def step(end, tup):
        return tuple(cov.step(w, end) for w in tup)

    return CoveringMap(cov.base, lift_complex(cov.base, step, [(x0, fib)]))


def compose_covers(lower: CoveringMap, upper: CoveringMap) -> CoveringMap:
    """``upper.total -> lower.total -> lower.base`` as one cover of the base."""
    if upper.base is not lower.total:
        raise ValueError("upper cover must be a cover of lower's total space")

    def step(end, w):
        mid = lower.step(upper.proj_vertex(w), end)
        if mid is None:
            return None
        te = lower.lift_end(upper.proj_vertex(w), end)
        return upper.step(w, te)

    roots = [(lower.proj_vertex(upper.proj_vertex(w)), w) for w in range(upper.total.n_vertices)]
    return CoveringMap(lower.base, lift_complex(lower.base, step, roots))


def trivial_cover(X) -> CoveringMap:
    return cover_from_voltage(X, Voltage.identity(X))


def is_connected_cover(cov) -> bool:
    return cov.total.is_connected()


# -- elevations ----------------------------------------------------------
class Elevation:
    """Component of the pullback of ``phi: Y -> X`` along a space over X."""

    def __init__(self, phi, space, lifted: Lifted):
        self.phi = phi
        self.space = space
        self.domain = lifted.total
        self.labels = lifted.labels
        self.index = lifted.index
        self.complete = lifted.complete

    def __repr__(self):
        return f"Elevation({self.domain.n_vertices} vertices, complete={self.complete})"

    def vertex(self, y, w):
        return self.index[0].get((y, w))

    def image_vertex(self, yh):
        return self.labels[0][yh][1]

    def descent_vertex(self, yh):
        return self.labels[0][yh][0]

    @cached_property
    def to_total(self) -> LocalIsometry:
        cells = {}
        for d, row in enumerate(self.labels):
            for i, (c, w) in enumerate(row):
                xk, perm = self.phi.cells[(d, c)]
                tk = self.space.cube_at(xk, perm[0], w)
                if tk is None:
                    raise RuntimeError(f"cell over {xk} at {w} missing from the space")
                cells[(d, i)] = (tk, perm)
        return LocalIsometry(self.domain, self.space.total, cells)

    @cached_property
    def image_cells(self) -> frozenset:
        return frozenset(k for k, _ in self.to_total.cells.values())

    @cached_property
    def image_vertices(self) -> frozenset:
        return frozenset(self.labels[0][i][1] for i in range(self.domain.n_vertices))

    @property
    def embedded(self) -> bool:
        return len(self.image_cells) == len(self.to_total.cells)

    @property
    def descent_degree(self):
        n = self.phi.domain.n_vertices
        return self.domain.n_vertices // n if n else 0

    def closes(self, y, w, ends):
        """Lift the Y-path ``ends`` from ``(y, w)``; return the end vertex or None."""
        yh = self.vertex(y, w)
        for end in ends:
            yh = _pull_step(self, yh, end)
            if yh is None:
                return None
        return yh


def _pull_step(elev, yh, end):
    y, w = elev.labels[0][yh]
    we = elev.space.lift_end(w, elev.phi.end(end))
    if we is None:
        return None
    return elev.vertex(elev.phi.domain.head(end), elev.space.total.head(we))


def pullback_step(phi, space):
    def step(end, w):
        te = space.lift_end(w, phi.end(end))
        return None if te is None else space.total.head(te)

    return step


def based_elevation(phi: LocalIsometry, space, y0, w0) -> Elevation:
    if space.proj_vertex(w0) != phi.vertex(y0):
        raise PreconditionError(f"lift {w0} does not lie over phi({y0})")
    return Elevation(phi, space, lift_complex(phi.domain, pullback_step(phi, space), [(y0, w0)]))


def elevations(phi: LocalIsometry, cov: CoveringMap, check=True):
    """All components of the pullback of ``phi`` along ``cov``."""
    if check:
        rep = is_local_isometry(phi)
        if not rep.ok:
            raise PreconditionError(f"not a local isometry: {rep.witnesses[:3]}")
    out = []
    done = set()
    for y in range(phi.domain.n_vertices):
        for w in cov.fibers[phi.vertex(y)]:
            if (y, w) in done:
                continue
            el = based_elevation(phi, cov, y, w)
            done.update(el.labels[0])
            out.append(el)
    return out


# -- embedding search -----------------------------------------------------------
def elevation_cleanliness(cov: CoveringMap, phis):
    """Problems preventing all elevations of ``phis`` from being embedded and clean."""
    probs = []
    rep = pathology_report(cov.total)
    if rep.classification != "directly-special":
        probs.append(("total", rep.summary()))
        return probs
    for k, phi in enumerate(phis):
        for el in elevations(phi, cov, check=False):
            if not el.embedded:
                probs.append(("not-embedded", k))
                continue
            for h in cov.total.hyperplanes:
                if subcomplex_osculations(cov.total, h, el.image_cells).inter_osculates:
                    probs.append(("inter-osculates", k, h.id))
                    break
    return probs


def abelian_candidates(X, max_degree, max_rank=2):
    """Canonical list of abelian group covers: (moduli, assignment) in order."""
    free = sorted(set(range(X.n_edges)) - spanning_tree_edges(X))
    groups = []
    for m in range(2, max_degree + 1):
        groups.append((m,))
    if max_rank >= 2:
        for a in range(2, max_degree + 1):
            for b in range(a, max_degree // a + 1):
                groups.append((a, b))
    groups.sort(key=lambda g: (_prod(g), len(g), g))
    for moduli in groups:
        elems = list(itertools.product(*[range(m) for m in moduli]))
        for choice in itertools.product(elems, repeat=len(free)):
            yield moduli, dict(zip(free, choice))


def _prod(t):
    out = 1
    for x in t:
        out *= x
    return out


def embed_elevations_search(X, phis, max_degree=16, max_candidates=5000):
    """Smallest verified cover making every elevation embedded and clean."""
    triv = trivial_cover(X)
    transcript = []
    if not elevation_cleanliness(triv, phis):
        return triv
    tried = 0
    for moduli, assign in abelian_candidates(X, max_degree):
        tried += 1
        if tried > max_candidates:
            break
        try:
            cov = group_cover(X, moduli, assign)
        except LiftError:
            continue
        if not cov.total.validate().npc:
            continue
        probs = elevation_cleanliness(cov, phis)
        if not probs:
            transcript.append(f"found moduli={moduli} after {tried} candidates")
            cov.search_transcript = transcript
            return cov
    return Unknown("embed search budget exhausted", [f"tried {tried} candidates up to degree {max_degree}"])
