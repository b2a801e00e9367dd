"""Cube complexes as explicit combinatorial data.

A d-cell stores a corner map (corner index -> vertex id) and 2d facet slots.
Corner indices are bitmasks in ``range(2**d)``; bit ``i`` is coordinate ``i``.
Slot ``2*i + s`` is the facet where coordinate ``i`` is fixed to ``s``; it
holds ``(cell id, perm)`` where ``perm[l]`` is the corner of the referenced
(d-1)-cell that the facet's ``l``-th corner is identified with.  The facet's
local corner order drops bit ``i`` from the parent's corner index.

Cells are addressed by keys ``(dim, id)``.  An *end* ``(e, s)`` is the edge
``e`` seen from its corner ``s``; it doubles as the oriented edge leaving
``corners[s]``.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx

Key = tuple  # (dim, id)
End = tuple  # (edge id, corner selector)


class StructuralError(ValueError):
    """Malformed cell data (bad facet reference or corner bijection)."""


class NotNPCError(ValueError):
    """An operation needing non-positive curvature got a complex without it."""


class PreconditionError(ValueError):
    pass


def drop_bit(c: int, i: int) -> int:
    return (c & ((1 << i) - 1)) | ((c >> (i + 1)) << i)


def insert_bit(l: int, i: int, s: int) -> int:
    low = l & ((1 << i) - 1)
    return low | (s << i) | ((l >> i) << (i + 1))


def _is_cube_isometry(perm, d):
    n = 1 << d
    if sorted(perm) != list(range(n)):
        return False
    for a in range(n):
        for i in range(d):
            b = a ^ (1 << i)
            if bin(perm[a] ^ perm[b]).count("1") != 1:
                return False
    return True


@dataclass(frozen=True)
class Cell:
    dim: int
    corners: tuple
    facets: tuple = ()


@dataclass(frozen=True)
class SubcomplexRef:
    """A face-closed set of cell keys of some complex."""

    cells: frozenset
    locally_convex: bool | None = None

    @property
    def vertices(self):
        return sorted(c[1] for c in self.cells if c[0] == 0)

    @property
    def edges(self):
        return sorted(c[1] for c in self.cells if c[0] == 1)

    def __contains__(self, key):
        return key in self.cells

    def __len__(self):
        return len(self.cells)


@dataclass
class ValidationReport:
    structural: list = field(default_factory=list)
    link_violations: list = field(default_factory=list)

    @property
    def npc(self) -> bool:
        return not self.structural and not self.link_violations

    def summary(self) -> str:
        if self.npc:
            return "NPC; violations: 0"
        return "not-NPC; violations: %d" % (len(self.structural) + len(self.link_violations))


class CubeComplex:
    """Finite cube complex with explicit facet attachments.

    ``cells_by_dim[d]`` is a list of :class:`Cell`; vertex ``v`` is the 0-cell
    with id ``v``.
    """

    def __init__(self, cells_by_dim, subs=None, name=None):
        self.cells_by_dim = [list(level) for level in cells_by_dim]
        while len(self.cells_by_dim) > 1 and not self.cells_by_dim[-1]:
            self.cells_by_dim.pop()
        self.subs = dict(subs or {})
        self.name = name
        self._validation = None

    # -- basic access -------------------------------------------------
    @property
    def max_dim(self) -> int:
        return len(self.cells_by_dim) - 1

    @property
    def n_vertices(self) -> int:
        return len(self.cells_by_dim[0])

    @property
    def n_edges(self) -> int:
        return len(self.cells_by_dim[1]) if self.max_dim >= 1 else 0

    def count(self, d):
        return len(self.cells_by_dim[d]) if d <= self.max_dim else 0

    def cell(self, key) -> Cell:
        return self.cells_by_dim[key[0]][key[1]]

    def keys(self, d=None):
        dims = range(self.max_dim + 1) if d is None else [d]
        for dd in dims:
            if dd <= self.max_dim:
                for i in range(len(self.cells_by_dim[dd])):
                    yield (dd, i)

    def edge_corners(self, e):
        return self.cells_by_dim[1][e].corners

    def tail(self, end):
        return self.cells_by_dim[1][end[0]].corners[end[1]]

    def head(self, end):
        return self.cells_by_dim[1][end[0]].corners[1 - end[1]]

    @staticmethod
    def reverse(end):
        return (end[0], 1 - end[1])

    def __repr__(self):
        counts = ",".join(str(len(c)) for c in self.cells_by_dim)
        return f"CubeComplex({self.name or ''}[{counts}])"

    # -- faces ---------------------------------------------------------
    def face(self, key, local, order=None):
        """Restrict cell ``key`` to the face spanned by corner list ``local``.

        ``local`` lists corners of ``key`` in the face's standard order.
        Returns ``(face key, perm)`` with ``perm[j]`` the corner of the face
        cell matching ``local[j]``.  ``order`` optionally fixes which fixed
        coordinate is peeled first (used for commutation checks).
        """
        d, cid = key
        k = len(local).bit_length() - 1
        if k == d:
            return key, tuple(local)
        fixed = [i for i in range(d) if len({(c >> i) & 1 for c in local}) == 1]
        if order:
            i = next(o for o in order if o in fixed)
            order = [o - (o > i) for o in order if o != i]
        else:
            i = fixed[0]
        s = (local[0] >> i) & 1
        fid, fperm = self.cells_by_dim[d][cid].facets[2 * i + s]
        new = [fperm[drop_bit(c, i)] for c in local]
        return self.face((d - 1, fid), new, order)

    def facet_keys(self, key):
        d, cid = key
        if d == 0:
            return []
        return [(d - 1, f[0]) for f in self.cells_by_dim[d][cid].facets]

    def closure(self, keys) -> frozenset:
        out = set()
        stack = list(keys)
        while stack:
            k = stack.pop()
            if k in out:
                continue
            out.add(k)
            stack.extend(self.facet_keys(k))
        return frozenset(out)

    def subcomplex(self, keys) -> SubcomplexRef:
        cells = self.closure(keys)
        return SubcomplexRef(cells, is_locally_convex(self, cells))

    def induced_cells(self, vertices) -> frozenset:
        """Every cell whose corners all lie in ``vertices``."""
        vs = set(vertices)
        return frozenset(k for k in self.keys() if all(c in vs for c in self.cell(k).corners))

    def whole(self) -> SubcomplexRef:
        return SubcomplexRef(frozenset(self.keys()), True)

    @cached_property
    def cube_edges(self):
        """``cube_edges[key][(p, i)] = (edge id, flip)`` for lower corner ``p``.

        ``flip`` is the corner of the edge cell matching cube corner ``p``.
        """
        out = {}
        for d in range(1, self.max_dim + 1):
            for cid in range(len(self.cells_by_dim[d])):
                m = {}
                for p in range(1 << d):
                    for i in range(d):
                        if p >> i & 1:
                            continue
                        (_, e), perm = self.face((d, cid), [p, p | (1 << i)])
                        m[(p, i)] = (e, perm[0])
                out[(d, cid)] = m
        return out

    def corner_end(self, key, q, i):
        """The end at cube corner ``q`` along direction ``i``."""
        if q >> i & 1:
            e, flip = self.cube_edges[key][(q ^ (1 << i), i)]
            return (e, 1 - flip)
        e, flip = self.cube_edges[key][(q, i)]
        return (e, flip)

    # -- links ---------------------------------------------------------
    @cached_property
    def ends_at(self):
        out = [[] for _ in range(self.n_vertices)]
        if self.max_dim >= 1:
            for e, c in enumerate(self.cells_by_dim[1]):
                out[c.corners[0]].append((e, 0))
                out[c.corners[1]].append((e, 1))
        return [sorted(x) for x in out]

    @cached_property
    def link_simplices(self):
        """Per vertex: list of ``(end tuple, cube key, corner)`` for cubes of dim >= 1."""
        out = [[] for _ in range(self.n_vertices)]
        for d in range(1, self.max_dim + 1):
            for cid, c in enumerate(self.cells_by_dim[d]):
                for q in range(1 << d):
                    ends = tuple(self.corner_end((d, cid), q, i) for i in range(d))
                    out[c.corners[q]].append((ends, (d, cid), q))
        return out

    @cached_property
    def corner_pairs(self):
        """Per vertex: set of frozenset({end1, end2}) spanning a square corner."""
        out = [set() for _ in range(self.n_vertices)]
        if self.max_dim >= 2:
            for v in range(self.n_vertices):
                for ends, key, _q in self.link_simplices[v]:
                    if key[0] == 2:
                        out[v].add(frozenset(ends))
        return out

    def link_graph(self, v) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.ends_at[v])
        for pair in self.corner_pairs[v]:
            if len(pair) == 2:
                g.add_edge(*sorted(pair))
        return g

    def neighbors(self, v):
        return [(end, self.head(end)) for end in self.ends_at[v]]

    # -- validation ----------------------------------------------------
    def validate(self) -> ValidationReport:
        if self._validation is None:
            self._validation = validate(self)
        return self._validation

    def require_npc(self):
        rep = self.validate()
        if not rep.npc:
            raise NotNPCError(f"{self!r} is not NPC: {rep.summary()}")
        return rep

    # -- misc ----------------------------------------------------------
    @cached_property
    def hyperplanes(self):
        return compute_hyperplanes(self)

    @cached_property
    def hyp_of_edge(self):
        out = [None] * self.n_edges
        for h in self.hyperplanes:
            for e in h.edges:
                out[e] = h.id
        return out

    def digest(self) -> str:
        from . import formats

        text = formats.dump_ccx(self, include_subs=False)
        return hashlib.sha256(text.encode()).hexdigest()

    def one_skeleton(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.n_vertices))
        for e in range(self.n_edges):
            a, b = self.edge_corners(e)
            g.add_edge(a, b, key=e)
        return g

    def is_connected(self) -> bool:
        return self.n_vertices > 0 and nx.is_connected(self.one_skeleton())


def validate(X: CubeComplex) -> ValidationReport:
    """Facet consistency plus the Gromov link condition at every vertex."""
    rep = ValidationReport()
    for d in range(1, X.max_dim + 1):
        below = len(X.cells_by_dim[d - 1])
        for cid, c in enumerate(X.cells_by_dim[d]):
            if len(c.corners) != 1 << d or len(c.facets) != 2 * d:
                raise StructuralError(f"cell ({d},{cid}): wrong corner or facet count")
            for slot, (fid, perm) in enumerate(c.facets):
                if not 0 <= fid < below:
                    raise StructuralError(f"cell ({d},{cid}) slot {slot}: no cell ({d - 1},{fid})")
                if not _is_cube_isometry(list(perm), d - 1):
                    raise StructuralError(f"cell ({d},{cid}) slot {slot}: perm {perm} is not a cube isometry")
                i, s = divmod(slot, 2)
                target = X.cells_by_dim[d - 1][fid]
                for l in range(1 << (d - 1)):
                    if c.corners[insert_bit(l, i, s)] != target.corners[perm[l]]:
                        rep.structural.append(("corner-mismatch", (d, cid), slot))
                        break
    for c in X.cells_by_dim[0]:
        if len(c.corners) != 1:
            raise StructuralError("vertex cell with wrong corner count")
    if rep.structural:
        return rep
    # shared codimension-2 faces
    for d in range(2, X.max_dim + 1):
        for cid in range(len(X.cells_by_dim[d])):
            for i, j in itertools.combinations(range(d), 2):
                for s in (0, 1):
                    for t in (0, 1):
                        local = [q for q in range(1 << d) if (q >> i & 1) == s and (q >> j & 1) == t]
                        a = X.face((d, cid), local, order=[i, j])
                        b = X.face((d, cid), local, order=[j, i])
                        if a != b:
                            rep.structural.append(("codim2-mismatch", (d, cid), (i, s, j, t)))
    if rep.structural:
        return rep
    for v in range(X.n_vertices):
        rep.link_violations.extend(_link_violations(X, v))
    return rep


def _link_violations(X, v):
    out = []
    seen = {}
    for ends, key, q in X.link_simplices[v]:
        if len(set(ends)) != len(ends):
            out.append(("degenerate-simplex", v, key))
            continue
        fs = frozenset(ends)
        if len(ends) >= 2 and fs in seen:
            out.append(("multi-simplex", v, (seen[fs], key)))
        seen.setdefault(fs, key)
    if out:
        return out
    g = X.link_graph(v)
    for clique in nx.find_cliques(g):
        if len(clique) >= 3 and frozenset(clique) not in seen:
            out.append(("not-flag", v, tuple(sorted(clique))))
    return out


# -- hyperplanes -------------------------------------------------------
@dataclass(frozen=True)
class Hyperplane:
    id: int
    edges: frozenset
    midcubes: tuple  # ((cube key, dual direction), ...)
    two_sided: bool
    carrier: SubcomplexRef
    orientation: tuple = ()  # ((edge, sign), ...) when two-sided


class _ParityUF:
    def __init__(self, n):
        self.parent = list(range(n))
        self.par = [0] * n

    def find(self, a):
        path = []
        while self.parent[a] != a:
            path.append(a)
            a = self.parent[a]
        root = a
        # compress
        acc = 0
        for node in reversed(path):
            acc ^= self.par[node]
            self.par[node] = acc
            self.parent[node] = root
        return root

    def parity(self, a):
        self.find(a)
        return self.par[a] if self.parent[a] != a else 0

    def union(self, a, b, p):
        """Record parity(a) ^ parity(b) == p; return False on conflict."""
        ra, rb = self.find(a), self.find(b)
        pa, pb = self.parity(a), self.parity(b)
        if ra == rb:
            return (pa ^ pb) == p
        self.parent[rb] = ra
        self.par[rb] = pa ^ pb ^ p
        return True


def compute_hyperplanes(X: CubeComplex):
    X.require_npc()
    n = X.n_edges
    uf = _ParityUF(n)
    conflict_roots = []
    if X.max_dim >= 2:
        for cid in range(len(X.cells_by_dim[2])):
            ce = X.cube_edges[(2, cid)]
            for i, (p1, p2) in ((0, (0, 2)), (1, (0, 1))):
                e1, f1 = ce[(p1, i)]
                e2, f2 = ce[(p2, i)]
                if not uf.union(e1, e2, f1 ^ f2):
                    conflict_roots.append(e1)
    one_sided_roots = {uf.find(e) for e in conflict_roots}
    classes = {}
    for e in range(n):
        classes.setdefault(uf.find(e), []).append(e)
    order = sorted(classes, key=lambda r: min(classes[r]))
    root_to_id = {r: i for i, r in enumerate(order)}
    mid = {r: [] for r in order}
    for d in range(1, X.max_dim + 1):
        for cid in range(len(X.cells_by_dim[d])):
            for i in range(d):
                e, _ = X.cube_edges[(d, cid)][(0, i)]
                mid[uf.find(e)].append(((d, cid), i))
    out = []
    for r in order:
        edges = frozenset(classes[r])
        two = r not in one_sided_roots
        orient = tuple((e, 1 - 2 * uf.parity(e)) for e in sorted(edges)) if two else ()
        carrier_cells = X.closure(k for k, _ in mid[r])
        out.append(
            Hyperplane(
                root_to_id[r], edges, tuple(mid[r]), two,
                SubcomplexRef(carrier_cells, None), orient,
            )
        )
    return out


def hyperplane_classes_bruteforce(X: CubeComplex):
    """Independent fixpoint closure of elementary parallelism (test oracle)."""
    n = X.n_edges
    rel = {e: {e} for e in range(n)}
    pairs = []
    if X.max_dim >= 2:
        for cid in range(len(X.cells_by_dim[2])):
            ce = X.cube_edges[(2, cid)]
            pairs.append((ce[(0, 0)][0], ce[(2, 0)][0]))
            pairs.append((ce[(0, 1)][0], ce[(1, 1)][0]))
    changed = True
    while changed:
        changed = False
        for a, b in pairs:
            if rel[a] != rel[b]:
                u = rel[a] | rel[b]
                for e in u:
                    rel[e] = u
                changed = True
    return sorted({frozenset(s) for s in rel.values()}, key=min)


# -- locally convex subcomplexes and local isometries ------------------
def is_locally_convex(X: CubeComplex, cells) -> bool:
    return not locally_convex_witnesses(X, cells)


def locally_convex_witnesses(X, cells):
    """Cubes missing from ``cells`` whose corner edges all lie in ``cells``."""
    cells = set(cells) if not isinstance(cells, (set, frozenset)) else cells
    out = []
    for d in range(2, X.max_dim + 1):
        for cid, c in enumerate(X.cells_by_dim[d]):
            if (d, cid) in cells:
                continue
            for q in range(1 << d):
                if (0, c.corners[q]) not in cells:
                    continue
                if all((1, X.corner_end((d, cid), q, i)[0]) in cells for i in range(d)):
                    out.append((c.corners[q], (d, cid)))
                    break
    return out


@dataclass
class LocalIsometry:
    """A combinatorial map ``domain -> codomain``.

    ``cells[key] = (codomain key, perm)`` with ``perm[c]`` the codomain corner
    index of domain corner ``c``.
    """

    domain: CubeComplex
    codomain: CubeComplex
    cells: dict
    source_sub: SubcomplexRef | None = None  # set for subcomplex inclusions

    def vertex(self, y):
        return self.cells[(0, y)][0][1]

    def end(self, end):
        (_, e), perm = self.cells[(1, end[0])]
        return (e, perm[end[1]])

    def image_cells(self):
        return frozenset(k for k, _ in self.cells.values())

    @property
    def embedded(self) -> bool:
        return self.source_sub is not None


def inclusion(X: CubeComplex, sub) -> LocalIsometry:
    """The subcomplex ``sub`` as its own complex together with its inclusion."""
    if not isinstance(sub, SubcomplexRef):
        sub = X.subcomplex(sub)
    cells = sub.cells
    new_id = {}
    levels = []
    for d in range(X.max_dim + 1):
        ids = sorted(k[1] for k in cells if k[0] == d)
        for j, cid in enumerate(ids):
            new_id[(d, cid)] = j
        levels.append(ids)
    while len(levels) > 1 and not levels[-1]:
        levels.pop()
    out = []
    for d, ids in enumerate(levels):
        row = []
        for cid in ids:
            c = X.cells_by_dim[d][cid]
            corners = tuple(new_id[(0, v)] for v in c.corners)
            facets = tuple((new_id[(d - 1, f)], perm) for f, perm in c.facets)
            row.append(Cell(d, corners, facets))
        out.append(row)
    Y = CubeComplex(out, name=f"sub({X.name})")
    cmap = {}
    for d, ids in enumerate(levels):
        for j, cid in enumerate(ids):
            cmap[(d, j)] = ((d, cid), tuple(range(1 << d)))
    if not isinstance(sub, SubcomplexRef) or sub.locally_convex is None:
        sub = SubcomplexRef(sub.cells, is_locally_convex(X, sub.cells))
    return LocalIsometry(Y, X, cmap, source_sub=sub)


@dataclass
class IsometryReport:
    ok: bool
    witnesses: list


def is_local_isometry(phi: LocalIsometry) -> IsometryReport:
    Y, X = phi.domain, phi.codomain
    wit = []
    for key, (tkey, perm) in phi.cells.items():
        if key[0] != tkey[0]:
            wit.append(("dimension", key))
            continue
        yc, xc = Y.cell(key), X.cell(tkey)
        for c in range(1 << key[0]):
            if phi.vertex(yc.corners[c]) != xc.corners[perm[c]]:
                wit.append(("corner", key))
                break
    if wit:
        return IsometryReport(False, wit)
    for y in range(Y.n_vertices):
        x = phi.vertex(y)
        ends = Y.ends_at[y]
        img = [phi.end(e) for e in ends]
        if len(set(img)) != len(img):
            wit.append(("not-injective", y, tuple(ends)))
            continue
        imgset = set(img)
        ysimp = set()
        for sends, _k, _q in Y.link_simplices[y]:
            ysimp.add(frozenset(phi.end(e) for e in sends))
        for xends, key, _q in X.link_simplices[x]:
            fs = frozenset(xends)
            if len(xends) >= 2 and fs <= imgset and fs not in ysimp:
                wit.append(("not-full", y, key))
    return IsometryReport(not wit, wit)


def compose(psi: LocalIsometry, phi: LocalIsometry) -> LocalIsometry:
    """``psi o phi``."""
    cells = {}
    for k, (mk, p1) in phi.cells.items():
        tk, p2 = psi.cells[mk]
        cells[k] = (tk, tuple(p2[p1[c]] for c in range(len(p1))))
    return LocalIsometry(phi.domain, psi.codomain, cells)


# -- pathologies --------------------------------------------------------
@dataclass
class PathologyReport:
    self_intersections: list
    self_osculations: list
    inter_osculations: list
    one_sided: list
    classification: str

    def summary(self) -> str:
        parts = [self.classification]
        if self.self_intersections:
            parts.append(f"self-intersections: {len(self.self_intersections)}")
        if self.self_osculations:
            parts.append(f"self-osculations: {len(self.self_osculations)}")
        if self.inter_osculations:
            parts.append(f"inter-osculations: {len(self.inter_osculations)}")
        if self.one_sided:
            parts.append(f"one-sided: {len(self.one_sided)}")
        return "; ".join(parts)


def incidences(X: CubeComplex):
    """Yield ``(x, e1, e2, intersect, osculate)`` for distinct edges at ``x``."""
    for x in range(X.n_vertices):
        ends = X.ends_at[x]
        pairs = X.corner_pairs[x]
        by_edge = {}
        for end in ends:
            by_edge.setdefault(end[0], []).append(end)
        edges = sorted(by_edge)
        for e1, e2 in itertools.combinations(edges, 2):
            inter = osc = False
            for a in by_edge[e1]:
                for b in by_edge[e2]:
                    if frozenset((a, b)) in pairs:
                        inter = True
                    else:
                        osc = True
            yield x, e1, e2, inter, osc


def pathology_report(X: CubeComplex) -> PathologyReport:
    cached = X.__dict__.get("_pathology")
    if cached is None:
        cached = X.__dict__["_pathology"] = _pathology_report(X)
    return cached


def _pathology_report(X):
    rep = X.validate()
    if not rep.npc:
        return PathologyReport([], [], [], [], "not-NPC")
    H = X.hyp_of_edge
    si, so = [], []
    meet, touch = {}, {}
    for x, e1, e2, inter, osc in incidences(X):
        h1, h2 = H[e1], H[e2]
        if h1 == h2:
            if inter:
                si.append((x, e1, e2))
            if osc:
                so.append((x, e1, e2))
        else:
            pair = (min(h1, h2), max(h1, h2))
            if inter:
                meet.setdefault(pair, (x, e1, e2))
            if osc:
                touch.setdefault(pair, (x, e1, e2))
    for x in range(X.n_vertices):
        for e in sorted({end[0] for end in X.ends_at[x]}):
            a, b = X.edge_corners(e)
            if a == b == x:
                so.append((x, e))
                if frozenset(((e, 0), (e, 1))) in X.corner_pairs[x]:
                    si.append((x, e, e))
    io = [(pair, meet[pair], touch[pair]) for pair in sorted(meet) if pair in touch]
    one = [h.id for h in X.hyperplanes if not h.two_sided]
    if si or so:
        cls = "NPC-only"
    elif one or io:
        cls = "weakly-special"
    else:
        cls = "directly-special"
    return PathologyReport(si, so, io, one, cls)


@dataclass
class OsculationReport:
    witnesses: list
    intersects: bool

    @property
    def inter_osculates(self) -> bool:
        return self.intersects and bool(self.witnesses)


def subcomplex_osculations(X: CubeComplex, h, Y) -> OsculationReport:
    """Osculations ``(y; e)`` of hyperplane ``h`` with subcomplex ``Y``."""
    cells = Y.cells if isinstance(Y, SubcomplexRef) else frozenset(Y)
    if not is_locally_convex(X, cells):
        raise PreconditionError("subcomplex is not locally convex")
    hid = h.id if isinstance(h, Hyperplane) else h
    H = X.hyp_of_edge
    wit = []
    for y in sorted(k[1] for k in cells if k[0] == 0):
        for e in sorted({end[0] for end in X.ends_at[y]}):
            if (1, e) not in cells and H[e] == hid:
                wit.append((y, e))
    inter = any(H[k[1]] == hid for k in cells if k[0] == 1)
    return OsculationReport(wit, inter)


def inter_osculating_hyperplanes(X, Y):
    return [h.id for h in X.hyperplanes if subcomplex_osculations(X, h, Y).inter_osculates]


def hyperplanes_meeting(X, cells):
    H = X.hyp_of_edge
    return {H[k[1]] for k in cells if k[0] == 1}
