"""Fixture complexes: segments, cycles, cubes, products, roses, thetas, Salvetti complexes."""

from __future__ import annotations

import networkx as nx

from .complex_core import Cell, CubeComplex


def graph_complex(n_vertices, edges, name=None) -> CubeComplex:
    """A 1-dimensional complex; ``edges`` is a list of ``(u, v)`` pairs."""
    verts = [Cell(0, (v,)) for v in range(n_vertices)]
    es = [Cell(1, (u, v), ((u, (0,)), (v, (0,)))) for u, v in edges]
    return CubeComplex([verts, es] if es else [verts], name=name)


def point() -> CubeComplex:
    return CubeComplex([[Cell(0, (0,))]], name="POINT")


def segment(k) -> CubeComplex:
    return graph_complex(k + 1, [(i, i + 1) for i in range(k)], name=f"SEG({k})")


def cycle(k) -> CubeComplex:
    if k < 2:
        raise ValueError("cycle needs k >= 2")
    return graph_complex(k, [(i, (i + 1) % k) for i in range(k)], name=f"CYC({k})")


def rose(r) -> CubeComplex:
    return graph_complex(1, [(0, 0)] * r, name=f"ROSE({r})")


def theta(r=3) -> CubeComplex:
    """Two vertices ``p=0``, ``q=1`` joined by ``r`` edges, all oriented p -> q."""
    return graph_complex(2, [(0, 1)] * r, name="THETA" if r == 3 else f"THETA({r})")


def product(A: CubeComplex, B: CubeComplex, name=None) -> CubeComplex:
    """Cellular product.  Corner index of ``(a, b)`` is ``ca | cb << dim(a)``.

    The result carries ``factor_index``: ``(key_a, key_b) -> key``.
    """
    nB = B.n_vertices
    top = A.max_dim + B.max_dim
    index = {}
    levels = [[] for _ in range(top + 1)]
    for d in range(top + 1):
        for p in range(d + 1):
            q = d - p
            if p > A.max_dim or q > B.max_dim:
                continue
            for ia in range(A.count(p)):
                for ib in range(B.count(q)):
                    index[((p, ia), (q, ib))] = (d, len(levels[d]))
                    levels[d].append(((p, ia), (q, ib)))
    out = []
    for d, row in enumerate(levels):
        cells = []
        for ka, kb in row:
            p, q = ka[0], kb[0]
            ca_, cb_ = A.cell(ka), B.cell(kb)
            corners = tuple(
                ca_.corners[c & ((1 << p) - 1)] * nB + cb_.corners[c >> p] for c in range(1 << d)
            )
            facets = []
            for i in range(p):
                for s in (0, 1):
                    fa, perm = ca_.facets[2 * i + s]
                    tgt = index[((p - 1, fa), kb)]
                    m = p - 1
                    fp = tuple(perm[l & ((1 << m) - 1)] | ((l >> m) << m) for l in range(1 << (d - 1)))
                    facets.append((tgt[1], fp))
            for j in range(q):
                for s in (0, 1):
                    fb, perm = cb_.facets[2 * j + s]
                    tgt = index[(ka, (q - 1, fb))]
                    fp = tuple((l & ((1 << p) - 1)) | (perm[l >> p] << p) for l in range(1 << (d - 1)))
                    facets.append((tgt[1], fp))
            cells.append(Cell(d, corners, tuple(facets)))
        out.append(cells)
    X = CubeComplex(out, name=name or f"{A.name}x{B.name}")
    X.factor_index = index
    return X


def product_cells(X: CubeComplex, cells_a, cells_b):
    """Cells of ``X = product(A, B)`` spanned by ``cells_a x cells_b``."""
    return frozenset(X.factor_index[(ka, kb)] for ka in cells_a for kb in cells_b)


def cube(d) -> CubeComplex:
    X = point()
    for _ in range(d):
        X = product(X, segment(1))
    X.name = f"CUBE({d})"
    return X


def torus(a, b) -> CubeComplex:
    return product(cycle(a), cycle(b), name=f"TORUS({a},{b})")


def grid(m, n) -> CubeComplex:
    return product(segment(m), segment(n), name=f"GRID({m},{n})")


def salvetti(graph, max_dim=None, truncate=False) -> CubeComplex:
    """Salvetti complex of the right-angled Artin group on ``graph``.

    Generators are the graph's nodes in sorted order; loop edge ``i`` is the
    ``i``-th generator.  Each clique with sorted generators ``g_0 < ... <
    g_{k-1}`` gives a k-cube whose coordinate ``i`` is ``g_i``.
    """
    if not isinstance(graph, nx.Graph):
        g = nx.Graph()
        verts, edges = graph
        g.add_nodes_from(verts)
        g.add_edges_from(edges)
        graph = g
    labels = sorted(graph.nodes)
    pos = {v: i for i, v in enumerate(labels)}
    cliques = sorted({tuple(sorted(pos[v] for v in c)) for c in nx.enumerate_all_cliques(graph)})
    omega = max((len(c) for c in cliques), default=0)
    if max_dim is None:
        max_dim = omega
    if max_dim < omega and not truncate:
        raise ValueError(f"max_dim={max_dim} below clique number {omega}; pass truncate=True")
    cliques = [c for c in cliques if len(c) <= max_dim]
    by_dim = {}
    for c in sorted(cliques, key=lambda c: (len(c), c)):
        by_dim.setdefault(len(c), []).append(c)
    ident = {c: i for d in by_dim for i, c in enumerate(by_dim[d])}
    out = [[Cell(0, (0,))]]
    for d in range(1, max(by_dim, default=0) + 1):
        row = []
        for c in by_dim.get(d, []):
            facets = []
            for i in range(d):
                sub = c[:i] + c[i + 1:]
                fid = 0 if d == 1 else ident[sub]
                for _s in (0, 1):
                    facets.append((fid, tuple(range(1 << (d - 1)))))
            row.append(Cell(d, (0,) * (1 << d), tuple(facets)))
        out.append(row)
    X = CubeComplex(out, name="SALV")
    X.generator_labels = labels
    return X


def from_vertex_cubes(n_vertices, cubes, name=None) -> CubeComplex:
    """Complex whose cells are determined by their (distinct) corner vertices.

    ``cubes`` lists corner tuples of length ``2**d``; all faces are created
    and identified by vertex set.  Suitable for grids glued without
    self-identifications.
    """
    found = {}

    def add(corners):
        d = len(corners).bit_length() - 1
        key = frozenset(corners)
        if key in found:
            return
        found[key] = corners
        for i in range(d):
            for s in (0, 1):
                add(tuple(corners[c] for c in range(1 << d) if (c >> i & 1) == s))

    for v in range(n_vertices):
        add((v,))
    for c in cubes:
        add(tuple(c))
    by_dim = {}
    for key, corners in found.items():
        by_dim.setdefault(len(corners).bit_length() - 1, []).append(corners)
    for d in by_dim:
        by_dim[d].sort(key=lambda c: (tuple(sorted(c)), c))
    ids = {frozenset(c): (d, i) for d, row in by_dim.items() for i, c in enumerate(row)}
    out = []
    for d in range(max(by_dim) + 1):
        row = []
        for corners in by_dim.get(d, []):
            facets = []
            for i in range(d):
                for s in (0, 1):
                    sub = [corners[c] for c in range(1 << d) if (c >> i & 1) == s]
                    tk = ids[frozenset(sub)]
                    tgt = by_dim[d - 1][tk[1]]
                    facets.append((tk[1], tuple(tgt.index(v) for v in sub)))
            row.append(Cell(d, tuple(corners), tuple(facets)))
        out.append(row)
    return CubeComplex(out, name=name)


def double_edge_link() -> CubeComplex:
    """Two squares sharing two consecutive edges: link at vertex 0 has a double edge."""
    return from_vertex_cubes(5, [(0, 1, 2, 3), (0, 1, 2, 4)], name="DOUBLE")


def hollow_cube_corner() -> CubeComplex:
    """Three squares around a corner of a 3-cube without the 3-cell (non-flag link)."""
    return from_vertex_cubes(7, [(0, 1, 2, 3), (0, 1, 4, 5), (0, 2, 4, 6)], name="HOLLOW")


def grid_vertex(m, n, i, j):
    """Vertex id of lattice point ``(i, j)`` in ``grid(m, n)``."""
    return i * (n + 1) + j


def torus_vertex(a, b, i, j):
    return (i % a) * b + (j % b)


def iter_fixtures():
    """Small named fixtures used across tests and the ``gen`` command."""
    yield "SEG(3)", segment(3)
    yield "CYC(2)", cycle(2)
    yield "CYC(4)", cycle(4)
    yield "CUBE(2)", cube(2)
    yield "CUBE(3)", cube(3)
    yield "ROSE(2)", rose(2)
    yield "THETA", theta()
    yield "TORUS(2,2)", torus(2, 2)
    yield "GRID(2,2)", grid(2, 2)
    yield "SALV(K2)", salvetti(([0, 1], [(0, 1)]))


FIXTURES = {
    "seg": lambda k=3: segment(int(k)),
    "cyc": lambda k=2: cycle(int(k)),
    "cube": lambda d=2: cube(int(d)),
    "rose": lambda r=2: rose(int(r)),
    "theta": lambda r=3: theta(int(r)),
    "torus": lambda a=2, b=2: torus(int(a), int(b)),
    "grid": lambda m=2, n=2: grid(int(m), int(n)),
    "salv-k2": lambda: salvetti(([0, 1], [(0, 1)])),
    "double": double_edge_link,
    "hollow": hollow_cube_corner,
}
