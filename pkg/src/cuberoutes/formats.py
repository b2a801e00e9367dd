"""Text formats: ``.ccx`` complexes (plus maps), ``.cov`` covers, ``.route`` routes.

All writers are canonical: records are sorted, so a save/load/save cycle is
byte-identical.
"""

from __future__ import annotations

from .complex_core import Cell, CubeComplex, LocalIsometry, SubcomplexRef


class FormatError(ValueError):
    pass


def _perm(p):
    return ".".join(map(str, p))


def _parse_perm(s):
    return tuple(int(x) for x in s.split(".")) if s else ()


def dump_ccx(X: CubeComplex, include_subs=True, maps=None) -> str:
    lines = ["ccx 1"]
    for d, row in enumerate(X.cells_by_dim):
        for cid, c in enumerate(row):
            facets = ",".join(f"({slot}:{f}:{_perm(p)})" for slot, (f, p) in enumerate(c.facets))
            lines.append(f"cell {d} {cid} corners={','.join(map(str, c.corners))} facets={facets}")
    if include_subs:
        for name in sorted(X.subs):
            cells = ",".join(f"{d}:{i}" for d, i in sorted(X.subs[name].cells))
            lines.append(f"sub {name} cells={cells}")
    for key, (tkey, perm) in sorted((maps or {}).items()):
        lines.append(f"map {key[0]} {key[1]} {tkey[0]} {tkey[1]} perm={_perm(perm)}")
    return "\n".join(lines) + "\n"


def parse_ccx(text: str):
    """Return ``(complex, maps)``; ``maps`` holds any ``map`` records."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].split()[:1] != ["ccx"]:
        raise FormatError("missing ccx header")
    if lines[0] != "ccx 1":
        raise FormatError(f"unsupported version: {lines[0]!r}")
    cells = {}
    subs = {}
    maps = {}
    for ln in lines[1:]:
        parts = ln.split()
        kind = parts[0]
        try:
            if kind == "cell":
                d, cid = int(parts[1]), int(parts[2])
                kv = dict(p.split("=", 1) for p in parts[3:])
                corners = tuple(int(x) for x in kv["corners"].split(","))
                facets = []
                body = kv.get("facets", "")
                if body:
                    for chunk in body.split("),("):
                        slot, f, p = chunk.strip("()").split(":")
                        facets.append((int(slot), int(f), _parse_perm(p)))
                facets.sort()
                if [s for s, _, _ in facets] != list(range(len(facets))):
                    raise FormatError(f"cell {d} {cid}: facet slots not contiguous")
                cells[(d, cid)] = Cell(d, corners, tuple((f, p) for _, f, p in facets))
            elif kind == "sub":
                name = parts[1]
                body = parts[2].split("=", 1)[1] if len(parts) > 2 else ""
                keys = frozenset(tuple(int(x) for x in k.split(":")) for k in body.split(",") if k)
                subs[name] = keys
            elif kind == "map":
                key = (int(parts[1]), int(parts[2]))
                tkey = (int(parts[3]), int(parts[4]))
                maps[key] = (tkey, _parse_perm(parts[5].split("=", 1)[1]))
            else:
                raise FormatError(f"unknown record {kind!r}")
        except (KeyError, IndexError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"bad record: {ln!r}") from exc
    top = max((d for d, _ in cells), default=0)
    levels = []
    for d in range(top + 1):
        ids = sorted(i for dd, i in cells if dd == d)
        if ids != list(range(len(ids))):
            raise FormatError(f"cell ids in dimension {d} are not 0..n-1")
        levels.append([cells[(d, i)] for i in ids])
    X = CubeComplex(levels)
    for name, keys in subs.items():
        X.subs[name] = SubcomplexRef(keys, None)
    return X, maps


def load_ccx(path):
    with open(path, encoding="utf-8") as fh:
        return parse_ccx(fh.read())


def save_ccx(X, path, maps=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_ccx(X, maps=maps))


# -- maps ----------------------------------------------------------------
def dump_map(phi: LocalIsometry) -> str:
    """Domain complex plus ``map`` records into the codomain."""
    return dump_ccx(phi.domain, maps=phi.cells)


def parse_map(text, codomain) -> LocalIsometry:
    Y, maps = parse_ccx(text)
    if not maps:
        raise FormatError("map file has no map records")
    return LocalIsometry(Y, codomain, maps)


# -- covers ----------------------------------------------------------------
def dump_cov(cover) -> str:
    """Voltage description of a connected cover: fibre indices 0..m-1."""
    lines = ["cov 1", f"base {cover.base.digest()}", f"degree {cover.degree}"]
    for e, images in enumerate(cover.edge_voltages()):
        lines.append(f"volt {e} {','.join(map(str, images))}")
    return "\n".join(lines) + "\n"


def parse_cov(text, base: CubeComplex, check_hash=True):
    from .covers import Voltage, cover_from_voltage

    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "cov 1":
        raise FormatError("missing or unsupported cov header")
    head = dict(ln.split(None, 1) for ln in lines[1:3])
    if head.get("base") is None or "degree" not in head:
        raise FormatError("cov file lacks base/degree")
    if check_hash and head["base"] != base.digest():
        raise FormatError("base hash mismatch")
    m = int(head["degree"])
    perms = {}
    for ln in lines[3:]:
        parts = ln.split()
        if parts[0] != "volt":
            raise FormatError(f"unknown record {parts[0]!r}")
        perms[int(parts[1])] = tuple(int(x) for x in parts[2].split(","))
    if sorted(perms) != list(range(base.n_edges)):
        raise FormatError("volt records do not cover every edge")
    return cover_from_voltage(base, Voltage(m, [perms[e] for e in range(base.n_edges)]))


# -- routes ----------------------------------------------------------------
def dump_route(route, map_names=None) -> str:
    """``map_names[i]`` names a map file for non-embedded components.

    ``sub=`` components use ambient vertex ids, ``map=`` ones use domain ids.
    """
    map_names = map_names or {}
    lines = [f"route n={route.n}"]
    for i, v in enumerate(route.vertices):
        lines.append(f"vertex {i} {v}")
    for i, comp in enumerate(route.components, start=1):
        if i in map_names:
            lines.append(f"comp {i} map={map_names[i]} in={comp.entry} out={comp.exit}")
        elif comp.name and comp.name in route.X.subs:
            lines.append(f"comp {i} sub={comp.name} in={comp.entry_x} out={comp.exit_x}")
        else:
            raise FormatError(f"component {i} needs a named subcomplex or a map file")
    return "\n".join(lines) + "\n"


def parse_route(text, X: CubeComplex, map_loader=None):
    from .routes import Component, Route

    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("route n="):
        raise FormatError("missing route header")
    n = int(lines[0].split("=", 1)[1])
    verts = {}
    comps = {}
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "vertex":
            verts[int(parts[1])] = int(parts[2])
        elif parts[0] == "comp":
            kv = dict(p.split("=", 1) for p in parts[2:])
            comps[int(parts[1])] = kv
        else:
            raise FormatError(f"unknown record {parts[0]!r}")
    if sorted(verts) != list(range(n + 1)) or sorted(comps) != list(range(1, n + 1)):
        raise FormatError("route records incomplete")
    out = []
    for i in range(1, n + 1):
        kv = comps[i]
        if "sub" in kv:
            name = kv["sub"]
            if name not in X.subs:
                raise FormatError(f"unknown subcomplex {name!r}")
            out.append(Component.from_sub(X, X.subs[name], int(kv["in"]), int(kv["out"]), name=name, vertex_ids="ambient"))
        elif "map" in kv:
            if map_loader is None:
                raise FormatError("map component without loader")
            phi = map_loader(kv["map"])
            out.append(Component(phi, int(kv["in"]), int(kv["out"])))
        else:
            raise FormatError("component needs sub= or map=")
    return Route(X, [verts[i] for i in range(n + 1)], out)
