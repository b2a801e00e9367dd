"""Command-line front end.

Exit codes: 0 success, 1 a property fails (or the answer is NonEssential),
2 unknown / budget exhausted, 3 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import formats
from .complex_core import NotNPCError, PreconditionError, StructuralError, pathology_report
from .covers import Unknown
from .development import (
    RadiusExhausted, bridge, develop, gate, hull, orthogonal_complement,
)
from .generators import FIXTURES

OK, FAIL, UNKNOWN, INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _out(lines):
    for ln in lines:
        print(ln)


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _load(path):
    X, _maps = formats.parse_ccx(_read(path))
    return X


def _ints(s):
    return [int(x) for x in s.split(",") if x != ""] if s else []


def _ends(s):
    """``3,4~,0`` -> ends; ``~`` marks reverse traversal."""
    out = []
    for tok in filter(None, (s or "").split(",")):
        out.append((int(tok[:-1]), 1) if tok.endswith("~") else (int(tok), 0))
    return out


def _sub(X, name):
    if name not in X.subs:
        raise InputError(f"unknown subcomplex {name!r}; known: {', '.join(sorted(X.subs)) or 'none'}")
    return X.subs[name].cells


def _route(X, path):
    base = os.path.dirname(path)

    def loader(name):
        return formats.parse_map(_read(os.path.join(base, name)), X)

    return formats.parse_route(_read(path), X, map_loader=loader)


def _sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# -- commands ---------------------------------------------------------------------
def cmd_validate(a):
    X = _load(a.complex)
    rep = X.validate()
    _out([rep.summary()] + [f"  {v}" for v in (rep.structural + rep.link_violations)[:20]])
    return OK if rep.npc else FAIL


def cmd_classify(a):
    X = _load(a.complex)
    rep = pathology_report(X)
    _out([rep.summary()])
    return OK


def cmd_hyperplanes(a):
    X = _load(a.complex)
    X.require_npc()
    lines = [f"hyperplanes: {len(X.hyperplanes)}"]
    for h in X.hyperplanes:
        lines.append(f"{h.id} edges={','.join(map(str, sorted(h.edges)))} "
                     f"two-sided={'yes' if h.two_sided else 'no'} carrier-cells={len(h.carrier.cells)}")
    _out(lines)
    return OK


def cmd_gen(a):
    if a.name not in FIXTURES:
        raise InputError(f"unknown fixture {a.name!r}; choose from {', '.join(sorted(FIXTURES))}")
    X = FIXTURES[a.name](*a.params)
    text = formats.dump_ccx(X)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        _out([f"wrote {a.output}: {X.n_vertices} vertices, {X.n_edges} edges, dim {X.max_dim}"])
    else:
        sys.stdout.write(text)
    return OK


def cmd_develop(a):
    X = _load(a.complex)
    ball = develop(X, a.basepoint, a.radius)
    _out([f"radius {ball.R} exact-region {ball.safe}",
          f"vertices {ball.n} edges {ball.total.n_edges} hyperplanes {ball.n_hyp} crossings {len(ball.crossings)}"])
    return OK


def _cset(ball, s):
    return hull(ball, _ints(s))


def cmd_geometry(a):
    X = _load(a.complex)
    ball = develop(X, a.basepoint, a.radius)
    if a.geom == "gate":
        A = _cset(ball, a.a)
        _out([f"gate {gate(ball, A, a.x)}"])
    elif a.geom == "hull":
        H = _cset(ball, a.a)
        _out([f"hull vertices {','.join(map(str, sorted(H.vertices)))}",
              f"hyperplanes {','.join(map(str, sorted(H.hyps)))}"])
    elif a.geom == "bridge":
        br = bridge(ball, _cset(ball, a.a), _cset(ball, a.b))
        _out([f"projection onto A {','.join(map(str, sorted(br.C.vertices)))}",
              f"projection onto B {','.join(map(str, sorted(br.C_B.vertices)))}",
              f"separators {','.join(map(str, sorted(br.separators)))}",
              "checks " + " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in sorted(br.checks.items()))])
    else:
        oc = orthogonal_complement(ball, _cset(ball, a.a), a.x)
        _out([f"complement {','.join(map(str, sorted(oc.B.vertices)))}",
              f"transverse {','.join(map(str, sorted(oc.transverse)))}",
              f"chart {'ok' if oc.chart_ok else 'partial'}"])
    return OK


def cmd_imitate(a):
    from .walker import end_vertex, imitate, trace_lines

    X = _load(a.complex)
    path = _ends(a.path)
    ev = imitate(X, _sub(X, a.sub), a.y, path)
    _out(trace_lines(path, ev) + [f"imitator ends at {end_vertex(X, a.y, ev)}"])
    return OK


def cmd_completion(a):
    from .walker import imitator_cover

    X = _load(a.complex)
    ic = imitator_cover(X, _sub(X, a.sub), a.y)
    text = formats.dump_cov(ic.cover)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    _out([f"imitator cover degree {ic.cover.degree} basepoint {ic.basepoint}",
          f"regular {'yes' if ic.cover.is_regular() else 'no'}"])
    return OK


def cmd_entrap(a):
    from .walker import entrapment_check

    X = _load(a.complex)
    rep = entrapment_check(X, _sub(X, a.sub), _sub(X, a.zone), a.trials, a.length, a.seed)
    _out([f"trials {rep.trials} suspended {rep.suspended} violations {len(rep.violations)}"]
         + [f"  {v}" for v in rep.violations[:10]])
    return OK if not rep.violations else FAIL


# -- routes ----------------------------------------------------------------------------
def cmd_route(a):
    from . import routes as rt

    X = _load(a.complex)
    if a.action == "synth":
        return _synth_many(a, X)
    r = _route(X, a.route[0])
    if a.action == "check":
        ess = rt.is_essential(r, a.radius) if r.closed else None
        lines = [f"route n={r.n} closed={'yes' if r.closed else 'no'} embedded={'yes' if r.embedded else 'no'}"]
        if ess is not None:
            lines.append(f"essential: {type(ess).__name__}")
        if r.n >= 4 and r.embedded:
            ok, wit = rt.check_trap(r)
            lines.append(f"trap: {'holds' if ok else 'fails'} {wit[:5] if wit else ''}".rstrip())
        if r.embedded and r.n >= 3:
            lines.append(f"hyp index: {rt.hyp_index(r, a.radius)}")
        _out(lines)
        return FAIL if isinstance(ess, rt.NonEssential) else OK
    if a.action == "pj":
        P = rt.compute_Pj(r, a.j, a.radius)
        _out([f"P_{a.j}: {len(P.elements)} elements, {len(P.classes)} classes, kappa {P.kappa}, "
              f"{'exact' if P.exact else 'in-ball'}"])
        return OK
    fam = rt.omega_family(r, a.j, a.radius)
    _out([f"omega family: {len(fam)} routes"] + [f"  {x.vertices}" for x in fam])
    return OK


def _synth_one(args):
    ccx_path, route_path, max_degree, radius, outdir = args
    from . import routes as rt

    X = _load(ccx_path)
    r = _route(X, route_path)
    res = rt.synthesize_cover(r, max_degree=max_degree, R=radius)
    if isinstance(res, rt.NonEssential):
        return FAIL, [f"{route_path}: not essential; witness {res.witness}"]
    if isinstance(res, Unknown):
        return UNKNOWN, [f"{route_path}: unknown ({res.reason})"] + res.transcript
    d = outdir or os.path.splitext(route_path)[0] + ".cert"
    write_bundle(d, X, r, res.cover, res.transcript)
    return OK, [f"{route_path}: cover degree {res.cover.degree} via {res.method}", f"bundle {d}"]


def _synth_many(a, X):
    if a.output and len(a.route) > 1:
        raise InputError("--output takes a single route")
    jobs = [(a.complex, p, a.max_degree, a.radius, a.output) for p in a.route]
    if a.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(a.jobs) as ex:
            results = list(ex.map(_synth_one, jobs))
    else:
        results = [_synth_one(j) for j in jobs]
    for _code, lines in results:
        _out(lines)
    return max(code for code, _ in results)


# -- bundles ---------------------------------------------------------------------------
def write_bundle(d, X, route, cover, transcript):
    os.makedirs(d, exist_ok=True)
    files = {"complex.ccx": formats.dump_ccx(X)}
    map_names = {}
    for i, c in enumerate(route.components, start=1):
        if not (c.name and c.name in X.subs and c.embedded):
            map_names[i] = f"comp{i}.map"
            files[map_names[i]] = formats.dump_map(c.phi)
    files["route.route"] = formats.dump_route(route, map_names)
    files["cover.cov"] = formats.dump_cov(cover)
    files["transcript.txt"] = "\n".join(transcript) + "\n"
    for name, text in files.items():
        with open(os.path.join(d, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    manifest = {name: _sha(os.path.join(d, name)) for name in sorted(files)}
    with open(os.path.join(d, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return d


def verify_bundle(d):
    """Recheck a bundle from its files alone: ``(code, lines)``."""
    from .routes import verify_no_closed_elevations

    try:
        manifest = json.loads(_read(os.path.join(d, "manifest.json")))
    except ValueError as exc:
        raise InputError(f"bad manifest: {exc}") from exc
    for name, digest in sorted(manifest.items()):
        p = os.path.join(d, name)
        if not os.path.exists(p) or _sha(p) != digest:
            raise InputError(f"hash mismatch: {name}")
    X = _load(os.path.join(d, "complex.ccx"))
    r = _route(X, os.path.join(d, "route.route"))
    cov = formats.parse_cov(_read(os.path.join(d, "cover.cov")), X)
    if cov.degree == 1:
        return FAIL, ["degree-1 cover cannot certify a closed route"]
    ok, lines = verify_no_closed_elevations(r, cov)
    return (OK if ok else FAIL), lines


def cmd_verify(a):
    code, lines = verify_bundle(a.bundle)
    _out(lines)
    return code


# -- separability ------------------------------------------------------------------------
def _subgroup(X, spec):
    """``NAME[:y[:path]]`` with ``y`` an ambient vertex and ``path`` ends from x to y."""
    from .complex_core import inclusion
    from .routes import _domain_vertex
    from .separability import SubgroupPresentation

    parts = spec.split(":")
    phi = inclusion(X, X.subs[parts[0]] if parts[0] in X.subs else _sub(X, parts[0]))
    y = int(parts[1]) if len(parts) > 1 and parts[1] else phi.vertex(0)
    gamma = tuple(_ends(parts[2])) if len(parts) > 2 else ()
    return SubgroupPresentation(phi, _domain_vertex(phi, y), gamma, parts[0])


def cmd_sep(a):
    from . import routes as rt
    from .separability import build_separating_route, certify_nonmembership

    X = _load(a.complex)
    Ks = [_subgroup(X, s) for s in a.subgroup]
    sep = build_separating_route(Ks, tuple(_ends(a.g)), R=a.radius)
    lines = [f"route n={sep.route.n}{' provisional' if sep.provisional else ''}",
             f"essential: {type(sep.essential).__name__}"]
    if sep.nonessential:
        _out(lines + ["g lies in the product"])
        return FAIL
    if a.action == "build":
        if a.output:
            write_route_dir(a.output, X, sep.route)
            lines.append(f"wrote {a.output}")
        _out(lines)
        return OK
    cert = rt.synthesize_cover(sep.route, max_degree=a.max_degree, R=min(a.radius, 8))
    if isinstance(cert, Unknown):
        _out(lines + [f"unknown: {cert.reason}"])
        return UNKNOWN
    nm = certify_nonmembership(sep, cert, L=a.seg_len)
    lines += nm.transcript
    if a.output:
        write_bundle(a.output, X, sep.route, cert.cover, nm.transcript)
        lines.append(f"bundle {a.output}")
    _out(lines)
    return OK


def write_route_dir(d, X, route):
    os.makedirs(d, exist_ok=True)
    map_names = {}
    for i, c in enumerate(route.components, start=1):
        if not (c.name and c.name in X.subs and c.embedded):
            map_names[i] = f"comp{i}.map"
            with open(os.path.join(d, map_names[i]), "w", encoding="utf-8") as fh:
                fh.write(formats.dump_map(c.phi))
    with open(os.path.join(d, "complex.ccx"), "w", encoding="utf-8") as fh:
        fh.write(formats.dump_ccx(X))
    with open(os.path.join(d, "route.route"), "w", encoding="utf-8") as fh:
        fh.write(formats.dump_route(route, map_names))


# -- contact ------------------------------------------------------------------------------
def cmd_contact(a):
    from .contact import contact_distance, contact_graph, guard_subgroup

    X = _load(a.complex)
    if a.action == "guard":
        res = guard_subgroup(X, a.v, a.w, max_degree=a.max_degree, r=a.deck_radius, R=a.radius)
        if isinstance(res, Unknown):
            _out([f"unknown: {res.reason}"] + res.transcript)
            return UNKNOWN
        cov, rep = res
        _out(rep.lines())
        if a.output:
            with open(a.output, "w", encoding="utf-8") as fh:
                fh.write(formats.dump_cov(cov))
        return OK if rep.ok else FAIL
    ball = develop(X, a.basepoint, a.radius)
    cg = contact_graph(ball)
    if a.action == "graph":
        _out([f"hyperplanes {cg.graph.number_of_nodes()} contacts {cg.graph.number_of_edges()} "
              f"interior {len(cg.interior)} (frontier marked *)"] + cg.adjacency_lines())
        return OK
    cd = contact_distance(ball, a.v, a.w, cg)
    _out([f"d {cd.d} {'certified' if cd.certified else 'upper-bound'} ({cd.reason})",
          f"path {' '.join(map(str, cd.path))}"])
    return OK


# -- parser -------------------------------------------------------------------------------------
def build_parser():
    p = argparse.ArgumentParser(prog="cuberoutes", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    def cx(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("complex", help=".ccx file")
        sp.set_defaults(fn=fn)
        return sp

    def budgets(sp):
        sp.add_argument("--radius", type=int, default=8)
        sp.add_argument("--max-degree", type=int, default=64)
        sp.add_argument("--seg-len", type=int, default=6)
        sp.add_argument("--jobs", type=int, default=1)

    cx("validate", cmd_validate, "check structure and the link condition")
    cx("classify", cmd_classify, "pathology classification")
    cx("hyperplanes", cmd_hyperplanes, "list hyperplanes")

    g = sub.add_parser("gen", help="write a fixture complex")
    g.add_argument("name")
    g.add_argument("params", nargs="*")
    g.add_argument("-o", "--output")
    g.set_defaults(fn=cmd_gen)

    d = cx("develop", cmd_develop, "develop a ball of the universal cover")
    d.add_argument("--basepoint", type=int, default=0)
    budgets(d)

    for name in ("gate", "hull", "bridge", "orthocomp"):
        sp = cx(name, cmd_geometry, f"{name} in a developed ball (ball vertex ids)")
        sp.add_argument("--a", required=True, help="comma-separated ball vertices (hull taken)")
        sp.add_argument("--b", default="")
        sp.add_argument("--x", type=int, default=0)
        sp.add_argument("--basepoint", type=int, default=0)
        budgets(sp)
        sp.set_defaults(geom=name)

    im = cx("imitate", cmd_imitate, "walker/imitator trace")
    im.add_argument("--sub", required=True)
    im.add_argument("--y", type=int, required=True)
    im.add_argument("--path", required=True, help="edge ids, '~' for reverse traversal")

    cp = cx("completion", cmd_completion, "imitator cover")
    cp.add_argument("--sub", required=True)
    cp.add_argument("--y", type=int, required=True)
    cp.add_argument("-o", "--output")

    en = cx("entrap", cmd_entrap, "sample the trapping clauses")
    en.add_argument("--sub", required=True)
    en.add_argument("--zone", required=True)
    en.add_argument("--seed", type=int, required=True)
    en.add_argument("--trials", type=int, default=200)
    en.add_argument("--length", type=int, default=12)

    rt = sub.add_parser("route", help="route operations")
    rt.add_argument("action", choices=["check", "pj", "omega", "synth"])
    rt.add_argument("complex")
    rt.add_argument("route", nargs="+")
    rt.add_argument("--j", type=int, default=3)
    rt.add_argument("-o", "--output")
    budgets(rt)
    rt.set_defaults(fn=cmd_route)

    sp = sub.add_parser("sep", help="product separability")
    sp.add_argument("action", choices=["build", "certify"])
    sp.add_argument("complex")
    sp.add_argument("--subgroup", action="append", required=True, help="NAME[:y[:path]]")
    sp.add_argument("--g", required=True, help="loop at the base vertex")
    sp.add_argument("-o", "--output")
    budgets(sp)
    sp.set_defaults(fn=cmd_sep, radius=16)

    ct = sub.add_parser("contact", help="contact graphs")
    ct.add_argument("action", choices=["graph", "dist", "guard"])
    ct.add_argument("complex")
    ct.add_argument("--v", type=int, default=0)
    ct.add_argument("--w", type=int, default=0)
    ct.add_argument("--basepoint", type=int, default=0)
    ct.add_argument("--deck-radius", type=int, default=4)
    ct.add_argument("-o", "--output")
    budgets(ct)
    ct.set_defaults(fn=cmd_contact)

    vf = sub.add_parser("verify", help="recheck a certificate bundle")
    vf.add_argument("bundle")
    vf.set_defaults(fn=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, formats.FormatError, StructuralError, NotNPCError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT
    except RadiusExhausted as exc:
        print(f"unknown: {exc}", file=sys.stderr)
        return UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
