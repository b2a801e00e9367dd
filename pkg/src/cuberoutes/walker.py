"""Walker and imitator dynamics, and the imitator covers they define.

A walker moves along edges of X; an imitator sitting in a subcomplex Y
copies each step by the unique Y-edge at its position dual to the same
hyperplane, or stays put when there is none.  The state space V(X) x V(Y)
is a deterministic transducer; the component of ``(y, y)`` is a finite cover
of X whose based loops are exactly the walker loops returning the imitator
to ``y``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .complex_core import PreconditionError, SubcomplexRef, is_locally_convex, pathology_report
from .covers import CoveringMap, lift_complex, verify_cover


class AmbiguousImitation(PreconditionError):
    """Two Y-ends at a vertex share a hyperplane: a self-osculation."""


STAY = None


def _cells(Y):
    return Y.cells if isinstance(Y, SubcomplexRef) else frozenset(Y)


def require_directly_special(X):
    rep = pathology_report(X)
    if rep.classification != "directly-special":
        raise PreconditionError(f"X is not directly special ({rep.summary()})")


class Imitator:
    """Transition table of the imitator for a fixed pair (X, Y)."""

    def __init__(self, X, Y, check=True):
        cells = _cells(Y)
        if check:
            require_directly_special(X)
            if not is_locally_convex(X, cells):
                raise PreconditionError("Y is not locally convex")
        self.X = X
        self.cells = cells
        self.vertices = sorted(k[1] for k in cells if k[0] == 0)
        H = X.hyp_of_edge
        self.table = {}
        for y in self.vertices:
            by_h = {}
            for end in X.ends_at[y]:
                if (1, end[0]) in cells:
                    h = H[end[0]]
                    if h in by_h:
                        raise AmbiguousImitation(f"ends {by_h[h]} and {end} at {y} are both dual to hyperplane {h}")
                    by_h[h] = end
            self.table[y] = by_h

    def respond(self, y, end):
        """The imitator end answering walker end ``end``, or STAY."""
        return self.table[y].get(self.X.hyp_of_edge[end[0]], STAY)

    def step(self, end, y):
        f = self.respond(y, end)
        return y if f is STAY else self.X.head(f)


def imitate(X, Y, y, path, check=True):
    """Imitator response to a walker path (list of ends); one event per step."""
    im = Imitator(X, Y, check=check)
    if y not in im.table:
        raise ValueError(f"start {y} is not a vertex of Y")
    events = []
    x = None
    for end in path:
        if x is not None and X.tail(end) != x:
            raise ValueError(f"walker path breaks at {end}")
        x = X.head(end)
        f = im.respond(y, end)
        events.append(f)
        if f is not STAY:
            y = X.head(f)
    return events


def end_vertex(X, y, events):
    for f in events:
        if f is not STAY:
            y = X.head(f)
    return y


def _fmt_end(end):
    return f"{end[0]}" if end[1] == 0 else f"{end[0]}~"


def trace_lines(path, events):
    """``step <i> walker <e or e~> imitator <f|stay>`` (``~`` marks reverse traversal)."""
    out = []
    for i, (e, f) in enumerate(zip(path, events)):
        out.append(f"step {i} walker {_fmt_end(e)} imitator {'stay' if f is STAY else _fmt_end(f)}")
    return out


@dataclass
class SquareReport:
    ok: bool
    witness: tuple | None = None


def check_gammasquare(X, Y, check=True) -> SquareReport:
    """Both boundary halves of every square move every imitator position alike."""
    im = Imitator(X, Y, check=check)
    if X.max_dim < 2:
        return SquareReport(True)
    for sid in range(X.count(2)):
        key = (2, sid)
        for q in range(4):
            a = [X.corner_end(key, q, 0), X.corner_end(key, q ^ 1, 1)]
            b = [X.corner_end(key, q, 1), X.corner_end(key, q ^ 2, 0)]
            for y in im.vertices:
                ya = im.step(a[1], im.step(a[0], y))
                yb = im.step(b[1], im.step(b[0], y))
                if ya != yb:
                    return SquareReport(False, (key, q, y))
    return SquareReport(True)


def check_reversibility(X, Y, check=True):
    """Every (state, end): going out and straight back restores the imitator."""
    im = Imitator(X, Y, check=check)
    bad = []
    for y in im.vertices:
        for x in range(X.n_vertices):
            for end in X.ends_at[x]:
                if im.step(X.reverse(end), im.step(end, y)) != y:
                    bad.append((x, y, end))
    return bad


@dataclass
class ImitatorCover:
    cover: CoveringMap
    basepoint: int
    Y: frozenset
    y: int
    semantics: str = "based loops at the basepoint = walker loops at y whose imitator returns to y"


def imitator_cover(X, Y, y, check=True) -> ImitatorCover:
    im = Imitator(X, Y, check=check)
    if y not in im.table:
        raise ValueError(f"{y} is not a vertex of Y")
    sq = check_gammasquare(X, Y, check=False)
    if not sq.ok:
        raise PreconditionError(f"square relation fails: {sq.witness}")
    lifted = lift_complex(X, im.step, [(y, y)])
    cov = CoveringMap(X, lifted, name=f"imitator(y={y})")
    bad = verify_cover(cov)
    if bad:
        raise PreconditionError(f"imitator cover failed verification: {bad[:3]}")
    return ImitatorCover(cov, cov.lift_vertex(y, y), im.cells, y)


# -- entrapment sampling -----------------------------------------------------------
@dataclass
class EntrapmentReport:
    trials: int
    violations: list
    suspended: int


def entrapment_check(X, Y, Z, trials=200, length=12, seed=0) -> EntrapmentReport:
    """Sample walks inside Z and test both trapping clauses for the imitator."""
    from .complex_core import inter_osculating_hyperplanes

    zc = _cells(Z)
    if not is_locally_convex(X, zc):
        raise PreconditionError("Z is not locally convex")
    bad = inter_osculating_hyperplanes(X, SubcomplexRef(zc))
    if bad:
        raise PreconditionError(f"hyperplanes inter-osculate with Z: {bad}")
    im = Imitator(X, Y)
    zv = sorted(k[1] for k in zc if k[0] == 0)
    yz = [y for y in im.vertices if (0, y) in zc]
    yout = [y for y in im.vertices if (0, y) not in zc]
    rng = random.Random(seed)
    violations = []
    suspended = 0
    for t in range(trials):
        clause = 1 if (t % 2 == 0 and yz) or not yout else 2
        if clause == 1:
            if not yz:
                continue
            x = y = rng.choice(yz)
        else:
            x = rng.choice(zv)
            y = rng.choice(yout)
        for _ in range(length):
            ends = X.ends_at[x]
            end = rng.choice(ends)
            if (1, end[0]) not in zc:
                suspended += 1
                break
            x = X.head(end)
            y = im.step(end, y)
            inside = (0, y) in zc
            if clause == 1 and not inside:
                violations.append((t, "left Y&Z", x, y))
                break
            if clause == 2 and inside:
                violations.append((t, "entered Z", x, y))
                break
    return EntrapmentReport(trials, violations, suspended)
