"""Insertion-only additively weighted nearest neighbours, sites below y = 0 and
queries on or above it.

``DynamicNN`` keeps a static diagram of most of the sites plus a small buffer
that is itself a ``DynamicNN``; the buffer is folded into the static part by one
linear-time merge as soon as it outgrows |P| / log2|P|.  ``LogMethodNN`` is the
classic binary-counter baseline, ``OfflineTreeNN`` answers a whole operation
sequence from a complete binary tree over the inserts, and ``BruteNN`` scans.
"""
from __future__ import annotations

import math
from typing import NamedTuple

from . import instrument
from .errors import (
    EmptyStructure,
    ParseError,
    QueryBeforeAnyInsert,
    QueryBelowLine,
    SiteAboveLine,
)
from .geom_core import WeightedSite
from .vdmerge import merge_or_rebuild
from .vdplus import HalfPlaneVD, build_locator, build_vdplus

BASE = 8


def _better(a, b):
    """Pick the smaller (id, distance) answer; ties go to the smaller id."""
    if b is None:
        return a
    if a is None:
        return b
    if a[1] < b[1] or (a[1] == b[1] and a[0] < b[0]):
        return a
    return b


def _check_query(q):
    if q[1] < 0:
        raise QueryBelowLine(f"query {q} lies below the reference line")


def _check_site(s):
    if not s.y < 0:
        raise SiteAboveLine(f"site {s.id} has y = {s.y} >= 0")


def _scan(items, q):
    best = None
    for s in items:
        d = math.hypot(q[0] - s.x, q[1] - s.y) + s.w
        if best is None or d < best[1] or (d == best[1] and s.id < best[0]):
            best = (s.id, d)
    return best


class _Static:
    """A diagram with its locator; distances are re-evaluated on the original sites."""

    __slots__ = ("vd", "loc", "orig")

    def __init__(self, vd: HalfPlaneVD, orig):
        self.vd = vd
        self.loc = build_locator(vd) if vd.faces else None
        self.orig = orig

    def query(self, q):
        if self.loc is None:
            return None
        sid, _ = self.loc.locate(q)
        s = self.orig[sid]
        return sid, math.hypot(q[0] - s.x, q[1] - s.y) + s.w


class DynamicNN:
    """Recursive structure D(P): a buffer D(P') plus a static diagram of P minus P'."""

    def __init__(self, _orig=None, _depth=0):
        self.orig = {} if _orig is None else _orig
        self.depth = _depth
        self.total = 0
        self.items = []  # flat mode while total <= BASE
        self.static = None
        self.buffer = None
        self.flushes = 0

    def __len__(self):
        return self.total

    @property
    def flat(self):
        return self.static is None

    def insert(self, s: WeightedSite) -> None:
        _check_site(s)
        if self.depth == 0:
            if s.id in self.orig:
                raise ValueError(f"duplicate site id {s.id}")
            self.orig[s.id] = s
        instrument.add("inserts", 1)
        self.total += 1
        if self.flat:
            if self.total <= BASE:
                self.items.append(s)
                return
            self.static = _Static(build_vdplus(self.items), self.orig)
            self.items = []
            self.buffer = DynamicNN(self.orig, self.depth + 1)
            self.buffer.insert(s)
            return
        self.buffer.insert(s)
        if self.buffer.total > self.total / math.log2(self.total):
            self._flush()

    def _flush(self):
        instrument.add("flushes", 1)
        self.flushes += 1
        merged = merge_or_rebuild(self.static.vd, self.buffer.flatten(), seed=self.total)
        self.static = _Static(merged, self.orig)
        self.buffer = DynamicNN(self.orig, self.depth + 1)

    def flatten(self) -> HalfPlaneVD:
        """Diagram of every site stored here (the buffer is flattened recursively)."""
        if self.flat:
            return build_vdplus(self.items) if self.items else HalfPlaneVD.empty()
        if self.buffer.total == 0:
            return self.static.vd
        return merge_or_rebuild(self.static.vd, self.buffer.flatten(), seed=self.total)

    def query(self, q):
        if self.total == 0:
            raise EmptyStructure("query on an empty structure")
        _check_query(q)
        instrument.add("queries", 1)
        return self._query(q)

    def _query(self, q):
        if self.flat:
            return _scan(self.items, q)
        best = self.static.query(q)
        if self.buffer.total:
            best = _better(best, self.buffer._query(q))
        return best

    def levels(self):
        """(|P|, |P'|) for every level, top first."""
        out = []
        d = self
        while d is not None:
            out.append((d.total, d.buffer.total if d.buffer is not None else 0))
            d = d.buffer
        return out

    def invariant_holds(self) -> bool:
        return all(p < 4 or pp <= p / math.log2(p) for p, pp in self.levels())

    def retained_sites(self) -> int:
        """Sites held by static diagrams and flat lists over all levels."""
        n = 0
        d = self
        while d is not None:
            n += len(d.items)
            if d.static is not None:
                n += len(d.static.vd.sites)
            d = d.buffer
        return n


class LogMethodNN:
    """Binary-counter buckets of sizes 2^k, each a static diagram rebuilt on carry."""

    def __init__(self):
        self.buckets = []  # per size class: (sites, _Static) or None
        self.orig = {}
        self.total = 0

    def __len__(self):
        return self.total

    def insert(self, s: WeightedSite) -> None:
        _check_site(s)
        if s.id in self.orig:
            raise ValueError(f"duplicate site id {s.id}")
        self.orig[s.id] = s
        instrument.add("inserts", 1)
        self.total += 1
        carry = [s]
        k = 0
        while k < len(self.buckets) and self.buckets[k] is not None:
            carry.extend(self.buckets[k][0])
            self.buckets[k] = None
            k += 1
        if k == len(self.buckets):
            self.buckets.append(None)
        instrument.add("rebuild_work", len(carry))
        self.buckets[k] = (carry, _Static(build_vdplus(carry, seed=self.total), self.orig))

    def bucket_sizes(self):
        return [len(b[0]) for b in self.buckets if b is not None]

    def query(self, q):
        if self.total == 0:
            raise EmptyStructure("query on an empty structure")
        _check_query(q)
        instrument.add("queries", 1)
        best = None
        for b in self.buckets:
            if b is not None:
                best = _better(best, b[1].query(q))
        return best


class BruteNN:
    def __init__(self):
        self.items = []

    def __len__(self):
        return len(self.items)

    def insert(self, s: WeightedSite) -> None:
        _check_site(s)
        self.items.append(s)

    def query(self, q):
        if not self.items:
            raise EmptyStructure("query on an empty structure")
        _check_query(q)
        return _scan(self.items, q)


class OfflineTreeNN:
    """Complete binary tree over the inserts; node v stores the diagram of its leaves.

    A query issued after ``i`` inserts is answered from the O(log n) canonical
    nodes covering the prefix [0, i).
    """

    def __init__(self, sites):
        self.sites = list(sites)
        for s in self.sites:
            _check_site(s)
        self.orig = {s.id: s for s in self.sites}
        self.nodes = {}
        if self.sites:
            self._build(0, len(self.sites))

    def _build(self, lo, hi):
        if hi - lo <= BASE:
            self.nodes[(lo, hi)] = self.sites[lo:hi]
            if hi - lo > 1:
                mid = (lo + hi) >> 1
                self._build(lo, mid)
                self._build(mid, hi)
            return build_vdplus(self.sites[lo:hi])
        mid = (lo + hi) >> 1
        left = self._build(lo, mid)
        right = self._build(mid, hi)
        vd = merge_or_rebuild(left, right, seed=lo)
        self.nodes[(lo, hi)] = _Static(vd, self.orig)
        return vd

    def canonical(self, i):
        """Node ranges whose union is the prefix [0, i)."""
        out = []
        lo, hi = 0, len(self.sites)
        while i > lo:
            if i >= hi:
                out.append((lo, hi))
                break
            mid = (lo + hi) >> 1
            if i >= mid:
                out.append((lo, mid))
                lo = mid
            else:
                hi = mid
        return out

    def query(self, i, q):
        if i <= 0:
            raise QueryBeforeAnyInsert("query precedes every insert")
        _check_query(q)
        best = None
        for key in self.canonical(i):
            node = self.nodes[key]
            if isinstance(node, list):
                best = _better(best, _scan(node, q))
            else:
                best = _better(best, node.query(q))
        return best

    def stored_sites(self) -> int:
        n = 0
        for node in self.nodes.values():
            n += len(node) if isinstance(node, list) else len(node.vd.sites)
        return n


def offline_solve(ops):
    """Answer every query w.r.t. the inserts preceding it."""
    sites = [arg for kind, arg in ops if kind == "I"]
    tree = OfflineTreeNN(sites)
    out = []
    i = 0
    for kind, arg in ops:
        if kind == "I":
            i += 1
        else:
            out.append(tree.query(i, arg))
    return out


def replay(solver, ops):
    """Feed an op sequence to an online solver; returns the query answers."""
    out = []
    for kind, arg in ops:
        if kind == "I":
            solver.insert(arg)
        else:
            if len(solver) == 0:
                raise QueryBeforeAnyInsert("query precedes every insert")
            out.append(solver.query(arg))
    return out


SOLVERS = {"dyn": DynamicNN, "log": LogMethodNN, "brute": BruteNN}


def solve(ops, solver: str):
    if solver == "offline":
        return offline_solve(ops)
    return replay(SOLVERS[solver](), ops)


# --------------------------------------------------------------------------- op files


class Op(NamedTuple):
    kind: str
    arg: object


def parse_ops(text: str):
    """``I x y w`` inserts (ids in insertion order) and ``Q x y`` queries."""
    ops = []
    nid = 0
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "I" and len(tok) == 4:
                x, y, w = (float(t) for t in tok[1:])
                vals = (x, y, w)
                ops.append(Op("I", WeightedSite(nid, x, y, w)))
                nid += 1
            elif tok[0] == "Q" and len(tok) == 3:
                vals = (float(tok[1]), float(tok[2]))
                ops.append(Op("Q", vals))
            else:
                raise ParseError(f"bad op record {line!r}", ln)
        except ValueError:
            raise ParseError(f"bad number in {line!r}", ln) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite coordinate", ln)
    return ops


def emit_ops(ops) -> str:
    lines = []
    for kind, arg in ops:
        if kind == "I":
            lines.append(f"I {arg.x!r} {arg.y!r} {arg.w!r}")
        else:
            lines.append(f"Q {arg[0]!r} {arg[1]!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def random_ops(rng, n_ops: int, *, query_frac: float = 0.5, xmax: float = 100.0):
    """Mixed sequence: sites in [0,xmax]x[-3,-0.01] with w in [-1,1], queries in [0,xmax]x[0,5]."""
    kinds = rng.random(n_ops) < query_frac
    kinds[0] = False
    pts = rng.random((n_ops, 3))
    ops = []
    nid = 0
    for is_q, (a, b, c) in zip(kinds, pts):
        if is_q:
            ops.append(Op("Q", (float(a * xmax), float(b * 5.0))))
        else:
            ops.append(Op("I", WeightedSite(nid, float(a * xmax), float(-0.01 - b * 2.99), float(2 * c - 1))))
            nid += 1
    return ops
