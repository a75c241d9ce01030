"""Single-source shortest paths in weighted unit-disk graphs over a grid of
side-1/2 cells.

Points are processed cell by cell in increasing order of tentative distance.
When the active point ``c`` with the smallest distance is picked, every cell of
the 5x5 patch around ``c``'s cell first pushes distances into ``c``'s cell and
then ``c``'s cell pushes distances back out; afterwards ``c``'s cell leaves the
active set.  A single push between two distinct cells sorts the senders by
distance, finds for each receiver the first sender within unit distance, and
answers all receivers with one insertion-only nearest-neighbour structure.
"""
from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import instrument
from .awnn import DynamicNN
from .errors import NotSeparated, UnknownSource
from .geom_core import WeightedSite
from .vdplus import build_locator, build_vdplus

INF = math.inf
SMALL_PARTITION = 16
SMALL_CELL = 24


def cell_of(x: float, y: float):
    return (math.floor(2.0 * x), math.floor(2.0 * y))


def patch(cell):
    """The 5x5 block of cells around ``cell`` in row-major order."""
    i, j = cell
    return [(i + di, j + dj) for dj in range(-2, 3) for di in range(-2, 3)]


@dataclass
class GridIndex:
    points: list
    cells: dict = field(default_factory=dict)
    cell_of: list = field(default_factory=list)


def build_grid(V) -> GridIndex:
    g = GridIndex(list(V))
    cells = defaultdict(list)
    for k, (x, y) in enumerate(g.points):
        c = cell_of(x, y)
        g.cell_of.append(c)
        cells[c].append(k)
    g.cells = dict(cells)
    return g


@dataclass
class DistTable:
    dist: list
    pred: list

    def path(self, v):
        out = []
        while v is not None:
            out.append(v)
            v = self.pred[v]
        return out[::-1]


class Isometry(NamedTuple):
    """Rotate by ``rot`` quarter turns (counter-clockwise), then shift by (-ox, -oy)."""

    rot: int
    ox: float
    oy: float

    def apply(self, p):
        x, y = p
        r = self.rot & 3
        if r == 1:
            x, y = -y, x
        elif r == 2:
            x, y = -x, -y
        elif r == 3:
            x, y = y, -x
        return (x - self.ox, y - self.oy)


def _rotated(p, rot):
    return Isometry(rot, 0.0, 0.0).apply(p)


def separating_isometry(src_cell, dst_cell, pts, dst_ids) -> Isometry:
    """Isometry putting the source cell strictly below y = 0 and the destination on or above it."""
    (si, sj), (di, dj) = src_cell, dst_cell
    if sj != dj:
        if dj > sj:
            rot, line = 0, (sj + 1) / 2.0
        else:
            rot = 2
            line = min(_rotated(pts[b], 2)[1] for b in dst_ids)
    elif di != si:
        if di > si:
            rot, line = 1, (si + 1) / 2.0
        else:
            rot = 3
            line = min(_rotated(pts[b], 3)[1] for b in dst_ids)
    else:
        raise NotSeparated(f"cells {src_cell} and {dst_cell} coincide")
    cx = _rotated(((si + 0.5) / 2.0, (sj + 0.5) / 2.0), rot)[0]
    return Isometry(rot, cx, line)


def _check_separated(iso, pts, A, B):
    for a in A:
        if not iso.apply(pts[a])[1] < 0:
            raise NotSeparated(f"source point {a} not below the separator")
    for b in B:
        if iso.apply(pts[b])[1] < 0:
            raise NotSeparated(f"destination point {b} below the separator")


def first_neighbor_partition(A, B, pts, iso: Isometry | None = None, small: int = SMALL_PARTITION):
    """Map i -> [b ...] where A[i] is the first point of the ordered list A within distance 1 of b.

    Divide and conquer over prefixes of A: a zero-weight diagram of the first
    half decides, by nearest-neighbour distance, which receivers have a
    neighbour there.  Receivers without any neighbour in A are dropped.
    """
    out = defaultdict(list)
    if not A or not B:
        return out
    if iso is None:
        iso = Isometry(0, 0.0, 0.0)
    tp = {}
    for k in list(A) + list(B):
        if k not in tp:
            tp[k] = iso.apply(pts[k])

    def direct(lo, hi, Bs):
        for b in Bs:
            bx, by = pts[b]
            for i in range(lo, hi):
                ax, ay = pts[A[i]]
                if math.hypot(ax - bx, ay - by) <= 1.0:
                    out[i].append(b)
                    break

    def rec(lo, hi, Bs):
        if not Bs:
            return
        if hi - lo <= small or len(Bs) * (hi - lo) <= small * small:
            direct(lo, hi, Bs)
            return
        mid = (lo + hi) >> 1
        sites = [WeightedSite(A[i], tp[A[i]][0], tp[A[i]][1], 0.0) for i in range(lo, mid)]
        loc = build_locator(build_vdplus(sites))
        left, right = [], []
        for b in Bs:
            a, _ = loc.locate(tp[b])
            ax, ay = pts[a]
            bx, by = pts[b]
            (left if math.hypot(ax - bx, ay - by) <= 1.0 else right).append(b)
        rec(lo, mid, left)
        rec(mid, hi, right)

    rec(0, len(A), list(B))
    return out


def update_pair(A, B, iso: Isometry, table: DistTable, pts, snap=None) -> None:
    """Relax every b in B through its best unit-distance neighbour in A (snapshot distances)."""
    dist, pred = table.dist, table.pred
    if snap is None:
        snap = {a: dist[a] for a in A}
    _check_separated(iso, pts, A, B)
    order = sorted((snap[a], a) for a in A if snap[a] < INF)
    if not order or not B:
        return
    A_sorted = [a for _, a in order]
    parts = first_neighbor_partition(A_sorted, B, pts, iso)
    if not parts:
        return
    instrument.add("update_pairs", 1)
    nn = DynamicNN()
    lowest = min(parts)
    for i in range(len(A_sorted) - 1, lowest - 1, -1):
        a = A_sorted[i]
        ax, ay = iso.apply(pts[a])
        nn.insert(WeightedSite(a, ax, ay, snap[a]))
        for b in parts.get(i, ()):
            p, _ = nn.query(iso.apply(pts[b]))
            (px, py), (bx, by) = pts[p], pts[b]
            cand = snap[p] + math.hypot(px - bx, py - by)
            if cand < dist[b]:
                dist[b] = cand
                pred[b] = p


def same_cell_update(C, table: DistTable, pts, snap=None, small: int = SMALL_CELL) -> None:
    """Relax every pair inside one cell (all pairs are unit-disk edges there)."""
    dist, pred = table.dist, table.pred
    if snap is None:
        snap = {a: dist[a] for a in C}

    def relax(b, a):
        cand = snap[a] + math.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1])
        if cand < dist[b]:
            dist[b] = cand
            pred[b] = a

    def direct(ids):
        src = [a for a in ids if snap[a] < INF]
        for b in ids:
            for a in src:
                if a != b:
                    relax(b, a)

    def one_way(lower, upper, rot, line):
        src = [a for a in lower if snap[a] < INF]
        if not src:
            return
        iso = Isometry(rot, _rotated(pts[src[0]], rot)[0], line)
        sites = []
        for a in src:
            x, y = iso.apply(pts[a])
            sites.append(WeightedSite(a, x, y, snap[a]))
        loc = build_locator(build_vdplus(sites))
        for b in upper:
            a, _ = loc.locate(iso.apply(pts[b]))
            relax(b, a)

    def split(ids, axis):
        # strict split along axis (0: y, 1: x) near the median, or None
        key = (lambda k: (pts[k][1], k)) if axis == 0 else (lambda k: (pts[k][0], k))
        ids = sorted(ids, key=key)
        coord = (lambda k: pts[k][1]) if axis == 0 else (lambda k: pts[k][0])
        m = len(ids) // 2
        lo = m
        while lo > 0 and coord(ids[lo - 1]) == coord(ids[lo]):
            lo -= 1
        hi = m
        while hi < len(ids) and coord(ids[hi - 1]) == coord(ids[hi]):
            hi += 1
        cut = lo if lo > 0 and (m - lo) <= (hi - m) else hi
        if cut <= 0 or cut >= len(ids):
            return None
        return ids[:cut], ids[cut:], coord(ids[cut - 1]), coord(ids[cut])

    def rec(ids):
        if len(ids) <= 1:
            return
        if len(ids) <= small:
            direct(ids)
            return
        for axis in (0, 1):
            sp = split(ids, axis)
            if sp is not None:
                break
        else:
            direct(ids)  # all points coincide
            return
        # upward the separator passes through the lowest upper point, downward
        # through the highest lower one, so sites always sit strictly below it
        lower, upper, top_low, bottom_up = sp
        if axis == 0:
            one_way(lower, upper, 0, bottom_up)
            one_way(upper, lower, 2, -top_low)
        else:
            one_way(lower, upper, 1, bottom_up)
            one_way(upper, lower, 3, -top_low)
        rec(lower)
        rec(upper)

    rec(list(C))


def _update(src_cell, dst_cell, active_cells, table, pts):
    A = active_cells.get(src_cell)
    B = active_cells.get(dst_cell)
    if not A or not B:
        return
    snap = {a: table.dist[a] for a in A}
    if all(d == INF for d in snap.values()):
        return
    if src_cell == dst_cell:
        same_cell_update(A, table, pts, snap)
        return
    iso = separating_isometry(src_cell, dst_cell, pts, B)
    update_pair(A, B, iso, table, pts, snap)


def sssp_grid(V, s: int, trace=None) -> DistTable:
    """Shortest-path distances from point ``s`` in the weighted unit-disk graph on V."""
    pts = [(float(x), float(y)) for x, y in V]
    n = len(pts)
    if not 0 <= s < n:
        raise UnknownSource(f"source {s} not in 0..{n - 1}")
    grid = build_grid(pts)
    active = {c: list(ids) for c, ids in grid.cells.items()}
    table = DistTable([INF] * n, [None] * n)
    table.dist[s] = 0.0
    heap = [(0.0, s)]
    removed = [False] * n
    while heap:
        d, c = heapq.heappop(heap)
        instrument.add("heap_ops", 1)
        if removed[c] or d != table.dist[c]:
            continue
        cc = grid.cell_of[c]
        if trace is not None:
            trace.append((c, d, sum(len(active.get(q, ())) for q in patch(cc))))
        cells = [q for q in patch(cc) if q in active]
        for q in cells:
            _update(q, cc, active, table, pts)
        for q in cells:
            _update(cc, q, active, table, pts)
        for q in cells:
            for b in active[q]:
                if table.dist[b] < INF:
                    heapq.heappush(heap, (table.dist[b], b))
                    instrument.add("heap_ops", 1)
        for b in active.pop(cc):
            removed[b] = True
    return table


# name used by the published interface
sssp_wangxue = sssp_grid


# --------------------------------------------------------------------------- oracle


def _edge_arrays(pts):
    """Endpoints and lengths of all pairs at distance <= 1, one numpy block per cell pair."""
    grid = build_grid(pts)
    P = np.asarray(pts, dtype=float).reshape(-1, 2)
    members = {c: np.asarray(ids) for c, ids in grid.cells.items()}
    us, vs, ws = [], [], []
    for c, ia in members.items():
        for q in patch(c):
            ib = members.get(q)
            if ib is None or q < c:
                continue
            d = np.hypot(P[ia, 0][:, None] - P[ib, 0][None, :], P[ia, 1][:, None] - P[ib, 1][None, :])
            mask = d <= 1.0
            if q == c:
                mask &= ia[:, None] < ib[None, :]
            r, k = np.nonzero(mask)
            us.append(ia[r])
            vs.append(ib[k])
            ws.append(d[r, k])
    if not us:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    w = np.concatenate(ws)
    swap = u > v
    u, v = np.where(swap, v, u), np.where(swap, u, v)
    return u, v, w


def build_udg_edges(V):
    """All pairs (u < v) at distance <= 1, found by scanning each cell's 5x5 patch."""
    pts = [(float(x), float(y)) for x, y in V]
    u, v, w = _edge_arrays(pts)
    order = np.lexsort((v, u))
    return [(int(a), int(b), float(c)) for a, b, c in zip(u[order], v[order], w[order])]


def dijkstra_baseline(V, s: int) -> DistTable:
    """Textbook Dijkstra on the explicit edge list (neighbours relaxed as numpy slices)."""
    pts = [(float(x), float(y)) for x, y in V]
    n = len(pts)
    if not 0 <= s < n:
        raise UnknownSource(f"source {s} not in 0..{n - 1}")
    u, v, w = _edge_arrays(pts)
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    wt = np.concatenate([w, w])
    order = np.argsort(src, kind="stable")
    dst, wt = dst[order], wt[order]
    start = np.searchsorted(src[order], np.arange(n + 1))
    dist = np.full(n, INF)
    pred = [None] * n
    dist[s] = 0.0
    done = np.zeros(n, dtype=bool)
    heap = [(0.0, s)]
    while heap:
        d, x = heapq.heappop(heap)
        if done[x] or d != dist[x]:
            continue
        done[x] = True
        lo, hi = start[x], start[x + 1]
        nb = dst[lo:hi]
        nd = d + wt[lo:hi]
        better = nd < dist[nb]
        if better.any():
            nb, nd = nb[better], nd[better]
            dist[nb] = nd
            for y, dy in zip(nb.tolist(), nd.tolist()):
                pred[y] = x
                heapq.heappush(heap, (dy, y))
    return DistTable(dist.tolist(), pred)
