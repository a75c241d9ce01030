"""Additively weighted Voronoi diagram restricted to the half-plane y >= 0.

All sites lie strictly below the x-axis.  Every face of the restricted diagram is
star-shaped from its site and meets the x-axis in exactly one interval (its
l-edge), so a face is stored as that interval plus the chain of boundary vertices
running from the left end of the interval, over the top, to its right end.  The
chain is ordered by decreasing polar angle around the face's site; edge ``k`` of
the chain joins ``verts[k]`` and ``verts[k + 1]`` and is either a bisector arc
with the neighbouring site ``nbrs[k]`` or, when ``nbrs[k] is None``, a stretch of
the boundary at infinity.  Vertices are shared objects: the same ``Vertex``
instance appears in every face incident to it.
"""
from __future__ import annotations

import bisect
import math
from collections import defaultdict

import numpy as np

from . import instrument
from .errors import (
    CoincidentSites,
    EmptyInput,
    QueryBelowLine,
    RETRYABLE,
    SiteAboveLine,
    ParseError,
)
from .geom_core import WeightedSite, classify_bisector, weighted_distance

TIE_TOL = 1e-12


class Vertex:
    """A diagram vertex; for ``inf`` vertices ``(x, y)`` is a unit direction."""

    __slots__ = ("x", "y", "inf")

    def __init__(self, x, y, inf=False):
        self.x = x
        self.y = y + 0.0
        self.inf = inf

    def __repr__(self):
        tag = "inf" if self.inf else "pt"
        return f"Vertex({tag}, {self.x:.6g}, {self.y:.6g})"


def vertex_angle(s, v) -> float:
    if v.inf:
        return math.atan2(v.y, v.x)
    return math.atan2(v.y - s.y, v.x - s.x)


class Face:
    __slots__ = ("site", "xl", "xr", "verts", "nbrs", "angs")

    def __init__(self, site, xl, xr, verts, nbrs, angs=None):
        self.site = site
        self.xl = xl
        self.xr = xr
        self.verts = verts
        self.nbrs = nbrs
        if angs is None:
            angs = [vertex_angle(site, v) for v in verts]
        self.angs = angs

    def sector_of(self, theta: float) -> int:
        """Index k of the chain edge whose angular range [angs[k+1], angs[k]] holds theta."""
        angs = self.angs
        lo, hi = 0, len(angs) - 2
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if angs[mid] >= theta:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def contains(self, q, tol=1e-12) -> bool:
        """Membership test using star-shapedness (q must satisfy q.y >= 0)."""
        s = self.site
        th = math.atan2(q[1] - s.y, q[0] - s.x)
        if th > self.angs[0] + tol or th < self.angs[-1] - tol:
            return False
        nb = self.nbrs[self.sector_of(th)]
        if nb is None:
            return True
        ds = weighted_distance(s, q)
        return ds <= weighted_distance(nb, q) + tol * (1.0 + abs(ds))

    def __repr__(self):
        return f"Face(site={self.site.id}, [{self.xl:.6g}, {self.xr:.6g}], {len(self.nbrs)} edges)"


class HalfPlaneVD:
    """Immutable half-plane diagram; ``faces`` are ordered left to right along y = 0."""

    reference_line = 0.0

    def __init__(self, sites, faces):
        self.sites = tuple(sites)
        self.faces = faces
        self._site_faces = None
        self._spoked = None

    @classmethod
    def empty(cls):
        return cls((), [])

    def __len__(self):
        return len(self.faces)

    @property
    def l_edge_seq(self):
        return [(f.xl, f.xr, f.site.id) for f in self.faces]

    @property
    def site_faces(self):
        if self._site_faces is None:
            m = defaultdict(list)
            for i, f in enumerate(self.faces):
                m[f.site.id].append(i)
            self._site_faces = m
        return self._site_faces

    def vertices(self):
        seen = {}
        for f in self.faces:
            for v in f.verts:
                seen.setdefault(id(v), v)
        return list(seen.values())

    def arcs(self):
        """Each bisector arc once, as (face_index, edge_index)."""
        out = []
        for i, f in enumerate(self.faces):
            sid = f.site.id
            for k, nb in enumerate(f.nbrs):
                if nb is not None and sid < nb.id:
                    out.append((i, k))
        return out

    def counts(self):
        """(finite vertices, arcs, l-edges, faces)."""
        fin = sum(1 for v in self.vertices() if not v.inf)
        return fin, len(self.arcs()), len(self.faces), len(self.faces)

    def euler_characteristic(self) -> int:
        """V - E + F with every vertex at infinity collapsed to a single point."""
        fin, arcs, ledges, faces = self.counts()
        has_inf = any(v.inf for v in self.vertices())
        return (fin + (1 if has_inf else 0)) - (arcs + ledges) + faces

    def owner_on_line(self, x: float):
        """Owner site of the l-edge containing (x, 0); boundary ties go to the min id."""
        faces = self.faces
        bounds = [f.xr for f in faces[:-1]]
        i = bisect.bisect_left(bounds, x)
        s = faces[i].site
        for j in (i - 1, i + 1):
            if 0 <= j < len(faces):
                t = faces[j].site
                ds = weighted_distance(s, (x, 0.0))
                dt = weighted_distance(t, (x, 0.0))
                if dt < ds - TIE_TOL * (1 + abs(ds)) or (abs(dt - ds) <= TIE_TOL * (1 + abs(ds)) and t.id < s.id):
                    s = t
        return s


def singleton_vd(s: WeightedSite) -> HalfPlaneVD:
    if not s.y < 0:
        raise SiteAboveLine(f"site {s.id} has y = {s.y} >= 0")
    face = Face(s, -math.inf, math.inf,
                [Vertex(-1.0, 0.0, True), Vertex(1.0, 0.0, True)], [None], [math.pi, 0.0])
    return HalfPlaneVD((s,), [face])


# --------------------------------------------------------------------------- spokes


class SpokedVD:
    """Spoke subdivision view: sub-region k of a face is the angular sector of chain edge k.

    A sector is bounded by at most four pieces: a stretch of y = 0, the clipped
    spoke to ``verts[k]``, the chain edge ``k`` and the clipped spoke to
    ``verts[k + 1]``.  Spokes to vertices lying on y = 0 vanish after clipping.
    """

    def __init__(self, vd: HalfPlaneVD):
        self.base = vd
        self.site_faces = vd.site_faces

    @property
    def faces(self):
        return self.base.faces

    def spoke(self, fi: int, j: int):
        """Clipped spoke of face fi to its j-th chain vertex: (start, end, is_ray) or None."""
        f = self.base.faces[fi]
        s = f.site
        v = f.verts[j]
        if v.inf:
            dx, dy = v.x, v.y
        else:
            if v.y <= 0.0:
                return None
            dx, dy = v.x - s.x, v.y - s.y
        if dy <= 0.0:
            return None
        lam = -s.y / dy
        start = (s.x + lam * dx, 0.0)
        if v.inf:
            return start, (dx, dy), True
        return start, (v.x, v.y), False

    def spokes(self):
        out = {}
        for fi, f in enumerate(self.base.faces):
            for j in range(1, len(f.verts) - 1):
                sp = self.spoke(fi, j)
                if sp is not None:
                    out[(fi, j)] = sp
        return out

    def subregion_count(self) -> int:
        return sum(len(f.nbrs) for f in self.base.faces)

    def subregion_boundary(self, fi: int, k: int):
        """Boundary pieces of sub-region (fi, k): list of tags."""
        f = self.base.faces[fi]
        pieces = ["line"]
        if self.spoke(fi, k) is not None:
            pieces.append(("spoke", k))
        nb = f.nbrs[k]
        pieces.append(("arc", nb.id) if nb is not None else ("infinity",))
        if self.spoke(fi, k + 1) is not None:
            pieces.append(("spoke", k + 1))
        return pieces

    def adjacent(self, fi: int, k: int):
        """Neighbouring sub-regions across spokes and across the chain edge."""
        f = self.base.faces[fi]
        out = []
        if k > 0 and self.spoke(fi, k) is not None:
            out.append((fi, k - 1))
        if k < len(f.nbrs) - 1 and self.spoke(fi, k + 1) is not None:
            out.append((fi, k + 1))
        tw = self.twin(fi, k)
        if tw is not None:
            out.append(tw)
        return out

    def face_at_angle(self, site, theta: float, tol=1e-9):
        for fi in self.site_faces.get(site.id, ()):
            f = self.base.faces[fi]
            if f.angs[-1] - tol <= theta <= f.angs[0] + tol:
                return fi
        return None

    def twin(self, fi: int, k: int):
        f = self.base.faces[fi]
        nb = f.nbrs[k]
        if nb is None:
            return None
        a, b = f.verts[k], f.verts[k + 1]
        if a.inf and b.inf:
            return None
        p = b if a.inf else a
        q = a if b.inf else b
        if p is q:
            px, py = p.x, p.y
        else:
            px, py = 0.5 * (p.x + q.x), 0.5 * (p.y + q.y)
        gi = self.face_at_angle(nb, math.atan2(py - nb.y, px - nb.x))
        if gi is None:
            return None
        g = self.base.faces[gi]
        for kk in range(len(g.nbrs)):
            if g.verts[kk] is b and g.verts[kk + 1] is a:
                return gi, kk
        return None


def add_spokes(vd: HalfPlaneVD) -> SpokedVD:
    if vd._spoked is None:
        vd._spoked = SpokedVD(vd)
    return vd._spoked


# --------------------------------------------------------------------------- locator


def _piece_y(pc, x):
    cx, cy, ux, uy, h, b, flag = pc[0], pc[1], pc[2], pc[3], pc[4], pc[5], pc[6]
    # vertical line x: h*ux*cosh t + b*(-uy)*sinh t = x - cx
    alpha = h * ux
    beta = -b * uy
    gamma = x - cx
    P = alpha + beta
    Q = alpha - beta
    disc = gamma * gamma - P * Q
    if disc < 0.0:
        disc = 0.0
    sq = math.sqrt(disc)
    if P == 0.0:
        z1 = z2 = Q / (2.0 * gamma) if gamma != 0.0 else 1.0
    else:
        qq = gamma + math.copysign(sq, gamma)
        if qq == 0.0:
            z1 = z2 = 1.0
        else:
            z1 = qq / P
            z2 = Q / qq
    if z1 > z2:
        z1, z2 = z2, z1
    if z1 <= 0.0:
        z = z2
    else:
        z = z2 if flag else z1
    if z <= 0.0:
        z = 1e-300
    ch = 0.5 * (z + 1.0 / z)
    sh = 0.5 * (z - 1.0 / z)
    return cy + h * ch * uy + b * sh * ux


def _piece_y_np(params, x):
    cx, cy, ux, uy, h, b, flag = (params[:, i] for i in range(7))
    alpha = h * ux
    beta = -b * uy
    gamma = x - cx
    P = alpha + beta
    Q = alpha - beta
    disc = np.maximum(gamma * gamma - P * Q, 0.0)
    sq = np.sqrt(disc)
    qq = gamma + np.copysign(sq, gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        z1 = np.where(P == 0.0, np.where(gamma != 0.0, Q / (2.0 * gamma), 1.0), qq / P)
        z2 = np.where(P == 0.0, z1, np.where(qq != 0.0, Q / qq, z1))
    lo = np.minimum(z1, z2)
    hi = np.maximum(z1, z2)
    z = np.where(lo <= 0.0, hi, np.where(flag > 0, hi, lo))
    z = np.where(z > 0.0, z, 1e-300)
    ch = 0.5 * (z + 1.0 / z)
    sh = 0.5 * (z - 1.0 / z)
    return cy + h * ch * uy + b * sh * ux


def _x_at(curve, t, sign_if_inf):
    if math.isinf(t):
        dx, _ = curve.arm_direction(1 if t > 0 else -1)
        if abs(dx) > 1e-12:
            return math.copysign(math.inf, dx)
        return curve.point(math.copysign(30.0, t))[0]
    return curve.point(t)[0]


class Locator:
    """Point location over the x-monotone pieces of the diagram's arcs.

    A segment tree over the sorted piece endpoints stores every piece in its
    O(log n) canonical nodes; inside a node all stored pieces span the node's
    slab without crossing, so they are kept sorted bottom to top.  A query walks
    one leaf-to-root path and binary-searches each node for the highest piece
    below the query point; the face above that piece answers the query, and when
    no piece lies below, the l-edge under the query does.
    """

    def __init__(self, vd: HalfPlaneVD):
        self.vd = vd
        self.bounds = [f.xr for f in vd.faces[:-1]]
        self.line_sites = [f.site for f in vd.faces]
        params, xl, xr, above, below = [], [], [], [], []
        for fi, k in vd.arcs():
            f = vd.faces[fi]
            self._add_arc(f, k, params, xl, xr, above, below)
        self.params = params
        self.above = above
        self.below = below
        self.n_pieces = len(params)
        instrument.add("locator_pieces", len(params))
        self._build_tree(np.array(params, dtype=float).reshape(-1, 7), xl, xr)

    @staticmethod
    def _add_arc(f, k, params, xl, xr, above, below):
        s, nb = f.site, f.nbrs[k]
        curve = classify_bisector(s, nb)
        ts = []
        for v in (f.verts[k], f.verts[k + 1]):
            if v.inf:
                ts.append(math.inf if (v.x * curve.nx + v.y * curve.ny) > 0 else -math.inf)
            else:
                ts.append(curve.param((v.x, v.y)))
        ta, tb = min(ts), max(ts)
        cuts = [ta]
        tstar = None
        hu = curve.h * curve.ux
        if hu != 0.0:
            ratio = -curve.b * curve.nx / hu
            if abs(ratio) < 1.0:
                tstar = math.atanh(ratio)
                if ta < tstar < tb:
                    cuts.append(tstar)
        cuts.append(tb)
        for p0, p1 in zip(cuts, cuts[1:]):
            x0 = _x_at(curve, p0, -1)
            x1 = _x_at(curve, p1, 1)
            lo, hi = min(x0, x1), max(x0, x1)
            if not hi > lo:
                continue  # vertical piece: never strictly below a query
            flag = 1 if (tstar is not None and p0 >= tstar - 1e-15) else 0
            if math.isinf(p0) and math.isinf(p1):
                tm = 0.0
            elif math.isinf(p0):
                tm = p1 - 1.0
            elif math.isinf(p1):
                tm = p0 + 1.0
            else:
                tm = 0.5 * (p0 + p1)
            px, py = curve.point(tm)
            lo_s, hi_s = curve.lo, curve.hi
            g = (py - lo_s.y) / math.hypot(px - lo_s.x, py - lo_s.y) - (py - hi_s.y) / math.hypot(
                px - hi_s.x, py - hi_s.y
            )
            up, down = (lo_s, hi_s) if g < 0 else (hi_s, lo_s)
            params.append((curve.cx, curve.cy, curve.ux, curve.uy, curve.h, curve.b, flag))
            xl.append(lo)
            xr.append(hi)
            above.append(up)
            below.append(down)

    def _build_tree(self, params, xl, xr):
        xl = np.asarray(xl, dtype=float)
        xr = np.asarray(xr, dtype=float)
        fin = np.concatenate([xl[np.isfinite(xl)], xr[np.isfinite(xr)]])
        X = np.unique(fin)
        m = len(X)
        N = 1
        while N < m + 1:
            N <<= 1
        self.X = X.tolist()
        self.N = N
        self.depth = N.bit_length()
        P = len(xl)
        if P == 0:
            self.start = self.end = None
            self.order = []
            return
        L = np.where(np.isfinite(xl), np.searchsorted(X, xl) + 1, 0)
        R = np.where(np.isfinite(xr), np.searchsorted(X, xr), m)
        l = L + N
        r = R + 1 + N
        idx = np.arange(P)
        pp, nn = [], []
        active = l < r
        while active.any():
            m1 = active & ((l & 1) == 1)
            pp.append(idx[m1])
            nn.append(l[m1])
            l = l + m1
            m2 = active & ((r & 1) == 1)
            r = r - m2
            pp.append(idx[m2])
            nn.append(r[m2])
            l >>= 1
            r >>= 1
            active = l < r
        pieces = np.concatenate(pp)
        nodes = np.concatenate(nn)
        level = np.floor(np.log2(nodes)).astype(np.int64)
        # guard against float log2 rounding
        level = np.where((1 << (level + 1)) <= nodes, level + 1, level)
        level = np.where((1 << level) > nodes, level - 1, level)
        span = N >> level
        first = (nodes - (1 << level)) * span
        last = first + span - 1
        Xp = np.concatenate([[-np.inf], X, [np.inf]])
        lo_x = Xp[first]
        hi_x = Xp[np.minimum(last, m) + 1]
        mid = np.where(
            np.isfinite(lo_x) & np.isfinite(hi_x),
            0.5 * (lo_x + hi_x),
            np.where(np.isfinite(hi_x), hi_x - 1.0, np.where(np.isfinite(lo_x), lo_x + 1.0, 0.0)),
        )
        keys = _piece_y_np(params[pieces], mid)
        order = np.lexsort((keys, nodes))
        nodes_s = nodes[order]
        self.order = pieces[order].tolist()
        uniq, first_idx, counts = np.unique(nodes_s, return_index=True, return_counts=True)
        start = np.zeros(2 * N, dtype=np.int64)
        end = np.zeros(2 * N, dtype=np.int64)
        start[uniq] = first_idx
        end[uniq] = first_idx + counts
        self.start = start.tolist()
        self.end = end.tolist()
        instrument.add("locator_entries", len(self.order))

    def below_piece(self, qx, qy):
        """Index of the highest piece below (qx, qy) and its height, or (-1, -inf)."""
        if self.start is None:
            return -1, -math.inf
        v = bisect.bisect_left(self.X, qx) + self.N
        start, end, order, params = self.start, self.end, self.order, self.params
        best, best_y = -1, -math.inf
        steps = 0
        while v >= 1:
            s, e = start[v], end[v]
            if e > s:
                lo, hi = s, e
                while lo < hi:
                    mid = (lo + hi) >> 1
                    steps += 1
                    if _piece_y(params[order[mid]], qx) <= qy:
                        lo = mid + 1
                    else:
                        hi = mid
                if lo > s:
                    pc = order[lo - 1]
                    y = _piece_y(params[pc], qx)
                    if y > best_y:
                        best, best_y = pc, y
            v >>= 1
        instrument.add("locate_steps", steps)
        return best, best_y

    def locate(self, q):
        qx, qy = q[0], q[1]
        if qy < 0:
            raise QueryBelowLine(f"query {q} lies below the reference line")
        instrument.add("locates", 1)
        if qy == 0.0 or self.start is None:
            s = self.vd.owner_on_line(qx) if qy == 0.0 else self._line_owner(qx)
            return s.id, weighted_distance(s, q)
        pc, y = self.below_piece(qx, qy)
        if pc < 0:
            s = self._line_owner(qx)
        else:
            s = self.above[pc]
            if qy - y <= 1e-9 * (1.0 + abs(qy)):
                t = self.below[pc]
                ds, dt = weighted_distance(s, q), weighted_distance(t, q)
                if dt < ds or (dt == ds and t.id < s.id):
                    s = t
        return s.id, weighted_distance(s, q)

    def _line_owner(self, x):
        return self.line_sites[bisect.bisect_left(self.bounds, x)]


def build_locator(vd) -> Locator:
    if isinstance(vd, SpokedVD):
        vd = vd.base
    return Locator(vd)


def locate(loc: Locator, q):
    return loc.locate(q)


def locate_flat(vd: HalfPlaneVD, q):
    """Reference point location by testing every face (linear time)."""
    if q[1] < 0:
        raise QueryBelowLine(f"query {q} lies below the reference line")
    if q[1] == 0.0:
        s = vd.owner_on_line(q[0])
        return s.id, weighted_distance(s, q)
    best = None
    for f in vd.faces:
        if f.contains(q):
            d = weighted_distance(f.site, q)
            if best is None or d < best[1] or (d == best[1] and f.site.id < best[0]):
                best = (f.site.id, d)
    if best is None:
        s = vd.owner_on_line(q[0])
        return s.id, weighted_distance(s, q)
    return best


def nearest_site_bruteforce(S, q):
    if not S:
        raise EmptyInput("no sites")
    best_id, best_d = None, math.inf
    for s in S:
        d = math.hypot(q[0] - s.x, q[1] - s.y) + s.w
        if d < best_d or (d == best_d and s.id < best_id):
            best_id, best_d = s.id, d
    return best_id, best_d


def nearest_bruteforce_np(xs, ys, ws, ids, qx, qy):
    """Vectorised linear scan returning (best id, best distance, second-best distance)."""
    d = np.hypot(xs - qx, ys - qy) + ws
    if len(d) == 1:
        return int(ids[0]), float(d[0]), math.inf
    two = np.argpartition(d, 1)[:2]
    best = d[two].min()
    second = d[two].max()
    cand = np.flatnonzero(d == best)
    return int(ids[cand].min()), float(best), float(second)


# --------------------------------------------------------------------------- construction


def _dedupe(S):
    best = {}
    for s in S:
        key = (s.x, s.y)
        cur = best.get(key)
        if cur is None or (s.w, s.id) < (cur.w, cur.id):
            best[key] = s
    return list(best.values())


def build_vdplus(S, *, seed: int = 0, retries: int = 5) -> HalfPlaneVD:
    """Divide-and-conquer construction; merges are delegated to :mod:`vdmerge`."""
    from .vdmerge import merge_vdplus

    S = list(S)
    if not S:
        raise EmptyInput("cannot build a diagram of no sites")
    for s in S:
        if not s.y < 0:
            raise SiteAboveLine(f"site {s.id} has y = {s.y} >= 0")
    seen = set()
    for s in S:
        if s.id in seen:
            raise ValueError(f"duplicate site id {s.id}")
        seen.add(s.id)
    kept = _dedupe(S)
    # x-sorted halves keep every contour short; the merge itself is order-agnostic
    kept.sort(key=lambda s: (s.x, s.id))
    dropped = [s for s in S if s not in kept] if len(kept) < len(S) else []

    def rec(lo, hi, sites):
        if hi - lo == 1:
            return singleton_vd(sites[lo])
        mid = (lo + hi) >> 1
        return merge_vdplus(rec(lo, mid, sites), rec(mid, hi, sites))

    sites = kept
    for attempt in range(retries + 1):
        try:
            vd = rec(0, len(sites), sites)
            break
        except RETRYABLE + (CoincidentSites,):
            if attempt == retries:
                raise
            instrument.add("reperturb", 1)
            sites = perturb_sites(kept, 1e-7 * 10.0 ** attempt, seed + attempt)
    if dropped:
        vd = HalfPlaneVD(vd.sites + tuple(dropped), vd.faces)
    return vd


def perturb_sites(S, eps, seed):
    """Seeded relative perturbation of site coordinates (weights untouched)."""
    rng = np.random.default_rng(seed)
    jit = rng.uniform(-eps, eps, size=(len(S), 2))
    out = []
    for s, (jx, jy) in zip(S, jit):
        y = s.y + jy * (1.0 + abs(s.y))
        if not y < 0:
            y = s.y
        out.append(WeightedSite(s.id, s.x + jx * (1.0 + abs(s.x)), y, s.w))
    return out


# --------------------------------------------------------------------------- text form

HEADER = "VDPLUS 1"


def dumps(vd: HalfPlaneVD, meta: dict | None = None) -> str:
    """Text serialization: S/V/F records (see README for the grammar)."""
    lines = [HEADER]
    for k, v in (meta or {}).items():
        lines.append(f"# {k}={v}")
    for s in vd.sites:
        lines.append(f"S {s.id} {s.x!r} {s.y!r} {s.w!r}")
    vid = {}
    for f in vd.faces:
        for v in f.verts:
            if id(v) not in vid:
                vid[id(v)] = len(vid)
                tag = "I" if v.inf else "P"
                lines.append(f"V {vid[id(v)]} {tag} {v.x!r} {v.y!r}")
    for f in vd.faces:
        parts = [f"F {f.site.id} {f.xl!r} {f.xr!r} {vid[id(f.verts[0])]}"]
        for nb, v in zip(f.nbrs, f.verts[1:]):
            parts.append("*" if nb is None else f"a{nb.id}")
            parts.append(str(vid[id(v)]))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def loads(text: str) -> HalfPlaneVD:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError("missing VDPLUS header", 1)
    sites, verts, faces = {}, {}, []
    order = []
    for ln, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        try:
            if tok[0] == "S":
                s = WeightedSite(int(tok[1]), float(tok[2]), float(tok[3]), float(tok[4]))
                sites[s.id] = s
                order.append(s)
            elif tok[0] == "V":
                verts[int(tok[1])] = Vertex(float(tok[3]), float(tok[4]), tok[2] == "I")
            elif tok[0] == "F":
                site = sites[int(tok[1])]
                xl, xr = float(tok[2]), float(tok[3])
                vs = [verts[int(tok[4])]]
                nbrs = []
                rest = tok[5:]
                for e, v in zip(rest[0::2], rest[1::2]):
                    nbrs.append(None if e == "*" else sites[int(e[1:])])
                    vs.append(verts[int(v)])
                faces.append(Face(site, xl, xr, vs, nbrs))
            else:
                raise ParseError(f"unknown record {tok[0]!r}", ln)
        except (IndexError, KeyError, ValueError) as exc:
            raise ParseError(f"malformed record: {exc}", ln) from None
    return HalfPlaneVD(order, faces)
