"""Linear-time merge of two half-plane diagrams.

The merged diagram differs from the inputs only along the contour, the set of
merged edges separating a site of one input from a site of the other.  Every
contour component meets the line y = 0, so the merge

1. sweeps both l-edge sequences together to find where the contour crosses
   y = 0 (the seeds) and which input wins each stretch of the line,
2. traces each component upward from its leftmost unconsumed seed, stepping
   through the angular sectors of the current face in both inputs (a sector is
   the sub-region cut out by the spokes to two consecutive chain vertices), and
3. rebuilds every surviving face by overlaying the contour edges that bound it
   on the part of its old chain that survives.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from collections import defaultdict

from . import instrument
from .errors import CoincidentSites, DegenerateTangency, TraceStall, RETRYABLE
from .geom_core import axis_crossings, classify_bisector, line_params, third_site_params
from .vdplus import Face, HalfPlaneVD, Vertex, add_spokes, vertex_angle, perturb_sites

ROOT_TOL = 1e-10
SAME_PT = 1e-10
ANG_TOL = 1e-10
REACROSS = 1e-6


@dataclass
class ContourSeed:
    x: float
    site_a: object
    site_b: object
    face_a: int
    face_b: int
    a_left: bool  # True when the a-site wins just left of the seed
    vertex: Vertex = None
    consumed: bool = False

    @property
    def point(self):
        return (self.x, 0.0)


@dataclass
class ContourEdge:
    site_a: object
    site_b: object
    v0: Vertex
    v1: Vertex


@dataclass
class ContourComponent:
    edges: list = field(default_factory=list)
    seeds: list = field(default_factory=list)

    @property
    def pairs(self):
        return [(e.site_a.id, e.site_b.id) for e in self.edges]


@dataclass
class MergeStats:
    seeds: int = 0
    components: int = 0
    steps: int = 0
    arc_crossings: int = 0
    spoke_crossings: int = 0
    max_spoke_crossings: int = 0
    spoke_hits: dict = field(default_factory=lambda: defaultdict(int))


# --------------------------------------------------------------------------- sweep


def _sweep(va: HalfPlaneVD, vb: HalfPlaneVD):
    """Walk both l-edge sequences; return merged line pieces and the seeds."""
    FA, FB = va.faces, vb.faces
    i = j = 0
    x0 = -math.inf
    raw = []  # (x0, x1, side, face index)
    bounds = []  # boundary before raw[k] for k >= 1: ("root", seed) or ("old", adv_a, adv_b)
    adv = None
    while True:
        fa, fb = FA[i], FB[j]
        x1 = min(fa.xr, fb.xr)
        sa, sb = fa.site, fb.site
        xs = axis_crossings(sa, sb)
        roots = []
        if xs:
            for x in xs:
                scale = ROOT_TOL * (1.0 + abs(x))
                if x0 - scale <= x <= x1 + scale:
                    if abs(x - x0) <= scale or abs(x - x1) <= scale:
                        raise DegenerateTangency(f"contour root at l-edge endpoint x={x}")
                    roots.append(x)
            roots.sort()
        cuts = [x0] + roots + [x1]
        for k in range(len(cuts) - 1):
            lo, hi = cuts[k], cuts[k + 1]
            if math.isinf(lo) and math.isinf(hi):
                xm = 0.0
            elif math.isinf(lo):
                xm = hi - 1.0 - abs(hi)
            elif math.isinf(hi):
                xm = lo + 1.0 + abs(lo)
            else:
                xm = 0.5 * (lo + hi)
            da = math.hypot(xm - sa.x, sa.y) + sa.w
            db = math.hypot(xm - sb.x, sb.y) + sb.w
            a_wins = da < db or (da == db and sa.id < sb.id)
            side = (0, i) if a_wins else (1, j)
            if raw:
                if k == 0:
                    bounds.append(("old",) + adv)
                else:
                    bounds.append(("root", lo, i, j))
            raw.append((lo, hi, side))
        if math.isinf(x1):
            break
        adv_a = fa.xr == x1
        adv_b = fb.xr == x1
        adv = (i if adv_a else None, j if adv_b else None)
        if adv_a:
            i += 1
        if adv_b:
            j += 1
        x0 = x1

    seeds = []
    pieces = []  # [xl, xr, side, face index, VL, VR]
    first = raw[0]
    fam = FA if first[2][0] == 0 else FB
    cur = [first[0], first[1], first[2][0], first[2][1], fam[first[2][1]].verts[0], None]
    for k in range(1, len(raw)):
        lo, hi, side = raw[k]
        bd = bounds[k - 1]
        prev_side = (cur[2], cur[3])
        if bd[0] == "root":
            if side[0] == prev_side[0]:
                raise DegenerateTangency("contour root without a winner change")
            x, ia, jb = bd[1], bd[2], bd[3]
            v = Vertex(x, 0.0)
            seeds.append(ContourSeed(x, FA[ia].site, FB[jb].site, ia, jb, prev_side[0] == 0, v))
            cur[5] = v
            pieces.append(cur)
            cur = [lo, hi, side[0], side[1], v, None]
            continue
        _, ai, bj = bd
        if side[0] != prev_side[0]:
            raise DegenerateTangency("winner changes at an old l-edge endpoint")
        if side == prev_side:
            cur[1] = hi
            continue
        # same input wins on both sides but its face changes: keep the old vertex
        old = ai if side[0] == 0 else bj
        fam = FA if side[0] == 0 else FB
        if old is None:
            raise DegenerateTangency("face change without an old boundary")
        v = fam[old].verts[-1]
        cur[5] = v
        pieces.append(cur)
        cur = [lo, hi, side[0], side[1], v, None]
    fam = FA if cur[2] == 0 else FB
    cur[5] = fam[cur[3]].verts[-1]
    pieces.append(cur)
    return pieces, seeds


def ell_intersections(va: HalfPlaneVD, vb: HalfPlaneVD):
    """Contour crossings of y = 0, sorted by x."""
    if not va.faces or not vb.faces:
        return []
    return _sweep(va, vb)[1]


# --------------------------------------------------------------------------- tracing


class _Side:
    __slots__ = ("spoked", "site", "fi", "face", "k", "tag")

    def __init__(self, spoked, fi, k, tag):
        self.spoked = spoked
        self.tag = tag
        self.set(fi, k)

    def set(self, fi, k):
        self.fi = fi
        self.face = self.spoked.faces[fi]
        self.site = self.face.site
        self.k = k


class _Tracer:
    def __init__(self, va, vb, seeds, stats, trace_log):
        self.sa = add_spokes(va)
        self.sb = add_spokes(vb)
        self.seeds = seeds
        self.seed_x = [s.x for s in seeds]
        self.stats = stats
        self.log = trace_log
        self.anchors = {}
        self.limit = 64 * (len(va.faces) + len(vb.faces) + len(seeds)) + sum(
            len(f.nbrs) for f in va.faces) * 8 + sum(len(f.nbrs) for f in vb.faces) * 8 + 64

    def _anchor(self, v, side):
        self.anchors[(id(v), side.site.id)] = (side.fi, side.k)

    def _curve(self, A, B):
        c = classify_bisector(A.site, B.site)
        if c.is_empty:
            raise TraceStall("contour bisector vanished")
        return c

    def _orient(self, curve, t, grad_site_new=None, grad_site_old=None):
        tx, ty = curve.tangent(t)
        if grad_site_new is None:
            if abs(ty) <= 1e-12 * math.hypot(tx, ty):
                raise DegenerateTangency("contour tangent to y = 0 at a seed")
            return 1 if ty > 0 else -1
        px, py = curve.point(t)
        n, s = grad_site_new, grad_site_old
        rn = math.hypot(px - n.x, py - n.y)
        rs = math.hypot(px - s.x, py - s.y)
        gx = (px - n.x) / rn - (px - s.x) / rs
        gy = (py - n.y) / rn - (py - s.y) / rs
        dot = tx * gx + ty * gy
        if abs(dot) <= 1e-12 * math.hypot(tx, ty) * (math.hypot(gx, gy) + 1e-300):
            raise TraceStall("ambiguous direction at a merge vertex")
        return -1 if dot > 0 else 1

    def trace(self, seed: ContourSeed) -> ContourComponent:
        seed.consumed = True
        comp = ContourComponent(seeds=[seed])
        th_a = math.atan2(-seed.site_a.y, seed.x - seed.site_a.x)
        th_b = math.atan2(-seed.site_b.y, seed.x - seed.site_b.x)
        A = _Side(self.sa, seed.face_a, self.sa.faces[seed.face_a].sector_of(th_a), 0)
        B = _Side(self.sb, seed.face_b, self.sb.faces[seed.face_b].sector_of(th_b), 1)
        curve = self._curve(A, B)
        px, py = seed.x, 0.0
        t = curve.param((px, py))
        sign = self._orient(curve, t)
        cur_v = seed.vertex
        stats = self.stats
        ell_c = ca = cb = None
        last = ("ell", None, None)  # the feature just crossed, excluded near the current point
        while True:
            stats.steps += 1
            if stats.steps > self.limit:
                raise TraceStall("step limit exceeded")
            best_key = math.inf
            best = None
            near = SAME_PT * (1.0 + abs(px) + abs(py))
            point = curve.point
            if ell_c is None:
                ell_c = [(tt, "ell", None, None) for tt in line_params(curve, 0.0, 1.0, 0.0)[0]]
            if ca is None:
                ca = _side_candidates(curve, A)
            if cb is None:
                cb = _side_candidates(curve, B)
            cands = ell_c + ca + cb
            reach = REACROSS * (1.0 + abs(t))
            for tt, kind, side, extra in cands:
                key = sign * (tt - t)
                if key <= 0.0 or key >= best_key:
                    continue
                if key <= reach and kind == last[0]:
                    tag = side.tag if side is not None else None
                    ident = extra.id if kind == "arc" else extra
                    if tag == last[1] and ident == last[2]:
                        continue
                q = point(tt)
                if abs(q[0] - px) + abs(q[1] - py) <= near:
                    continue
                if kind == "arc":
                    if q[1] < -near:
                        continue
                    f = side.face
                    s = side.site
                    th = math.atan2(q[1] - s.y, q[0] - s.x)
                    if not f.angs[side.k + 1] - ANG_TOL <= th <= f.angs[side.k] + ANG_TOL:
                        continue
                elif kind == "spoke":
                    if q[1] < -near:
                        continue
                    s = side.site
                    v = side.face.verts[extra]
                    if v.inf:
                        dx, dy = v.x, v.y
                        cap = math.inf
                    else:
                        dx, dy = v.x - s.x, v.y - s.y
                        cap = dx * dx + dy * dy
                    proj = (q[0] - s.x) * dx + (q[1] - s.y) * dy
                    if proj < 0.0 or proj > cap * (1.0 + 1e-12):
                        continue
                best_key = key
                best = (kind, side, extra, tt, q)

            if best is None:
                dx, dy = curve.arm_direction(sign)
                v = Vertex(dx, max(dy, 0.0), True)
                self._anchor(v, A)
                self._anchor(v, B)
                comp.edges.append(ContourEdge(A.site, B.site, cur_v, v))
                self._log("infinity", A, B, (dx, dy))
                return comp
            kind, side, extra, tt, q = best
            if kind == "ell":
                sd = self._match_seed(q[0], A, B)
                comp.edges.append(ContourEdge(A.site, B.site, cur_v, sd.vertex))
                comp.seeds.append(sd)
                self._log("line", A, B, q)
                return comp
            if kind == "spoke":
                key = (side.tag, side.fi, extra)
                stats.spoke_hits[key] += 1
                stats.spoke_crossings += 1
                if stats.spoke_hits[key] > stats.max_spoke_crossings:
                    stats.max_spoke_crossings = stats.spoke_hits[key]
                nk = side.k - 1 if extra == side.k else side.k + 1
                if not 0 <= nk < len(side.face.nbrs):
                    raise TraceStall("crossed a spoke out of the face")
                side.k = nk
                if side is A:
                    ca = None
                else:
                    cb = None
                t = tt
                px, py = q
                last = ("spoke", side.tag, extra)
                self._log("spoke", A, B, q)
                continue
            # arc: a merge vertex; the crossed diagram switches to the neighbour
            stats.arc_crossings += 1
            m = Vertex(q[0], q[1])
            self._anchor(m, side)
            old = side.site
            nb = extra
            th = math.atan2(q[1] - nb.y, q[0] - nb.x)
            gi = side.spoked.face_at_angle(nb, th, 1e-9)
            if gi is None:
                raise TraceStall("no face across a crossed edge")
            g = side.spoked.faces[gi]
            gk = g.sector_of(th)
            if g.nbrs[gk] is None or g.nbrs[gk].id != old.id:
                # the crossing sits at a chain vertex; pick the adjacent sector facing old
                for kk in (gk - 1, gk + 1):
                    if 0 <= kk < len(g.nbrs) and g.nbrs[kk] is not None and g.nbrs[kk].id == old.id:
                        gk = kk
                        break
                else:
                    raise TraceStall("edge twin not found")
            comp.edges.append(ContourEdge(A.site, B.site, cur_v, m))
            side.set(gi, gk)
            self._anchor(m, side)
            curve = self._curve(A, B)
            t = curve.param(q)
            sign = self._orient(curve, t, nb, old)
            ell_c = ca = cb = None
            cur_v = m
            px, py = q
            last = ("arc", side.tag, old.id)
            self._log("vertex", A, B, q)

    def _match_seed(self, x, A, B):
        i = bisect.bisect_left(self.seed_x, x)
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(self.seeds):
                sd = self.seeds[j]
                if (abs(sd.x - x) <= 1e-7 * (1.0 + abs(x)) and sd.site_a.id == A.site.id
                        and sd.site_b.id == B.site.id):
                    if sd.consumed:
                        raise TraceStall("seed reached twice")
                    sd.consumed = True
                    return sd
        raise TraceStall(f"contour reached y = 0 at x={x} away from any seed")

    def _log(self, kind, A, B, p):
        if self.log is not None:
            self.log.append((kind, A.site.id, B.site.id, p[0], p[1]))


def _side_candidates(curve, side):
    """Curve parameters where the walk could leave the side's current sector."""
    out = []
    f = side.face
    s = side.site
    k = side.k
    nb = f.nbrs[k]
    if nb is not None:
        for tt in third_site_params(curve, nb)[0]:
            out.append((tt, "arc", side, nb))
    for jv in (k, k + 1):
        v = f.verts[jv]
        if v.inf:
            dx, dy = v.x, v.y
        else:
            if v.y <= 0.0:
                continue
            dx, dy = v.x - s.x, v.y - s.y
        if dy <= 0.0:
            continue
        for tt in line_params(curve, -dy, dx, dx * s.y - dy * s.x)[0]:
            out.append((tt, "spoke", side, jv))
    return out


# --------------------------------------------------------------------------- stitching


def _stitch(va, vb, pieces, components, anchors):
    by_site = defaultdict(list)
    for comp in components:
        for e in comp.edges:
            for s, other in ((e.site_a, e.site_b), (e.site_b, e.site_a)):
                a0 = vertex_angle(s, e.v0)
                a1 = vertex_angle(s, e.v1)
                if a0 >= a1:
                    by_site[s.id].append((a0, a1, e.v0, e.v1, other))
                else:
                    by_site[s.id].append((a1, a0, e.v1, e.v0, other))
    for recs in by_site.values():
        recs.sort(key=lambda r: -r[0])
    used = 0
    faces = []
    for xl, xr, side, fi, VL, VR in pieces:
        F = (va if side == 0 else vb).faces[fi]
        s = F.site
        recs = by_site.get(s.id)
        if not recs and VL is F.verts[0] and VR is F.verts[-1]:
            faces.append(F)
            continue
        thL = vertex_angle(s, VL)
        thR = vertex_angle(s, VR)
        mine = [r for r in recs or () if thR < 0.5 * (r[0] + r[1]) < thL]
        used += len(mine)
        verts = [VL]
        nbrs = []
        angs = [thL]

        def edge_index(v, at_start):
            if at_start and v is F.verts[0]:
                return 0
            if not at_start and v is F.verts[-1]:
                return len(F.nbrs) - 1
            a = anchors.get((id(v), s.id))
            if a is None or a[0] != fi:
                raise TraceStall("gap endpoint without an anchor on the old face")
            return a[1]

        def fill(P, Q):
            kp = edge_index(P, True)
            kq = edge_index(Q, False)
            if kp > kq:
                raise TraceStall("inconsistent gap on an old face")
            for kk in range(kp, kq):
                nbrs.append(F.nbrs[kk])
                verts.append(F.verts[kk + 1])
                angs.append(F.angs[kk + 1])
            nbrs.append(F.nbrs[kq])
            verts.append(Q)
            angs.append(vertex_angle(s, Q))

        cur = VL
        for a0, a1, v0, v1, other in mine:
            if v0 is not cur:
                fill(cur, v0)
            nbrs.append(other)
            verts.append(v1)
            angs.append(a1)
            cur = v1
        if cur is not VR:
            fill(cur, VR)
        for a, b in zip(angs, angs[1:]):
            if b > a + 1e-9:
                raise TraceStall("stitched chain is not angularly monotone")
        faces.append(Face(s, xl, xr, verts, nbrs, angs))
    if used != sum(len(r) for r in by_site.values()):
        raise TraceStall("contour edge outside every surviving face")
    return faces


# --------------------------------------------------------------------------- merge


def merge_vdplus(va: HalfPlaneVD, vb: HalfPlaneVD, stats: MergeStats | None = None,
                 trace_log: list | None = None) -> HalfPlaneVD:
    """Diagram of the union of the two (disjoint) site sets."""
    if not va.faces:
        return HalfPlaneVD(va.sites + vb.sites, vb.faces) if va.sites else vb
    if not vb.faces:
        return HalfPlaneVD(va.sites + vb.sites, va.faces) if vb.sites else va
    if stats is None:
        stats = MergeStats()
    instrument.add("merges", 1)
    instrument.add("merge_work", len(va.faces) + len(vb.faces))
    pieces, seeds = _sweep(va, vb)
    stats.seeds += len(seeds)
    tracer = _Tracer(va, vb, seeds, stats, trace_log)
    steps0 = stats.steps
    components = []
    for sd in seeds:
        if not sd.consumed:
            components.append(tracer.trace(sd))
    stats.components += len(components)
    instrument.add("trace_steps", stats.steps - steps0)
    faces = _stitch(va, vb, pieces, components, tracer.anchors)
    out = HalfPlaneVD(va.sites + vb.sites, faces)
    out.components = components
    return out


def merge_or_rebuild(va: HalfPlaneVD, vb: HalfPlaneVD, *, seed: int = 0) -> HalfPlaneVD:
    """Merge, falling back to a perturbed rebuild of the union on numeric failure."""
    from .vdplus import build_vdplus

    try:
        return merge_vdplus(va, vb)
    except RETRYABLE + (CoincidentSites,):
        instrument.add("merge_fallbacks", 1)
        sites = va.sites + vb.sites
        return build_vdplus(sites, seed=seed + len(sites))


def merge_with_retry(va_sites, vb_sites, *, retries: int = 5, seed: int = 0, stats=None):
    """Build both sides and merge, re-perturbing the inputs on numeric failure."""
    from .vdplus import build_vdplus

    A, B = list(va_sites), list(vb_sites)
    for attempt in range(retries + 1):
        try:
            return merge_vdplus(build_vdplus(A, seed=seed), build_vdplus(B, seed=seed), stats)
        except RETRYABLE:
            if attempt == retries:
                raise
            instrument.add("reperturb", 1)
            A = perturb_sites(list(va_sites), 1e-7 * 10.0 ** attempt, seed + 2 * attempt)
            B = perturb_sites(list(vb_sites), 1e-7 * 10.0 ** attempt, seed + 2 * attempt + 1)
