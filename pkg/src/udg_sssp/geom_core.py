"""Numeric kernel: additively weighted distance, bisectors and their intersections.

Every non-empty bisector is stored in a canonical frame: origin at the midpoint of
the two sites, ``u`` the unit vector from the lower-id site to the higher-id one
and ``n`` its left normal.  With ``c`` half the site distance and ``h`` half the
weight difference ``w_hi - w_lo`` the curve is

    p(t) = mid + h cosh(t) u + b sinh(t) n,      b = sqrt(c^2 - h^2)

which covers both the hyperbola branch (h != 0) and the perpendicular bisector
(h == 0).  Along the curve the common weighted distance is ``c cosh(t) + wbar``
with ``wbar`` the mean weight, so every intersection with a line or with a third
site's distance function reduces to ``alpha cosh t + beta sinh t = gamma``, a
quadratic in ``exp(t)``.
"""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

from .errors import CoincidentSites, NearTangency, OffCurve

EPS = 1e-9


class WeightedSite(NamedTuple):
    id: int
    x: float
    y: float
    w: float


def weighted_distance(s, p) -> float:
    return math.hypot(p[0] - s.x, p[1] - s.y) + s.w


class Side(enum.Enum):
    CLOSER_A = -1
    EQUIDISTANT = 0
    CLOSER_B = 1


class BisectorKind(enum.Enum):
    HYPERBOLA_BRANCH = "hyperbola"
    STRAIGHT_LINE = "line"
    EMPTY = "empty"


def side_of_bisector(p, a: WeightedSite, b: WeightedSite, tol: float = EPS) -> Side:
    da = weighted_distance(a, p)
    db = weighted_distance(b, p)
    diff = da - db
    if abs(diff) <= tol * (1.0 + abs(da)):
        return Side.EQUIDISTANT
    return Side.CLOSER_A if diff < 0 else Side.CLOSER_B


class BisectorCurve:
    """Classified bisector of two weighted sites (see module docstring for the frame)."""

    __slots__ = (
        "lo", "hi", "kind", "focal_offset", "dominant",
        "cx", "cy", "ux", "uy", "nx", "ny", "h", "c", "b", "wbar",
    )

    def __init__(self, lo: WeightedSite, hi: WeightedSite, tol: float = EPS):
        self.lo = lo
        self.hi = hi
        dx = hi.x - lo.x
        dy = hi.y - lo.y
        d = math.hypot(dx, dy)
        dw = hi.w - lo.w
        self.focal_offset = dw
        if d <= tol and abs(dw) <= tol:
            raise CoincidentSites(f"sites {lo.id} and {hi.id} coincide")
        self.dominant = None
        if abs(dw) >= d - tol * (1.0 + d):
            self.kind = BisectorKind.EMPTY
            self.dominant = lo.id if dw > 0 else hi.id
            return
        self.kind = BisectorKind.STRAIGHT_LINE if abs(dw) < tol else BisectorKind.HYPERBOLA_BRANCH
        self.cx = 0.5 * (lo.x + hi.x)
        self.cy = 0.5 * (lo.y + hi.y)
        self.ux = dx / d
        self.uy = dy / d
        self.nx = -self.uy
        self.ny = self.ux
        self.c = 0.5 * d
        self.h = 0.0 if self.kind is BisectorKind.STRAIGHT_LINE else 0.5 * dw
        self.b = math.sqrt(max(self.c * self.c - self.h * self.h, 0.0))
        self.wbar = 0.5 * (lo.w + hi.w)

    @property
    def site_lo(self) -> int:
        return self.lo.id

    @property
    def site_hi(self) -> int:
        return self.hi.id

    @property
    def is_empty(self) -> bool:
        return self.kind is BisectorKind.EMPTY

    def line_coefficients(self):
        """(a, b, r) with a*x + b*y = r, only for straight-line bisectors."""
        return self.ux, self.uy, self.ux * self.cx + self.uy * self.cy

    def point(self, t: float):
        ch = math.cosh(t)
        sh = math.sinh(t)
        X = self.h * ch
        Y = self.b * sh
        return (self.cx + X * self.ux + Y * self.nx, self.cy + X * self.uy + Y * self.ny)

    def param(self, p) -> float:
        Y = (p[0] - self.cx) * self.nx + (p[1] - self.cy) * self.ny
        return math.asinh(Y / self.b)

    def tangent(self, t: float):
        sh = math.sinh(t)
        ch = math.cosh(t)
        return (self.h * sh * self.ux + self.b * ch * self.nx,
                self.h * sh * self.uy + self.b * ch * self.ny)

    def distance_at(self, t: float) -> float:
        return self.c * math.cosh(t) + self.wbar

    def arm_direction(self, sign: int):
        """Unit asymptotic direction of the arm reached as t -> sign * inf."""
        X = self.h
        Y = self.b if sign > 0 else -self.b
        dx = X * self.ux + Y * self.nx
        dy = X * self.uy + Y * self.ny
        r = math.hypot(dx, dy)
        return (dx / r, dy / r)

    def residual(self, p) -> float:
        return weighted_distance(self.lo, p) - weighted_distance(self.hi, p)

    def on_curve(self, p, tol: float = 1e-8) -> bool:
        da = weighted_distance(self.lo, p)
        return abs(da - weighted_distance(self.hi, p)) <= tol * (1.0 + abs(da))

    def __repr__(self):
        return f"BisectorCurve({self.lo.id}, {self.hi.id}, {self.kind.value})"


def classify_bisector(a: WeightedSite, b: WeightedSite, tol: float = EPS) -> BisectorCurve:
    if a.id == b.id:
        raise ValueError("bisector of a site with itself")
    if a.id > b.id:
        a, b = b, a
    return BisectorCurve(a, b, tol)


def solve_chsh(alpha: float, beta: float, gamma: float):
    """Real roots t (ascending) of alpha*cosh(t) + beta*sinh(t) = gamma.

    Returns ``(roots, double)`` where ``double`` flags a (near) tangential root.
    """
    P = alpha + beta
    Q = alpha - beta
    scale = gamma * gamma + alpha * alpha + beta * beta
    if scale == 0.0:
        return [], False
    disc = gamma * gamma - P * Q
    if disc < 0.0:
        if disc < -1e-12 * scale:
            return [], False
        disc = 0.0
    double = disc <= 1e-12 * scale
    if abs(P) <= 1e-15 * math.sqrt(scale):
        if gamma != 0.0:
            z = Q / (2.0 * gamma)
            if z > 0.0 and z < math.inf:
                return [math.log(z)], False
        return [], False
    qq = gamma + math.copysign(math.sqrt(disc), gamma)
    if qq != 0.0:
        z1 = qq / P
        z2 = Q / qq
    elif P * Q < 0:
        z1 = z2 = math.sqrt(-Q / P)
    else:
        return [], False
    if z1 > z2:
        z1, z2 = z2, z1
    if z1 > 0.0:
        r0 = math.log(z1)
        r1 = math.log(z2)
        if r1 - r0 <= 1e-9 * (1.0 + abs(r0)):
            return [0.5 * (r0 + r1)], True
        return [r0, r1], double
    if z2 > 0.0 and z2 < math.inf:
        return [math.log(z2)], False
    return [], False


def line_params(curve: BisectorCurve, gx: float, gy: float, r: float):
    """Parameters where the curve meets the line gx*x + gy*y = r."""
    alpha = curve.h * (gx * curve.ux + gy * curve.uy)
    beta = curve.b * (gx * curve.nx + gy * curve.ny)
    gamma = r - (gx * curve.cx + gy * curve.cy)
    return solve_chsh(alpha, beta, gamma)


def third_site_params(curve: BisectorCurve, k: WeightedSite, tol: float = 1e-9):
    """Parameters where site ``k`` is exactly as far as the curve's two sites."""
    qx = curve.cx - k.x
    qy = curve.cy - k.y
    kappa = curve.wbar - k.w
    c = curve.c
    h = curve.h
    alpha = 2.0 * h * (qx * curve.ux + qy * curve.uy) - 2.0 * c * kappa
    beta = 2.0 * curve.b * (qx * curve.nx + qy * curve.ny)
    gamma = kappa * kappa + c * c - h * h - (qx * qx + qy * qy)
    roots, double = solve_chsh(alpha, beta, gamma)
    out = []
    for t in roots:
        radial = c * math.cosh(t) + kappa
        if radial >= -tol * (1.0 + abs(kappa) + c):
            out.append(t)
    return out, double


def bisector_hline_intersections(c: BisectorCurve, y0: float):
    if c.is_empty:
        raise ValueError("empty bisector has no intersections")
    roots, _ = line_params(c, 0.0, 1.0, y0)
    pts = [(c.point(t)[0], y0) for t in roots]
    pts.sort()
    return pts


def axis_crossings(a: WeightedSite, b: WeightedSite, tol: float = EPS):
    """x-coordinates where the bisector of a and b crosses y = 0, without building a curve.

    Returns ``None`` for an empty bisector (or coincident sites) and ``[]`` when the
    crossing is tangential.
    """
    if a.id > b.id:
        a, b = b, a
    dx = b.x - a.x
    dy = b.y - a.y
    d = math.hypot(dx, dy)
    dw = b.w - a.w
    if abs(dw) >= d - tol * (1.0 + d):
        return None
    ux = dx / d
    uy = dy / d
    c = 0.5 * d
    h = 0.0 if abs(dw) < tol else 0.5 * dw
    bb = math.sqrt(max(c * c - h * h, 0.0))
    cx = 0.5 * (a.x + b.x)
    # y(t) = cy + h ch uy + bb sh ux = 0
    roots, double = solve_chsh(h * uy, bb * ux, -0.5 * (a.y + b.y))
    if double:
        return []
    out = []
    for t in roots:
        out.append(cx + h * math.cosh(t) * ux - bb * math.sinh(t) * uy)
    return out


def bisector_line_intersections(c: BisectorCurve, p, q):
    """Intersections with the infinite line through p and q, as (t, point) pairs."""
    gx = q[1] - p[1]
    gy = p[0] - q[0]
    r = gx * p[0] + gy * p[1]
    roots, double = line_params(c, gx, gy, r)
    return [(t, c.point(t)) for t in roots], double


def bisector_segment_intersections(c: BisectorCurve, seg, tol: float = EPS):
    if c.is_empty:
        raise ValueError("empty bisector has no intersections")
    p, q = seg
    ex = q[0] - p[0]
    ey = q[1] - p[1]
    L2 = ex * ex + ey * ey
    if L2 <= 0.0:
        raise ValueError("degenerate segment")
    hits, double = bisector_line_intersections(c, p, q)
    if double and hits:
        raise NearTangency("bisector tangent to segment line")
    out = []
    for _, pt in hits:
        s = ((pt[0] - p[0]) * ex + (pt[1] - p[1]) * ey) / L2
        if -tol <= s <= 1.0 + tol:
            out.append((s, pt))
    out.sort()
    return [pt for _, pt in out]


def _dedupe(points, tol):
    out = []
    for p in points:
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > tol * (1.0 + math.hypot(*q)) for q in out):
            out.append(p)
    return out


def bisector_pair_intersections(c1: BisectorCurve, c2: BisectorCurve, tol: float = 1e-9):
    if c1.is_empty or c2.is_empty:
        raise ValueError("empty bisector has no intersections")
    ids1 = {c1.lo.id, c1.hi.id}
    ids2 = {c2.lo.id, c2.hi.id}
    if ids1 == ids2:
        raise ValueError("identical bisectors")
    shared = ids1 & ids2
    if shared:
        other = c2.lo if c2.lo.id not in shared else c2.hi
        ts, double = third_site_params(c1, other)
        if double and ts:
            raise NearTangency("bisectors touch tangentially")
        return _dedupe([c1.point(t) for t in ts], 1e-7)
    return _generic_pair_intersections(c1, c2, tol)


def _generic_pair_intersections(c1, c2, tol):
    # Four distinct sites: sample c1 and refine sign changes of c2's residual.
    span = max(abs(c1.cx), abs(c1.cy), abs(c2.cx), abs(c2.cy), c1.c, c2.c, 1.0)
    T = math.asinh(1e4 * span / c1.b)
    n = 8000
    f = lambda t: c2.residual(c1.point(t))
    ts = [-T + 2.0 * T * i / n for i in range(n + 1)]
    vals = [f(t) for t in ts]
    out = []
    for i in range(n):
        if vals[i] == 0.0:
            out.append(c1.point(ts[i]))
            continue
        if vals[i] * vals[i + 1] < 0.0:
            lo, hi = ts[i], ts[i + 1]
            flo = vals[i]
            while hi - lo > 1e-13 * (1.0 + abs(lo)):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            out.append(c1.point(0.5 * (lo + hi)))
    pts = _dedupe(out, 1e-7)
    if len(pts) < len(out):
        raise NearTangency("coincident intersection roots")
    return pts


class BisectorCursor:
    """Oriented position on a bisector; ``key`` grows monotonically in walking order."""

    __slots__ = ("curve", "t", "sign")

    def __init__(self, curve: BisectorCurve, t: float, sign: int):
        self.curve = curve
        self.t = t
        self.sign = 1 if sign >= 0 else -1

    def key(self, t: float) -> float:
        return self.sign * (t - self.t)

    @property
    def point(self):
        return self.curve.point(self.t)

    def ahead(self, ds: float):
        return self.curve.point(self.t + self.sign * ds)

    def advance(self, t: float) -> None:
        if self.key(t) < 0:
            raise ValueError("cursor cannot move backwards")
        self.t = t

    def first_after(self, points, tol: float = 1e-12):
        """The first of ``points`` (all on the curve) strictly ahead of the cursor."""
        best = None
        best_key = math.inf
        for p in points:
            k = self.key(self.curve.param(p))
            if tol < k < best_key:
                best, best_key = p, k
        return best

    def direction(self):
        tx, ty = self.curve.tangent(self.t)
        r = math.hypot(tx, ty)
        return (self.sign * tx / r, self.sign * ty / r)


def walk_bisector(c: BisectorCurve, start, toward: int, tol: float = 1e-8) -> BisectorCursor:
    if c.is_empty:
        raise ValueError("cannot walk an empty bisector")
    if not c.on_curve(start, tol):
        raise OffCurve(f"{start} is not on {c!r}")
    return BisectorCursor(c, c.param(start), toward)


def angle_from(s, x: float, y: float) -> float:
    return math.atan2(y - s.y, x - s.x)
