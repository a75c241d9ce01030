"""Minimal SVG drawings of diagrams, contours and shortest-path trees."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .geom_core import classify_bisector


class _Canvas:
    def __init__(self, xmin, xmax, ymin, ymax, width=800):
        span = max(xmax - xmin, ymax - ymin, 1e-9)
        self.xmin, self.ymax = xmin, ymax
        self.scale = width / span
        self.w = (xmax - xmin) * self.scale
        self.h = (ymax - ymin) * self.scale
        self.items = []

    def pt(self, x, y):
        return (x - self.xmin) * self.scale, (self.ymax - y) * self.scale

    def path(self, pts, cls, stroke="black", width=1.0):
        if len(pts) < 2:
            return
        d = "M " + " L ".join("%.3f %.3f" % self.pt(x, y) for x, y in pts)
        self.items.append(f'<path class="{cls}" d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>')

    def dot(self, x, y, r=2.0, fill="black", title=None):
        cx, cy = self.pt(x, y)
        t = f"<title>{escape(str(title))}</title>" if title is not None else ""
        self.items.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r}" fill="{fill}">{t}</circle>')

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.0f}" height="{self.h:.0f}" '
                f'viewBox="0 0 {self.w:.3f} {self.h:.3f}">')
        return "\n".join([head] + self.items + ["</svg>"]) + "\n"


def _arc_points(curve, v0, v1, box, samples=64):
    def tparam(v):
        if not v.inf:
            return curve.param((v.x, v.y))
        return math.inf if v.x * curve.nx + v.y * curve.ny > 0 else -math.inf

    t0, t1 = tparam(v0), tparam(v1)
    xmin, xmax, ymin, ymax = box
    reach = math.hypot(xmax - xmin, ymax - ymin) + math.hypot(curve.cx, curve.cy)
    cap = math.asinh(reach / max(curve.b, 1e-12)) + 1.0
    t0 = max(min(t0, cap), -cap)
    t1 = max(min(t1, cap), -cap)
    return [curve.point(t0 + (t1 - t0) * k / samples) for k in range(samples + 1)]


def diagram_svg(vd, box=None, contour=None, width=800) -> str:
    """One <path> per diagram edge (bisector arcs and l-edges), plus sites as dots."""
    xs = [s.x for s in vd.sites] or [0.0]
    ys = [s.y for s in vd.sites] or [-1.0]
    if box is None:
        pad = 1.0 + 0.1 * (max(xs) - min(xs))
        box = (min(xs) - pad, max(xs) + pad, min(ys) - 0.5, max(1.0, (max(xs) - min(xs)) * 0.5) + pad)
    cv = _Canvas(*box, width=width)
    xmin, xmax = box[0], box[1]
    for f in vd.faces:
        lo = max(f.xl, xmin)
        hi = min(f.xr, xmax)
        cv.path([(lo, 0.0), (hi, 0.0)], "ledge", stroke="#888")
    for fi, k in vd.arcs():
        f = vd.faces[fi]
        curve = classify_bisector(f.site, f.nbrs[k])
        cv.path(_arc_points(curve, f.verts[k], f.verts[k + 1], box), "arc")
    if contour:
        pts = [(p[3], p[4]) for p in contour if p[0] != "infinity"]
        cv.path(pts, "contour", stroke="red", width=0.8)
    for s in vd.sites:
        cv.dot(s.x, s.y, fill="blue", title=s.id)
    return cv.render()


def tree_svg(points, table, width=800) -> str:
    """Shortest-path tree: one <path> per tree edge, reached points dark, others grey."""
    if not points:
        return _Canvas(0, 1, 0, 1, width).render()
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    cv = _Canvas(min(xs) - 0.5, max(xs) + 0.5, min(ys) - 0.5, max(ys) + 0.5, width)
    for v, u in enumerate(table.pred):
        if u is not None:
            cv.path([points[u], points[v]], "tree", stroke="#c33")
    for v, (x, y) in enumerate(points):
        cv.dot(x, y, fill="black" if table.dist[v] < math.inf else "#bbb", title=v)
    return cv.render()
