"""Seeded instance generators for points, weighted sites and op sequences."""
from __future__ import annotations

import math

import numpy as np

from .geom_core import WeightedSite

KINDS = ("uniform", "clusters", "onecell", "chain")


def gen_points(kind: str, n: int, seed: int = 0, density: float = 1.0):
    """Point sets for SSSP.

    ``uniform`` fills a square of side sqrt(n)/density, ``clusters`` scatters
    Gaussian blobs of ~50 points over a square of side sqrt(n), ``onecell``
    keeps every point inside one grid cell and ``chain`` lays out a long path
    of steps shorter than one.
    """
    rng = np.random.default_rng(seed)
    if n <= 0:
        return []
    if kind == "uniform":
        side = math.sqrt(n) / density
        P = rng.uniform(0.0, side, size=(n, 2))
    elif kind == "clusters":
        k = max(1, n // 50)
        centers = rng.uniform(0.0, math.sqrt(n), size=(k, 2))
        lab = rng.integers(0, k, size=n)
        P = centers[lab] + rng.normal(0.0, 0.6 / density, size=(n, 2))
    elif kind == "onecell":
        P = rng.uniform(0.0, 0.5, size=(n, 2))
    elif kind == "chain":
        steps = rng.uniform(0.3, 0.95, size=n)
        steps[0] = 0.0
        P = np.column_stack([np.cumsum(steps), rng.uniform(0.0, 0.3, size=n)])
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return [(float(x), float(y)) for x, y in P]


def gen_sites(n: int, seed: int = 0, *, width: float | None = None, id0: int = 0,
              wmax: float = 1.0):
    """Sites in [0, width] x [-3, -0.01] with weights in [-wmax, wmax]."""
    rng = np.random.default_rng(seed)
    if width is None:
        width = max(1.0, n / 4.0)
    xs = rng.uniform(0.0, width, n)
    ys = rng.uniform(-3.0, -0.01, n)
    ws = rng.uniform(-wmax, wmax, n)
    return [WeightedSite(id0 + i, float(x), float(y), float(w)) for i, (x, y, w) in enumerate(zip(xs, ys, ws))]


def perturb_points(points, eps: float, seed: int):
    """Seeded relative jitter of magnitude eps (used to enforce general position)."""
    if eps <= 0 or not points:
        return list(points)
    rng = np.random.default_rng(seed)
    J = rng.uniform(-eps, eps, size=(len(points), len(points[0])))
    return [tuple(float(v + j * (1.0 + abs(v))) for v, j in zip(p, jr)) for p, jr in zip(points, J)]
