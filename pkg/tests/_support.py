"""Shared helpers for the test modules."""
import random

import numpy as np
import pytest

from udg_sssp.geom_core import WeightedSite as W
from udg_sssp.vdplus import build_locator, locate_flat, nearest_bruteforce_np


def random_sites(n, seed, width=None, wmax=1.0, id0=0):
    rng = random.Random(seed)
    width = width if width is not None else max(2.0, n / 4)
    return [W(id0 + i, rng.uniform(0, width), rng.uniform(-3, -0.01), rng.uniform(-wmax, wmax))
            for i in range(n)]


def arrays(S):
    return (np.array([s.x for s in S]), np.array([s.y for s in S]),
            np.array([s.w for s in S]), np.array([s.id for s in S]))


def agree_with_brute(vd, S, k, seed, locator=True):
    """Number of sampled queries where the diagram and the scan disagree (ties skipped)."""
    xs, ys, ws, ids = arrays(S)
    loc = build_locator(vd) if locator else None
    rng = np.random.default_rng(seed)
    lo, hi = xs.min() - 3, xs.max() + 3
    bad = 0
    for qx, qy in zip(rng.uniform(lo, hi, k), rng.exponential(3.0, k)):
        bid, bd, second = nearest_bruteforce_np(xs, ys, ws, ids, qx, qy)
        if second - bd <= 1e-7:
            continue
        got = loc.locate((qx, qy)) if locator else locate_flat(vd, (qx, qy))
        if got[0] != bid:
            bad += 1
        else:
            assert got[1] == pytest.approx(bd, abs=1e-9)
    return bad
