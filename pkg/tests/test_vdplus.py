import math
import random

import numpy as np
import pytest

from udg_sssp.errors import EmptyInput, ParseError, QueryBelowLine, SiteAboveLine
from udg_sssp.geom_core import WeightedSite, weighted_distance
from _support import agree_with_brute, random_sites
from udg_sssp.vdplus import (
    add_spokes,
    build_locator,
    build_vdplus,
    dumps,
    loads,
    locate,
    locate_flat,
    nearest_site_bruteforce,
    singleton_vd,
)

W = WeightedSite


# ---------------------------------------------------------------- small examples


def test_singleton_shape():
    for s in (W(0, 0, -1, 0), W(7, 5, -0.1, -3)):
        vd = singleton_vd(s)
        fin, arcs, ledges, faces = vd.counts()
        assert (fin, arcs, ledges, faces) == (0, 0, 1, 1)
        assert vd.l_edge_seq == [(-math.inf, math.inf, s.id)]
        loc = build_locator(vd)
        assert loc.depth <= 1
        for q in [(0, 1), (-100, 0.5), (30, 200), (5, 0)]:
            assert locate(loc, q)[0] == s.id
        sp = add_spokes(vd)
        assert sp.spokes() == {}
        assert sp.subregion_count() == 1


def test_singleton_rejects_site_above_line():
    with pytest.raises(SiteAboveLine):
        singleton_vd(W(0, 0, 0.0, 0))
    with pytest.raises(SiteAboveLine):
        build_vdplus([W(0, 0, -1, 0), W(1, 2, 1, 0)])


def test_symmetric_pair():
    a, b = W(0, -1, -1, 0), W(1, 1, -1, 0)
    vd = build_vdplus([a, b])
    seq = vd.l_edge_seq
    assert [s for _, _, s in seq] == [0, 1]
    assert seq[0][0] == -math.inf and seq[-1][1] == math.inf
    assert seq[0][1] == pytest.approx(0.0, abs=1e-12)
    loc = build_locator(vd)
    assert locate(loc, (-0.5, 1))[0] == 0
    assert locate(loc, (0.5, 1))[0] == 1
    assert locate(loc, (0.0, 0.0))[0] == 0  # tie on the line goes to the min id
    # the only finite vertex is the arc's endpoint on the line itself
    assert [(v.x, v.y) for v in vd.vertices() if not v.inf] == [(pytest.approx(0.0, abs=1e-12), 0.0)]
    sp = add_spokes(vd)
    assert sp.subregion_count() >= 2


def test_stacked_sites_one_face():
    vd = build_vdplus([W(0, 0, -1, 0), W(1, 0, -2, 0)])
    assert {f.site.id for f in vd.faces} == {0}
    loc = build_locator(vd)
    rng = random.Random(0)
    for _ in range(500):
        q = (rng.uniform(-50, 50), rng.uniform(0, 50))
        assert locate(loc, q)[0] == 0
        assert nearest_site_bruteforce([W(0, 0, -1, 0), W(1, 0, -2, 0)], q)[0] == 0


def test_bruteforce_examples():
    assert nearest_site_bruteforce([W(0, 0, -1, 0)], (0, 1)) == (0, 2.0)
    sid, d = nearest_site_bruteforce([W(0, 0, -1, 0), W(1, 2, -1, 1)], (0, 1))
    assert (sid, d) == (0, 2.0)
    assert weighted_distance(W(1, 2, -1, 1), (0, 1)) == pytest.approx(math.sqrt(8) + 1)
    with pytest.raises(EmptyInput):
        nearest_site_bruteforce([], (0, 1))
    with pytest.raises(EmptyInput):
        build_vdplus([])


def test_duplicate_sites_deduplicated():
    S = [W(0, 1, -1, 0.5), W(1, 1, -1, 0.2), W(2, 1, -1, 0.2), W(3, 4, -1, 0)]
    vd = build_vdplus(S)
    owners = {f.site.id for f in vd.faces}
    assert 1 in owners and 0 not in owners and 2 not in owners
    assert sorted(s.id for s in vd.sites) == [0, 1, 2, 3]


# ---------------------------------------------------------------- random instances vs the scan


@pytest.mark.parametrize("n,seed", [(100, 0), (100, 1), (300, 2), (60, 3)])
def test_random_locate_matches_brute(n, seed):
    S = random_sites(n, seed)
    vd = build_vdplus(S)
    assert agree_with_brute(vd, S, 10_000, seed) == 0


def test_wide_weights_and_zero_weights():
    S = random_sites(150, 4, width=20, wmax=3.0)
    assert agree_with_brute(build_vdplus(S), S, 3000, 4) == 0
    Z = [s._replace(w=0.0) for s in random_sites(150, 5, width=20)]
    assert agree_with_brute(build_vdplus(Z), Z, 3000, 5) == 0


def test_locate_flat_matches_locator():
    S = random_sites(80, 6)
    vd = build_vdplus(S)
    assert agree_with_brute(vd, S, 1500, 6, locator=False) == 0


def test_queries_on_the_line_use_min_id_ties():
    S = random_sites(50, 7)
    vd = build_vdplus(S)
    loc = build_locator(vd)
    for f in vd.faces[:-1]:
        x = f.xr
        sid, _ = locate(loc, (x, 0.0))
        ref = nearest_site_bruteforce(S, (x, 0.0))
        assert weighted_distance([s for s in S if s.id == sid][0], (x, 0)) == pytest.approx(ref[1], abs=1e-9)


def test_query_below_line_rejected():
    vd = build_vdplus(random_sites(10, 8))
    loc = build_locator(vd)
    with pytest.raises(QueryBelowLine):
        locate(loc, (1.0, -1e-9))
    with pytest.raises(QueryBelowLine):
        locate_flat(vd, (1.0, -0.5))


# ---------------------------------------------------------------- structure


@pytest.mark.parametrize("n,seed", [(2, 0), (5, 1), (40, 2), (400, 3)])
def test_euler_and_size(n, seed):
    vd = build_vdplus(random_sites(n, seed))
    assert vd.euler_characteristic() == 1
    fin, arcs, ledges, faces = vd.counts()
    assert arcs + ledges <= 20 * n
    assert faces <= 4 * n


def test_l_edges_tile_the_line_and_neighbours_differ():
    vd = build_vdplus(random_sites(200, 9))
    seq = vd.l_edge_seq
    assert seq[0][0] == -math.inf and seq[-1][1] == math.inf
    for (l0, r0, s0), (l1, r1, s1) in zip(seq, seq[1:]):
        assert r0 == l1
        assert l0 < r0
        assert s0 != s1


def test_shared_vertices_are_equidistant():
    S = random_sites(200, 10)
    vd = build_vdplus(S)
    for f in vd.faces:
        for k, nb in enumerate(f.nbrs):
            if nb is None:
                continue
            for v in (f.verts[k], f.verts[k + 1]):
                if v.inf:
                    continue
                d1, d2 = weighted_distance(f.site, (v.x, v.y)), weighted_distance(nb, (v.x, v.y))
                assert abs(d1 - d2) <= 1e-7 * (1 + abs(d1))
                assert v.y >= -1e-12


def test_spokes_and_subregions():
    vd = build_vdplus(random_sites(150, 11))
    sp = add_spokes(vd)
    fin = vd.counts()[0]
    assert sp.subregion_count() <= 3 * fin + len(vd.faces)
    for (fi, j), (start, end, is_ray) in sp.spokes().items():
        f = vd.faces[fi]
        assert start[1] == 0.0
        if not is_ray:
            # the spoke's midpoint lies inside its face
            mid = (0.5 * (start[0] + end[0]), 0.5 * (start[1] + end[1]))
            d = weighted_distance(f.site, mid)
            assert all(weighted_distance(s, mid) >= d - 1e-9 for s in vd.sites)
    for fi, f in enumerate(vd.faces):
        for k in range(len(f.nbrs)):
            pieces = sp.subregion_boundary(fi, k)
            assert 2 <= len(pieces) <= 4


def test_twins_are_mutual():
    vd = build_vdplus(random_sites(120, 12))
    sp = add_spokes(vd)
    found = 0
    for fi, k in vd.arcs():
        tw = sp.twin(fi, k)
        if tw is None:
            continue
        found += 1
        assert sp.twin(*tw) == (fi, k)
        assert vd.faces[tw[0]].site.id == vd.faces[fi].nbrs[k].id
    assert found > 0


def test_locator_depth_logarithmic():
    for n in (64, 512):
        vd = build_vdplus(random_sites(n, n))
        loc = build_locator(vd)
        assert loc.depth <= 4 * math.log2(n) + 1


# ---------------------------------------------------------------- serialization


def test_round_trip_text():
    S = random_sites(60, 13)
    vd = build_vdplus(S)
    text = dumps(vd, {"seed": 13})
    assert text.startswith("VDPLUS 1\n# seed=13\n")
    back = loads(text)
    assert dumps(back, {"seed": 13}) == text
    assert back.l_edge_seq == vd.l_edge_seq
    assert agree_with_brute(back, S, 1000, 13) == 0


def test_loads_errors_carry_line_numbers():
    with pytest.raises(ParseError):
        loads("NOT A DIAGRAM\n")
    text = dumps(build_vdplus(random_sites(5, 1))).splitlines()
    text.insert(3, "S x y z")
    with pytest.raises(ParseError) as ei:
        loads("\n".join(text))
    assert ei.value.line == 4
