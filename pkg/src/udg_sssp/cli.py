"""Command line: unit-disk shortest paths and half-plane weighted Voronoi diagrams.

Exit codes: 0 success, 1 validation mismatch, 2 parse or usage error.
"""
from __future__ import annotations

import argparse
import gc
import json
import math
import os
import resource
import statistics
import sys
import time

import numpy as np

from . import instrument
from .awnn import SOLVERS, emit_ops, parse_ops, random_ops, solve
from .errors import GeometryError, ParseError, UnknownSource
from .generators import KINDS, gen_points, gen_sites, perturb_points
from .geom_core import WeightedSite
from .sssp import dijkstra_baseline, sssp_grid
from .svg import diagram_svg, tree_svg
from .vdmerge import MergeStats, merge_vdplus
from .vdplus import build_locator, build_vdplus, dumps, nearest_bruteforce_np

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
VERSION = "1"


# --------------------------------------------------------------------------- point files


def parse_points(text: str, cols: int):
    """``x y`` (cols=2) or ``x y w`` (cols=3) per line; '#' comments and blank lines skipped."""
    out = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.replace(",", " ").split()
        if len(tok) != cols:
            raise ParseError(f"expected {cols} numbers, got {len(tok)}", ln)
        try:
            vals = tuple(float(t) for t in tok)
        except ValueError:
            raise ParseError(f"bad number in {line!r}", ln) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", ln)
        out.append(vals)
    return out


def emit_points(points, meta=None) -> str:
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines += [" ".join(repr(float(v)) for v in p) for p in points]
    return "\n".join(lines) + ("\n" if lines else "")


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fmt(v):
    return "inf" if v == math.inf else repr(v)


# --------------------------------------------------------------------------- commands


def cmd_gen(args):
    pts = gen_points(args.kind, args.n, args.seed, args.density)
    meta = {"kind": args.kind, "n": args.n, "seed": args.seed, "density": args.density}
    if args.sites:
        sites = gen_sites(args.n, args.seed, width=args.width)
        pts = [(s.x, s.y, s.w) for s in sites]
    _write(args.out, emit_points(pts, meta))
    return EXIT_OK


def cmd_sssp(args):
    pts = [tuple(p) for p in parse_points(_read(args.input), 2)]
    meta = {}
    if args.perturb > 0:
        pts = perturb_points(pts, args.perturb, args.seed)
        meta = {"perturb": args.perturb, "seed": args.seed}
    if not 0 <= args.source < len(pts):
        raise UnknownSource(f"source {args.source} not in 0..{len(pts) - 1}")
    with instrument.counting() as ctr:
        table = sssp_grid(pts, args.source)
    lines = [f"# {k}={v}" for k, v in meta.items()] + ["id,x,y,dist,pred"]
    for i, (x, y) in enumerate(pts):
        p = table.pred[i]
        lines.append(f"{i},{x!r},{y!r},{_fmt(table.dist[i])},{'' if p is None else p}")
    _write(args.out, "\n".join(lines) + "\n")
    if args.svg:
        _write(args.svg, tree_svg(pts, table))
    if args.count_ops:
        print(json.dumps(dict(sorted(ctr.items()))), file=sys.stderr)
    if args.oracle:
        ref = dijkstra_baseline(pts, args.source).dist
        dev = 0.0
        for a, b in zip(table.dist, ref):
            if a == math.inf or b == math.inf:
                if a != b:
                    dev = math.inf
                continue
            dev = max(dev, abs(a - b) / max(1.0, abs(b)))
        print(f"oracle max relative deviation: {dev:.3g}", file=sys.stderr)
        if dev > 1e-6:
            return EXIT_MISMATCH
    return EXIT_OK


def _sites_from(path, id0=0):
    rows = parse_points(_read(path), 3)
    return [WeightedSite(id0 + i, x, y, w) for i, (x, y, w) in enumerate(rows)]


def _check_diagram(vd, sites, k, seed):
    """Sample k points above the line; count disagreements with the linear scan."""
    if k <= 0 or not sites:
        return 0
    loc = build_locator(vd)
    xs = np.array([s.x for s in sites])
    ys = np.array([s.y for s in sites])
    ws = np.array([s.w for s in sites])
    ids = np.array([s.id for s in sites])
    rng = np.random.default_rng(seed)
    lo, hi = xs.min() - 2.0, xs.max() + 2.0
    bad = 0
    for qx, qy in zip(rng.uniform(lo, hi, k), rng.exponential(2.0, k)):
        bid, bd, second = nearest_bruteforce_np(xs, ys, ws, ids, qx, qy)
        if second - bd <= 1e-7:
            continue
        if loc.locate((qx, qy))[0] != bid:
            bad += 1
    return bad


def cmd_vd(args):
    meta = {}
    log = [] if args.svg else None
    if args.action == "build":
        sites = _sites_from(args.sites[0])
        if args.perturb > 0:
            sites = _perturb_sites(sites, args.perturb, args.seed)
            meta = {"perturb": args.perturb, "seed": args.seed}
        vd = build_vdplus(sites, seed=args.seed)
    else:
        if len(args.sites) != 2:
            raise ParseError("merge needs two site files")
        a = _sites_from(args.sites[0])
        b = _sites_from(args.sites[1], id0=len(a))
        if args.perturb > 0:
            a = _perturb_sites(a, args.perturb, args.seed)
            b = _perturb_sites(b, args.perturb, args.seed + 1)
            meta = {"perturb": args.perturb, "seed": args.seed}
        st = MergeStats()
        vd = merge_vdplus(build_vdplus(a, seed=args.seed), build_vdplus(b, seed=args.seed), st, log)
        meta.update(seeds=st.seeds, components=st.components, steps=st.steps)
        sites = a + b
    _write(args.out, dumps(vd, meta))
    if args.svg:
        _write(args.svg, diagram_svg(vd, contour=log))
    if args.check:
        bad = _check_diagram(vd, sites, args.check, args.seed)
        print(f"check: {bad} of {args.check} samples disagree", file=sys.stderr)
        if bad:
            return EXIT_MISMATCH
    return EXIT_OK


def _perturb_sites(sites, eps, seed):
    pts = perturb_points([(s.x, s.y) for s in sites], eps, seed)
    return [WeightedSite(s.id, x, y if y < 0 else s.y, s.w) for s, (x, y) in zip(sites, pts)]


def cmd_nn(args):
    ops = parse_ops(_read(args.ops))
    with instrument.counting() as ctr:
        ans = solve(ops, args.solver)
    lines = [f"{i} {d!r}" for i, d in ans]
    _write(args.out, "\n".join(lines) + ("\n" if lines else ""))
    if args.count_ops:
        print(json.dumps(dict(sorted(ctr.items()))), file=sys.stderr)
    if args.check:
        ref = solve(ops, "brute")
        bad = sum(1 for (i, d), (j, e) in zip(ans, ref) if i != j and abs(d - e) > 1e-9)
        print(f"check: {bad} answers differ from the linear scan", file=sys.stderr)
        if bad:
            return EXIT_MISMATCH
    return EXIT_OK


# --------------------------------------------------------------------------- bench


def _job(suite, n, seed, reps):
    """One benchmark job; returns wall time and the counters it produced."""
    with instrument.counting() as ctr:
        if suite == "merge":
            a = gen_sites(n // 2, seed, width=n / 4.0)
            b = gen_sites(n - n // 2, seed + 10_000, width=n / 4.0, id0=n // 2)
            va, vb = build_vdplus(a, seed=seed), build_vdplus(b, seed=seed)
            ctr.clear()
            times = []
            for _ in range(reps):
                gc.collect()
                gc.disable()
                t = time.perf_counter()
                merge_vdplus(va, vb)
                times.append(time.perf_counter() - t)
                gc.enable()
            wall = statistics.median(times)
        elif suite in ("dyn", "log"):
            ops = random_ops(np.random.default_rng(seed), 2 * n)
            t = time.perf_counter()
            solve(ops, suite)
            wall = (time.perf_counter() - t) / len(ops)
        elif suite == "sssp":
            pts = gen_points("uniform", n, seed, 2.0)
            t = time.perf_counter()
            sssp_grid(pts, 0)
            wall = time.perf_counter() - t
        else:
            raise ValueError(f"unknown suite {suite!r}")
    return {
        "suite": suite,
        "n": n,
        "seed": seed,
        "wall": wall,
        "counters": dict(sorted(ctr.items())),
        "maxrss_kb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss,
    }


def run_bench(suites, sizes, seeds, reps=3, threads=None):
    threads = threads or int(os.environ.get("UDG_SSSP_THREADS", "1") or 1)
    jobs = [(s, n, seed, reps) for s in suites for n in sizes for seed in seeds]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            runs = list(ex.map(_job_star, jobs))
    else:
        runs = [_job(*j) for j in jobs]
    medians = {}
    for s in suites:
        medians[s] = {n: statistics.median(r["wall"] for r in runs if r["suite"] == s and r["n"] == n)
                      for n in sizes}
    ratios = {}
    for s in suites:
        ns = sorted(medians[s])
        ratios[s] = [medians[s][b] / medians[s][a] for a, b in zip(ns, ns[1:]) if medians[s][a] > 0]
    return {"version": VERSION, "suites": list(suites), "sizes": list(sizes), "seeds": list(seeds),
            "runs": runs, "medians": {s: {str(n): v for n, v in m.items()} for s, m in medians.items()},
            "ratios": ratios}


def _job_star(j):
    return _job(*j)


def bench_table(report) -> str:
    lines = [f"{'suite':<7}{'n':>9}{'median s':>14}{'ratio':>8}"]
    for s in report["suites"]:
        prev = None
        for n in report["sizes"]:
            m = report["medians"][s][str(n)]
            r = "" if prev is None or prev == 0 else f"{m / prev:.2f}"
            lines.append(f"{s:<7}{n:>9}{m:>14.6f}{r:>8}")
            prev = m
    return "\n".join(lines) + "\n"


def cmd_bench(args):
    suites = args.suite.split(",")
    sizes = [int(v) for v in args.sizes.split(",")]
    seeds = [int(v) for v in args.seeds.split(",")]
    report = run_bench(suites, sizes, seeds, args.reps)
    _write(args.out, json.dumps(report, indent=1) + "\n")
    sys.stderr.write(bench_table(report))
    if args.max_ratio is not None:
        worst = max((r for rs in report["ratios"].values() for r in rs), default=0.0)
        if worst > args.max_ratio:
            return EXIT_MISMATCH
    return EXIT_OK


# --------------------------------------------------------------------------- entry point


def build_parser():
    p = argparse.ArgumentParser(prog="udg-sssp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a point file")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("n", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--sites", action="store_true", help="emit weighted sites 'x y w' below y = 0")
    g.add_argument("--width", type=float, default=None, help="x extent of generated sites")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sssp", help="shortest paths from one point")
    s.add_argument("input")
    s.add_argument("--source", type=int, default=0)
    s.add_argument("--out", default=None)
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--svg", default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--perturb", type=float, default=0.0)
    s.add_argument("--count-ops", action="store_true")
    s.set_defaults(func=cmd_sssp)

    v = sub.add_parser("vd", help="build or merge half-plane diagrams")
    v.add_argument("action", choices=("build", "merge"))
    v.add_argument("sites", nargs="+")
    v.add_argument("--out", default=None)
    v.add_argument("--svg", default=None)
    v.add_argument("--check", type=int, default=0)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--perturb", type=float, default=0.0)
    v.set_defaults(func=cmd_vd)

    q = sub.add_parser("nn", help="answer an insert/query op file")
    q.add_argument("ops")
    q.add_argument("--solver", choices=tuple(SOLVERS) + ("offline",), default="dyn")
    q.add_argument("--out", default=None)
    q.add_argument("--count-ops", action="store_true")
    q.add_argument("--check", action="store_true")
    q.set_defaults(func=cmd_nn)

    b = sub.add_parser("bench", help="timing and counter report")
    b.add_argument("--suite", default="merge", help="comma list of merge,dyn,log,sssp")
    b.add_argument("--sizes", default="4096,8192")
    b.add_argument("--seeds", default="0")
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--max-ratio", type=float, default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("ops", help="generate a random op file")
    o.add_argument("n", type=int)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", default=None)
    o.set_defaults(func=lambda a: _write(a.out, emit_ops(random_ops(np.random.default_rng(a.seed), a.n))) or 0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, UnknownSource) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
