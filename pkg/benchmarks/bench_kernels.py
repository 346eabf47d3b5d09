#!/usr/bin/env python3
"""Benchmark the compiled graph kernels against the pure-Python fallback.

Builds neighborhood graphs for a few representative point clouds, times
triangle/square enumeration and domination folding on both backends, and
checks that the outputs are identical.

Run:  python3 benchmarks/bench_kernels.py [--sizes 200,400,800]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from thetapi import _kernels_py as pure
from thetapi.spaces import gen_annulus, gen_circle
from thetapi.theta_graph import build_graph

try:
    from thetapi import _kernels as compiled
except ImportError:  # pragma: no cover - compiled extension not built
    compiled = None


def _time(fn, *args, repeat: int = 3) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_graph(name: str, graph) -> None:
    args = (graph.indptr, graph.indices, graph.n)
    jobs = [
        ("triangles", args, {}),
        ("squares", args + (False,), {}),
        ("fold_dominated", args + (0,), {}),
    ]
    print(f"\n{name}: {graph.n} vertices, {graph.num_edges} edges")
    for fname, a, kw in jobs:
        tp, rp = _time(getattr(pure, fname), *a, **kw)
        if compiled is None:
            print(f"  {fname:>14}: pure {tp * 1e3:8.2f} ms   (no extension)")
            continue
        tc, rc = _time(getattr(compiled, fname), *a, **kw)
        same = np.array_equal(rp, rc)
        ratio = tp / tc if tc > 0 else float("inf")
        print(f"  {fname:>14}: pure {tp * 1e3:8.2f} ms   compiled "
              f"{tc * 1e3:8.2f} ms   speedup {ratio:6.1f}x   "
              f"match={'yes' if same else 'NO'}")
        if not same:
            raise SystemExit(f"backend outputs differ for {fname} on {name}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="200,400,800",
                    help="comma-separated circle sample counts")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]

    if compiled is None:
        print("compiled extension not importable; timing pure backend only")

    for n in sizes:
        space = gen_circle(1.0, n)
        # Scale chosen to give each vertex ~20 neighbors.
        theta = 2.0 * np.sin(np.pi / n) * 10.5
        bench_graph(f"circle(n={n})", build_graph(space, theta))

    space = gen_annulus(1.0, 2.0, 0.08)
    bench_graph(f"annulus({space.n} pts)", build_graph(space, 0.17))


if __name__ == "__main__":
    main()
