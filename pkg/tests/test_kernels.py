from __future__ import annotations

import itertools

import numpy as np
import pytest

from thetapi import _kernels_py
from thetapi.kernels import backend_name
from thetapi.spaces import FiniteMetricSpace
from thetapi.theta_graph import build_graph

try:
    from thetapi import _kernels as _compiled
except ImportError:  # pragma: no cover - compiled extension optional
    _compiled = None

needs_compiled = pytest.mark.skipif(
    _compiled is None, reason="compiled kernel extension not built"
)


def _random_graph(rng, n, p):
    """CSR adjacency of a G(n, p) graph, plus its edge set."""
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.uniform() < p]
    nbrs = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    indptr = np.zeros(n + 1, dtype=np.int64)
    flat = []
    for i, ns in enumerate(nbrs):
        ns.sort()
        flat.extend(ns)
        indptr[i + 1] = len(flat)
    indices = np.array(flat, dtype=np.int32)
    return indptr, indices, set(edges)


def _brute_triangles(n, edges):
    return sorted(
        (a, b, c)
        for a, b, c in itertools.combinations(range(n), 3)
        if (a, b) in edges and (b, c) in edges and (a, c) in edges
    )


def _brute_squares(n, edges, chordless_only):
    out = []
    for u, v, w, x in itertools.permutations(range(n), 4):
        # canonical labelling: u smallest, v < x (two traversal directions)
        if u != min(u, v, w, x) or v > x:
            continue
        if not ((u, v) in edges or (v, u) in edges):
            continue
        if not ((v, w) in edges or (w, v) in edges):
            continue
        if not ((w, x) in edges or (x, w) in edges):
            continue
        if not ((x, u) in edges or (u, x) in edges):
            continue
        if chordless_only:
            if (u, w) in edges or (w, u) in edges:
                continue
            if (v, x) in edges or (x, v) in edges:
                continue
        out.append((u, v, w, x))
    return sorted(out)


def test_pure_triangles_against_itertools(rng):
    for _ in range(40):
        n = int(rng.integers(3, 14))
        indptr, indices, edges = _random_graph(rng, n, 0.45)
        got = _kernels_py.triangles(indptr, indices, n)
        want = _brute_triangles(n, edges)
        assert [tuple(r) for r in got] == want


@pytest.mark.parametrize("chordless", [False, True])
def test_pure_squares_against_itertools(rng, chordless):
    for _ in range(40):
        n = int(rng.integers(4, 12))
        indptr, indices, edges = _random_graph(rng, n, 0.4)
        got = _kernels_py.squares(indptr, indices, n, chordless)
        want = _brute_squares(n, edges, chordless)
        assert sorted(tuple(r) for r in got) == want


def test_pure_fold_keeps_basepoint(rng):
    for _ in range(30):
        n = int(rng.integers(2, 15))
        indptr, indices, _ = _random_graph(rng, n, 0.5)
        keep = int(rng.integers(0, n))
        pairs = _kernels_py.fold_dominated(indptr, indices, n, keep)
        removed = {int(r) for r, _ in pairs}
        assert keep not in removed
        assert len(removed) == len(pairs)  # each vertex removed at most once
        keep_b = int(rng.integers(0, n))
        pairs2 = _kernels_py.fold_dominated(indptr, indices, n, keep, keep_b)
        removed2 = {int(r) for r, _ in pairs2}
        assert keep not in removed2 and keep_b not in removed2


@needs_compiled
def test_backends_agree_random(rng):
    for _ in range(60):
        n = int(rng.integers(2, 40))
        p = float(rng.uniform(0.05, 0.7))
        indptr, indices, _ = _random_graph(rng, n, p)
        keep = int(rng.integers(0, n))
        for fn, args in [
            ("triangles", (indptr, indices, n)),
            ("squares", (indptr, indices, n, False)),
            ("squares", (indptr, indices, n, True)),
            ("fold_dominated", (indptr, indices, n, keep)),
        ]:
            a = getattr(_compiled, fn)(*args)
            b = getattr(_kernels_py, fn)(*args)
            assert np.array_equal(np.asarray(a), np.asarray(b)), fn


@needs_compiled
def test_backends_agree_on_neighborhood_graphs(rng):
    for _ in range(15):
        n = int(rng.integers(5, 30))
        pts = rng.uniform(-1, 1, size=(n, 2))
        sp = FiniteMetricSpace.from_points(pts)
        theta = float(rng.uniform(0.2, 1.2))
        g = build_graph(sp, theta)
        for fn, args in [
            ("triangles", (g.indptr, g.indices, n)),
            ("squares", (g.indptr, g.indices, n, True)),
            ("fold_dominated", (g.indptr, g.indices, n, sp.basepoint)),
        ]:
            a = getattr(_compiled, fn)(*args)
            b = getattr(_kernels_py, fn)(*args)
            assert np.array_equal(np.asarray(a), np.asarray(b)), fn


def test_empty_and_tiny_graphs():
    indptr = np.zeros(2, dtype=np.int64)
    indices = np.zeros(0, dtype=np.int32)
    assert len(_kernels_py.triangles(indptr, indices, 1)) == 0
    assert len(_kernels_py.squares(indptr, indices, 1, True)) == 0
    assert len(_kernels_py.fold_dominated(indptr, indices, 1, 0)) == 0


def test_fold_collapses_clique():
    # complete graph on 6 vertices folds to just the kept vertex
    n = 6
    nbrs = [[v for v in range(n) if v != u] for u in range(n)]
    indptr = np.array([0] + list(np.cumsum([len(x) for x in nbrs])),
                      dtype=np.int64)
    indices = np.array([v for ns in nbrs for v in ns], dtype=np.int32)
    pairs = _kernels_py.fold_dominated(indptr, indices, n, 2)
    removed = sorted(int(r) for r, _ in pairs)
    # ties go to the smaller index, so vertex 0 survives alongside keep=2;
    # the remaining core is a single edge (contractible)
    assert removed == [1, 3, 4, 5]
    if _compiled is not None:
        pairs_c = _compiled.fold_dominated(indptr, indices, n, 2)
        assert np.array_equal(np.asarray(pairs_c), np.asarray(pairs))


def test_backend_name_reports():
    assert backend_name() in {"compiled", "python"}
