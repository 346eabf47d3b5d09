from __future__ import annotations

import io
import math

import numpy as np
import pytest

from thetapi.errors import ValidationError
from thetapi.spaces import FiniteMetricSpace, gen_circle
from thetapi.theta_graph import (
    build_graph,
    components,
    critical_scales,
    fold_graph,
    short_cycles,
    spanning_tree,
    square_cells,
    triangle_cells,
    write_dot,
    write_edges_csv,
)


@pytest.fixture
def unit_square_space():
    return FiniteMetricSpace.from_points(
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_build_graph_inclusive_threshold(unit_square_space):
    # edges require d <= theta (inclusive)
    g = build_graph(unit_square_space, 0.999)
    assert g.num_edges == 0
    g = build_graph(unit_square_space, 1.0)
    assert g.num_edges == 4
    assert g.has_edge(0, 1) and g.has_edge(0, 3)
    assert not g.has_edge(0, 2)
    g = build_graph(unit_square_space, 2.0)
    assert g.num_edges == 6  # K4
    g = build_graph(unit_square_space, 0.0)
    assert g.num_edges == 0


def test_build_graph_rejects_bad_theta(unit_square_space):
    with pytest.raises(ValidationError):
        build_graph(unit_square_space, -1.0)
    with pytest.raises(ValidationError):
        build_graph(unit_square_space, float("nan"))
    with pytest.raises(ValidationError):
        build_graph(unit_square_space, float("inf"))


def test_graph_accessors(unit_square_space):
    g = build_graph(unit_square_space, 1.2)
    assert g.n == 4
    assert list(g.neighbors(0)) == [1, 3]
    assert g.degree(2) == 2
    lens = g.edge_lengths()
    assert np.allclose(lens, 1.0)
    # edges sorted lexicographically with u < v
    assert [tuple(e) for e in g.edges] == [(0, 1), (0, 3), (1, 2), (2, 3)]


def test_k4_cell_counts(unit_square_space):
    g = build_graph(unit_square_space, 2.0)
    tris = triangle_cells(g)
    assert [tuple(r) for r in tris] == [(0, 1, 2), (0, 1, 3), (0, 2, 3),
                                        (1, 2, 3)]
    sqs = square_cells(g)
    # K4 has three 4-cycles, all chorded
    assert len(sqs) == 3
    assert len(square_cells(g, chordless_only=True)) == 0
    cyc = short_cycles(g)
    assert len(cyc) == 7


def test_square_cells_canonical_form(unit_square_space):
    g = build_graph(unit_square_space, 1.2)
    sqs = square_cells(g, chordless_only=True)
    assert [tuple(r) for r in sqs] == [(0, 1, 2, 3)]
    u, v, w, x = sqs[0]
    assert u == min(sqs[0]) and v < x


def test_components_split_and_merge():
    sp = FiniteMetricSpace.from_points(
        [[0.0, 0.0], [0.5, 0.0], [10.0, 0.0], [10.5, 0.0]])
    g = build_graph(sp, 1.0)
    assert components(g) == [[0, 1], [2, 3]]
    g = build_graph(sp, 20.0)
    assert components(g) == [[0, 1, 2, 3]]


def test_spanning_tree_structure():
    sp = gen_circle(1.0, 8)
    side = 2 * math.sin(math.pi / 8)
    g = build_graph(sp, side * 1.01)
    t = spanning_tree(g, 0)
    assert t.parent[0] == -1
    assert len(t.component) == 8
    # cycle graph: exactly one non-tree edge
    assert t.non_tree_edges.shape == (1, 2)
    # BFS depths on an 8-cycle from 0: max depth 4
    assert int(t.depth.max()) == 4
    p = t.path_from_root(3)
    assert p[0] == 0 and p[-1] == 3
    for a, b in zip(p, p[1:]):
        assert g.has_edge(a, b)


def test_spanning_tree_out_of_component():
    sp = FiniteMetricSpace.from_points([[0.0, 0.0], [5.0, 0.0]])
    g = build_graph(sp, 1.0)
    t = spanning_tree(g, 0)
    assert not t.in_component(1)
    with pytest.raises(ValidationError):
        t.path_from_root(1)


def test_critical_scales_circle():
    sp = gen_circle(1.0, 6)
    crit = critical_scales(sp)
    assert crit == sorted(crit)
    # hexagon: side, short diagonal, diameter.  The scales are exact float
    # distances, so "equal" chords may split into clusters a few ulps wide.
    want = [2 * math.sin(math.pi / 6), 2 * math.sin(2 * math.pi / 6), 2.0]
    for w in want:
        assert any(abs(c - w) < 1e-9 for c in crit)
    for c in crit:
        assert any(abs(c - w) < 1e-9 for w in want)


def test_critical_scales_positive_and_distinct(rng):
    pts = rng.uniform(-1, 1, size=(10, 2))
    sp = FiniteMetricSpace.from_points(pts)
    crit = critical_scales(sp)
    assert all(c > 0 for c in crit)
    assert all(a < b for a, b in zip(crit, crit[1:]))
    # graph edge count only changes at critical scales
    eps = 1e-12
    for c in crit[:4]:
        below = build_graph(sp, c * (1 - 1e-9) + eps).num_edges
        above = build_graph(sp, c * (1 + 1e-9)).num_edges
        assert above > below


def test_fold_retraction_properties(rng):
    for _ in range(10):
        pts = rng.uniform(-1, 1, size=(20, 2))
        sp = FiniteMetricSpace.from_points(pts)
        g = build_graph(sp, 0.8)
        fr = fold_graph(g, 0)
        assert fr.alive[0]
        # retraction is idempotent and lands on alive vertices
        r = fr.retraction
        assert np.array_equal(r[r], r)
        assert fr.alive[r].all()
        # surviving vertices map to themselves
        for v in np.flatnonzero(fr.alive):
            assert r[v] == v
        # core keeps vertex ids; removed vertices become isolated
        assert fr.core.n == fr.graph.n
        for v in np.flatnonzero(~fr.alive):
            assert fr.core.degree(int(v)) == 0
        for u, v in fr.core.edges:
            assert fr.alive[u] and fr.alive[v]
            assert fr.graph.has_edge(int(u), int(v))


def test_fold_project_path_is_edge_path():
    sp = gen_circle(1.0, 12)
    extra = np.vstack([sp.coords, [[0.9, 0.05]]])  # a dominated hanger-on
    sp2 = FiniteMetricSpace.from_points(extra)
    side = 2 * math.sin(math.pi / 12)
    g = build_graph(sp2, side * 1.05)
    fr = fold_graph(g, 0)
    path = [0, 1, 2, 3]
    proj = fr.project_path(path)
    assert len(proj) == len(path)
    core_ids = set(int(v) for v in np.flatnonzero(fr.alive))
    assert set(proj) <= core_ids


def test_fold_keeps_second_vertex():
    sp = gen_circle(1.0, 6)
    g = build_graph(sp, 3.0)  # complete graph
    fr = fold_graph(g, 2, also_keep=5)
    assert fr.alive[2] and fr.alive[5]
    with pytest.raises(ValidationError):
        fold_graph(g, 99)


def test_write_dot_and_csv(unit_square_space):
    g = build_graph(unit_square_space, 1.2)
    buf = io.StringIO()
    write_dot(g, buf)
    text = buf.getvalue()
    assert text.startswith("graph theta_graph {")
    assert "0 -- 1" in text and text.rstrip().endswith("}")
    buf2 = io.StringIO()
    write_edges_csv(g, buf2)
    lines = buf2.getvalue().strip().splitlines()
    assert lines[0] == "u,v,dist"
    assert len(lines) == 1 + g.num_edges
    u, v, d = lines[1].split(",")
    assert (int(u), int(v)) == (0, 1)
    assert float(d) == pytest.approx(1.0)


def test_induced_subgraph(unit_square_space):
    g = build_graph(unit_square_space, 1.2)
    alive = np.array([True, True, True, False])
    sub = g.induced(alive)
    assert sub.n == g.n  # ids preserved
    assert sub.has_edge(0, 1) and sub.has_edge(1, 2)
    assert not sub.has_edge(0, 3) and not sub.has_edge(2, 3)
