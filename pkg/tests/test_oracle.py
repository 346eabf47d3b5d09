from __future__ import annotations

import math

import numpy as np
import pytest

from thetapi.errors import ValidationError
from thetapi.oracle import (
    brute_force_cells,
    brute_force_h1,
    compare_all_scales,
    compare_at_scale,
)
from thetapi.presentation import AbelianInvariants
from thetapi.scale_maps import analyze_scale
from thetapi.spaces import FiniteMetricSpace, gen_circle


def test_brute_force_cells_square():
    sp = FiniteMetricSpace.from_points(
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    edges, tris, sqs = brute_force_cells(sp, 1.0)
    assert edges == [(0, 1), (0, 3), (1, 2), (2, 3)]
    assert tris == []
    assert sqs == [(0, 1, 2, 3)]
    edges, tris, sqs = brute_force_cells(sp, 2.0)
    assert len(edges) == 6
    assert len(tris) == 4
    assert len(sqs) == 3  # the three 4-cycles of K4


def test_brute_force_cells_size_limit():
    sp = FiniteMetricSpace.from_points(np.random.default_rng(0)
                                       .uniform(size=(65, 2)))
    with pytest.raises(ValidationError, match="limited"):
        brute_force_cells(sp, 0.5)


@pytest.mark.parametrize("n,theta_rank", [
    (3, 0), (4, 0), (5, 1), (8, 1), (12, 1),
])
def test_brute_force_ngons(n, theta_rank):
    sp = gen_circle(1.0, n)
    side = 2 * math.sin(math.pi / n)
    nxt = 2 * math.sin(2 * math.pi / n) if n > 4 else 2.0
    theta = (side + min(nxt, 2.0)) / 2 if n > 3 else 1.9
    inv = brute_force_h1(sp, theta)
    assert inv == AbelianInvariants(theta_rank, ())


def test_brute_force_square_fills_immediately():
    # a 4-cycle is itself a filled cell, so the square never shows a class
    sp = gen_circle(1.0, 4)
    assert brute_force_h1(sp, 1.5).rank == 0
    assert brute_force_h1(sp, 2.0).rank == 0
    # the pentagon, by contrast, holds a class until its chords appear
    pent = gen_circle(1.0, 5)
    side = 2 * math.sin(math.pi / 5)
    chord = 2 * math.sin(2 * math.pi / 5)
    assert brute_force_h1(pent, (side + chord) / 2).rank == 1
    assert brute_force_h1(pent, chord * 1.01).rank == 0


def test_brute_force_component_restriction():
    # two separate triangles; only the basepoint component counts
    pts = [[0, 0], [1, 0], [0.5, 0.8],
           [10, 0], [11, 0], [10.5, 0.8]]
    sp = FiniteMetricSpace.from_points(pts)
    inv0 = brute_force_h1(sp, 1.2, basepoint=0)
    inv3 = brute_force_h1(sp, 1.2, basepoint=3)
    assert inv0 == inv3 == AbelianInvariants(0, ())


def test_compare_at_scale_reports():
    sp = gen_circle(1.0, 6)
    rep = compare_at_scale(sp, 1.05)
    assert rep["agree"] is True
    assert rep["pipeline"] == rep["brute_force"] == "Z"
    assert rep["theta"] == 1.05


def test_compare_all_scales_runs_every_critical_scale(rng):
    pts = rng.uniform(-1, 1, size=(6, 2))
    sp = FiniteMetricSpace.from_points(pts)
    from thetapi.theta_graph import critical_scales

    reps = compare_all_scales(sp)
    assert len(reps) == len(critical_scales(sp))
    assert all(r["agree"] for r in reps)


def test_pipeline_matches_brute_force_random(rng):
    # the central cross-check, on many tiny instances at every critical scale
    for _ in range(40):
        n = int(rng.integers(3, 8))
        dim = int(rng.integers(1, 4))
        pts = rng.uniform(-1, 1, size=(n, dim))
        sp = FiniteMetricSpace.from_points(pts)
        for rep in compare_all_scales(sp):
            assert rep["agree"], rep


def test_pipeline_matches_brute_force_structured():
    for sp, theta in [
        (gen_circle(1.0, 8), 0.9),
        (gen_circle(1.0, 8), 1.5),
        (gen_circle(2.0, 12), 1.2),
        (FiniteMetricSpace.from_matrix(
            [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]), 1.0),
    ]:
        pipeline = analyze_scale(sp, theta).invariants
        brute = brute_force_h1(sp, theta)
        assert pipeline == brute
