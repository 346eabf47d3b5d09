from __future__ import annotations

import io
import math

import numpy as np
import pytest

from thetapi.errors import ValidationError
from thetapi.paths import make_path, validate_path
from thetapi.scale_maps import (
    Bar,
    ScaleMap,
    analyze_scale,
    barcode,
    barcode_to_csv,
    bars_covering,
    compose,
    induced_map,
    inverse_limit_report,
    resolve_scales,
    sweep,
)
from thetapi.spaces import (
    FiniteMetricSpace,
    gen_circle,
    gen_hawaiian_earring,
)


def octagon():
    return gen_circle(1.0, 8)


OCT_THETA = (2 * math.sin(math.pi / 8) + 2 * math.sin(2 * math.pi / 8)) / 2


def test_analyze_scale_octagon():
    an = analyze_scale(octagon(), OCT_THETA)
    assert an.invariants.rank == 1
    assert an.invariants.torsion == ()
    assert an.basepoint == 0
    assert an.theta == OCT_THETA


def test_fold_does_not_change_invariants(rng):
    for _ in range(8):
        pts = rng.uniform(-1, 1, size=(18, 2))
        sp = FiniteMetricSpace.from_points(pts)
        theta = float(rng.uniform(0.3, 0.9))
        a = analyze_scale(sp, theta, fold=True)
        b = analyze_scale(sp, theta, fold=False)
        assert a.invariants == b.invariants


def test_generator_loop_and_classes():
    an = analyze_scale(octagon(), OCT_THETA)
    g = 0
    loop = an.generator_loop(g)
    assert loop[0] == an.basepoint == loop[-1]
    p = make_path(an.space, an.theta, loop)
    validate_path(p)
    cls = an.class_of(loop)
    assert cls in ((1,), (-1,))
    # exponent-built loops add classes
    double = an.loop_from_generator_exponents([2])
    assert an.class_of(double) == (2 * cls[0],)
    inverse = an.loop_from_generator_exponents([-1])
    assert an.class_of(inverse) == (-cls[0],)
    # to_core removes stutters
    assert an.to_core([0, 0, 1, 1, 0]) == [0, 1, 0]
    # coordinate_loop represents the free basis class
    cloop = an.coordinate_loop(0)
    assert an.class_of(cloop) == (1,)


def test_word_of_ignores_stutters():
    an = analyze_scale(octagon(), OCT_THETA)
    loop = [0, 1, 2, 3, 4, 5, 6, 7, 0]
    lazified = [0, 0, 1, 2, 2, 3, 4, 5, 5, 6, 7, 0]
    assert an.word_of(loop) == an.word_of(lazified)


def test_induced_map_same_scale_is_identity():
    sp = octagon()
    m = induced_map(sp, OCT_THETA, OCT_THETA)
    assert m.dim_from == m.dim_to == 1
    assert m.matrix == ((1,),) or m.matrix == ((-1,),)
    assert m.rank() == 1 and m.kernel_rank() == 0
    assert m.apply([3]) in ((3,), (-3,))


def test_induced_map_rejects_descending():
    sp = octagon()
    with pytest.raises(ValidationError, match="smaller to larger"):
        induced_map(sp, 1.0, 0.5)


def test_induced_map_mismatched_analyses():
    sp = octagon()
    a = analyze_scale(sp, 0.8)
    b = analyze_scale(sp, 0.9)
    with pytest.raises(ValidationError, match="do not match"):
        induced_map(sp, 0.8, 1.0, analyses=(a, b))


def test_functoriality_random_clouds(rng):
    # compose(f_12, f_23) == f_13 on random clouds
    checked = 0
    for _ in range(6):
        pts = rng.uniform(-1, 1, size=(16, 2))
        sp = FiniteMetricSpace.from_points(pts)
        t1, t2, t3 = sorted(rng.uniform(0.25, 1.2, size=3))
        if t1 == t2 or t2 == t3:
            continue
        f12 = induced_map(sp, t1, t2)
        f23 = induced_map(sp, t2, t3)
        f13 = induced_map(sp, t1, t3)
        assert compose(f12, f23).matrix == f13.matrix
        checked += 1
    assert checked >= 4


def test_compose_guards():
    sp = octagon()
    f = induced_map(sp, 0.8, 0.9)
    g = induced_map(sp, 1.0, 1.1)
    with pytest.raises(ValidationError, match="chain"):
        compose(f, g)


def test_scale_map_apply_torsion_reduction():
    m = ScaleMap("h", 0, 1.0, 2.0, (), 1, (3,), 0, ((1,),), ((2,),))
    assert m.apply([2]) == (1,)  # 4 mod 3
    assert m.free_block() == []
    assert m.rank() == 0 and m.kernel_rank() == 1
    with pytest.raises(ValidationError, match="length"):
        m.apply([1, 2])


def test_resolve_scales():
    sp = gen_circle(1.0, 6)
    grid = resolve_scales(sp, "critical")
    assert grid == sorted(grid, reverse=True)
    assert len(grid) >= 3
    assert grid[0] > 2.0  # one scale above the diameter
    explicit = resolve_scales(sp, [0.5, 1.5, 0.5, 1.0])
    assert explicit == [1.5, 1.0, 0.5]
    with pytest.raises(ValidationError):
        resolve_scales(sp, "everything")
    with pytest.raises(ValidationError):
        resolve_scales(sp, [0.5, -1.0])
    with pytest.raises(ValidationError):
        resolve_scales(sp, [])


def test_sweep_octagon_tower():
    sp = octagon()
    side = 2 * math.sin(math.pi / 8)
    fill = 2 * math.sin(2 * math.pi / 8)
    grid = [2.2, (side + fill) / 2, side * 0.9]
    tower = sweep(sp, grid)
    assert len(tower) == 3
    assert list(tower.scales) == sorted(grid, reverse=True)
    ranks = [a.invariants.rank for a in tower.analyses]
    assert ranks == [0, 1, 0]  # filled, resolved, unresolved
    an = tower.analysis_at(tower.scales[1])
    assert an.theta == tower.scales[1]
    with pytest.raises(ValidationError, match="not in the tower"):
        tower.analysis_at(123.0)
    # adjacent maps line up with the grid
    for i, m in enumerate(tower.maps):
        assert m.theta_from == tower.scales[i + 1]
        assert m.theta_to == tower.scales[i]


def test_composed_map_caching_and_guards():
    sp = gen_hawaiian_earring(2, samples=[16, 10])
    tower = sweep(sp, [1.0, 0.7, 0.45])
    m1 = tower.composed_map(2, 0)
    m2 = tower.composed_map(2, 0)
    assert m1 is m2
    direct = compose(tower.maps[1], tower.maps[0])
    assert m1.matrix == direct.matrix
    with pytest.raises(ValidationError, match="identity"):
        tower.composed_map(1, 1)
    with pytest.raises(ValidationError, match="bad tower indices"):
        tower.composed_map(0, 2)
    with pytest.raises(ValidationError, match="bad tower indices"):
        tower.composed_map(5, 0)


def test_earring_tower_kernel():
    # two tangent circles, radii 1 and 1/2; the small one fills first
    sp = gen_hawaiian_earring(2, samples=[16, 10])
    tower = sweep(sp, [0.9, 0.45])
    ranks = [a.invariants.rank for a in tower.analyses]
    assert ranks == [1, 2]
    m = tower.maps[0]
    assert m.rank() == 1
    assert m.kernel_rank() == 1


def test_barcode_octagon():
    sp = octagon()
    side = 2 * math.sin(math.pi / 8)
    fill = 2 * math.sin(2 * math.pi / 8)
    mid = (side + fill) / 2
    tower = sweep(sp, [2.2, fill * 1.001, mid, side * 1.001, side * 0.9])
    bars = barcode(tower)
    assert len(bars) == 1
    bar = bars[0]
    assert bar.multiplicity == 1
    assert bar.birth == pytest.approx(side * 1.001)
    assert bar.death == pytest.approx(fill * 1.001)
    # covering counts match ranks at every grid scale
    for a in tower.analyses:
        assert bars_covering(bars, a.theta) == a.invariants.rank


def test_barcode_covering_matches_rank(rng):
    for _ in range(5):
        pts = rng.uniform(-1, 1, size=(14, 2))
        sp = FiniteMetricSpace.from_points(pts)
        grid = sorted(set(float(x) for x in rng.uniform(0.2, 1.0, size=4)),
                      reverse=True)
        if len(grid) < 2:
            continue
        tower = sweep(sp, grid)
        bars = barcode(tower)
        for a in tower.analyses:
            assert bars_covering(bars, a.theta) == a.invariants.rank


def test_barcode_csv():
    bars = [Bar(0.5, 1.5, 2), Bar(0.25, None, 1)]
    buf = io.StringIO()
    barcode_to_csv(bars, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "birth,death,multiplicity"
    assert lines[1].split(",") == ["0.5", "1.5", "2"]
    assert lines[2].split(",")[1] == "inf"


def test_inverse_limit_report_earring():
    sp = gen_hawaiian_earring(2, samples=[16, 10])
    tower = sweep(sp, [0.9, 0.45])
    rep = inverse_limit_report(tower)
    assert rep["finest_scale"] == 0.45
    assert rep["scales_descending"] == [0.9, 0.45]
    per = rep["per_scale_from_finest"]
    assert per[0]["theta"] == 0.45
    assert per[0]["surjective_from_finest"] is True
    assert per[1]["theta"] == 0.9
    assert per[1]["image_rank_from_finest"] == 1
    assert per[1]["kernel_rank_from_finest"] == 1
    assert per[1]["surjective_from_finest"] is True
    kw = per[1]["kernel_witnesses"]
    assert kw, "expected a kernel witness loop"
    assert kw[0]["maps_to_zero"] is True
    assert rep["image_ranks_from_finest"] == [2, 1]


def test_inverse_limit_report_cokernel_witness():
    # a circle that is resolvable only at the coarse scale: nothing at the
    # fine scale can hit its class, so the coarse class is a cokernel witness
    sp = gen_circle(5.0, 8)
    side = 2 * 5.0 * math.sin(math.pi / 8)
    tower = sweep(sp, [side * 1.05, 1.0])
    rep = inverse_limit_report(tower)
    per = rep["per_scale_from_finest"]
    assert per[0]["rank"] == 0
    coarse = per[1]
    assert coarse["rank"] == 1
    assert coarse["image_rank_from_finest"] == 0
    assert coarse["surjective_from_finest"] is False
    ws = coarse["cokernel_witnesses"]
    assert len(ws) == 1
    loop = ws[0]["representative_loop"]
    an = tower.analysis_at(tower.scales[0])
    assert an.class_of(loop) == (1,)
    # report is explicit about grid-only semantics
    assert "not interpolated" in rep["note"]
