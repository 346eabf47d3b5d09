from __future__ import annotations

import io
import math

import numpy as np
import pytest

from thetapi.errors import ValidationError
from thetapi.paths import (
    GridHomotopy,
    concat,
    delazify,
    discretize,
    discretize_positions,
    generator_index,
    homotopy_from_json,
    homotopy_to_json,
    invert,
    lazify,
    load_homotopy,
    load_path,
    loop_to_word,
    make_path,
    path_from_json,
    path_to_json,
    refinement_certificate,
    save_homotopy,
    save_path,
    validate_path,
    verify_grid_homotopy,
)
from thetapi.spaces import FiniteMetricSpace, PolylinePath, gen_circle
from thetapi.theta_graph import build_graph, spanning_tree


@pytest.fixture
def square_with_center():
    # unit square corners 0..3 plus center 4; corner-center = sqrt(2)/2
    return FiniteMetricSpace.from_points(
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])


@pytest.fixture
def contraction(square_with_center):
    # square loop contracted through the center
    rows = (
        (0, 1, 2, 3, 0),
        (0, 4, 4, 4, 0),
        (0, 0, 0, 0, 0),
    )
    return GridHomotopy(square_with_center, 1.0, rows)


def test_make_path_valid(square_with_center):
    p = make_path(square_with_center, 1.0, [0, 1, 2, 3, 0])
    assert p.start == p.end == 0
    assert p.is_closed
    assert len(p) == 5


def test_validate_path_rejects(square_with_center):
    with pytest.raises(ValidationError, match="out of range"):
        make_path(square_with_center, 1.0, [0, 9])
    with pytest.raises(ValidationError, match="distance"):
        make_path(square_with_center, 0.9, [0, 1])
    with pytest.raises(ValidationError, match="at least one"):
        make_path(square_with_center, 1.0, [])
    # single point is a valid (constant) path
    p = make_path(square_with_center, 1.0, [3])
    assert not p.is_closed or p.start == p.end


def test_lazify_and_delazify(square_with_center):
    p = make_path(square_with_center, 1.0, [0, 1, 2])
    lz = lazify(p, [0, 0, 1, 1, 1, 2])
    assert lz.points == (0, 0, 1, 1, 1, 2)
    validate_path(lz)
    assert delazify(lz).points == p.points
    with pytest.raises(ValidationError):
        lazify(p, [1, 2])          # must start at 0
    with pytest.raises(ValidationError):
        lazify(p, [0, 1])          # must end at the last position
    with pytest.raises(ValidationError):
        lazify(p, [0, 2, 2])       # jump of 2
    with pytest.raises(ValidationError):
        lazify(p, [0, 1, 0, 1, 2])  # not monotone


def test_concat_and_invert(square_with_center):
    p = make_path(square_with_center, 1.0, [0, 1, 2])
    q = make_path(square_with_center, 1.0, [2, 3, 0])
    pq = concat(p, q)
    assert pq.points == (0, 1, 2, 3, 0)
    assert invert(p).points == (2, 1, 0)
    with pytest.raises(ValidationError, match="endpoint"):
        concat(p, make_path(square_with_center, 1.0, [0, 3]))
    with pytest.raises(ValidationError, match="scale"):
        concat(p, make_path(square_with_center, 2.0, [2, 0]))
    other = gen_circle(1.0, 5)
    with pytest.raises(ValidationError, match="different spaces"):
        concat(p, make_path(other, 1.0, [0, 0]))


def test_verify_accepts_contraction(square_with_center, contraction):
    loop = make_path(square_with_center, 1.0, [0, 1, 2, 3, 0])
    const = make_path(square_with_center, 1.0, [0])
    rep = verify_grid_homotopy(contraction, from_path=loop, to_path=const)
    assert rep.ok
    assert rep.failures == []
    assert rep.rows == 3 and rep.width == 5


def _mutated(h: GridHomotopy, r: int, c: int, val: int) -> GridHomotopy:
    rows = [list(row) for row in h.rows]
    rows[r][c] = val
    return GridHomotopy(h.space, h.theta, tuple(tuple(r_) for r_ in rows),
                        endpoints_fixed=h.endpoints_fixed)


def test_verify_rejects_each_kind(square_with_center, contraction):
    sp = square_with_center

    rep = verify_grid_homotopy(GridHomotopy(sp, 1.0, ()))
    assert not rep.ok and rep.first_failure()["kind"] == "shape"

    ragged = GridHomotopy(sp, 1.0, ((0, 1, 0), (0, 0)))
    rep = verify_grid_homotopy(ragged)
    assert not rep.ok and rep.first_failure()["kind"] == "shape"

    rep = verify_grid_homotopy(_mutated(contraction, 1, 2, 77))
    assert not rep.ok and rep.first_failure()["kind"] == "vertex-range"

    # row 1 becomes (0, 2, 4, 4, 0): step 0 -> 2 is a diagonal (sqrt 2 > 1)
    rep = verify_grid_homotopy(_mutated(contraction, 1, 1, 2))
    assert not rep.ok and rep.first_failure()["kind"] == "row-step"

    # column step: d(1, 3) = sqrt(2) between rows 0 and 1 in column 1,
    # while every row individually is a valid path
    rows = ((0, 1, 2, 3, 0), (0, 3, 4, 4, 0), (0, 0, 0, 0, 0))
    rep = verify_grid_homotopy(GridHomotopy(sp, 1.0, rows))
    assert not rep.ok
    kinds = {f["kind"] for f in rep.failures}
    assert "column-step" in kinds

    # moving endpoint
    rows = ((0, 1, 2, 3, 0), (1, 1, 4, 4, 0), (0, 0, 0, 0, 0))
    rep = verify_grid_homotopy(GridHomotopy(sp, 1.0, rows))
    assert not rep.ok
    assert any(f["kind"] == "moving-endpoint" for f in rep.failures)

    # free homotopy mode requires closed rows
    rows = ((0, 1, 2, 3, 0), (0, 1, 2, 3, 3))
    rep = verify_grid_homotopy(GridHomotopy(sp, 1.0, rows,
                                            endpoints_fixed=False))
    assert not rep.ok
    assert any(f["kind"] == "row-not-closed" for f in rep.failures)


def test_verify_boundary_row_checks(square_with_center, contraction):
    sp = square_with_center
    wrong = make_path(sp, 1.0, [0, 3, 2, 1, 0])
    rep = verify_grid_homotopy(contraction, from_path=wrong)
    assert not rep.ok and rep.first_failure()["kind"] == "from-mismatch"

    other_space = gen_circle(1.0, 5)
    alien = make_path(other_space, 1.2, [0, 1, 2])
    rep = verify_grid_homotopy(contraction, to_path=alien)
    assert not rep.ok and rep.first_failure()["kind"] == "to-mismatch"

    too_coarse = make_path(sp, 2.0, [0, 2, 0])
    rep = verify_grid_homotopy(contraction, from_path=too_coarse)
    assert not rep.ok and rep.first_failure()["kind"] == "from-mismatch"

    # lazified boundary rows are accepted
    tri = FiniteMetricSpace.from_points([[0, 0], [1, 0], [0.5, 0.8]])
    loop = make_path(tri, 1.0, [0, 1, 2, 0])
    rows = ((0, 1, 1, 2, 0), (0, 0, 0, 0, 0))
    h = GridHomotopy(tri, 1.0, rows)
    rep = verify_grid_homotopy(h, from_path=loop)
    assert rep.ok


def test_verify_failure_cap(square_with_center):
    # every row step of width 5 fails: corners alternating with antipodes
    rows = tuple((0, 2, 0, 2, 0) for _ in range(10))
    rep = verify_grid_homotopy(GridHomotopy(square_with_center, 1.0, rows),
                               max_failures=7)
    assert not rep.ok
    assert len(rep.failures) == 7


def test_loop_to_word_octagon():
    sp = gen_circle(1.0, 8)
    side = 2 * math.sin(math.pi / 8)
    g = build_graph(sp, side * 1.01)
    t = spanning_tree(g, 0)
    assert t.non_tree_edges.shape[0] == 1
    loop = make_path(sp, g.theta, [0, 1, 2, 3, 4, 5, 6, 7, 0])
    w = loop_to_word(loop, t)
    assert len(w) == 1 and abs(w[0]) == 1
    # reversed loop gives the inverse letter
    w_inv = loop_to_word(invert(loop), t)
    assert w_inv == (-w[0],)
    # stays and tree-edge backtracks contribute nothing
    idle = make_path(sp, g.theta, [0, 1, 1, 0, 0])
    assert loop_to_word(idle, t) == ()
    # lazified loop gives the same word
    lz = lazify(loop, [0, 0, 1, 2, 3, 3, 4, 5, 6, 7, 8])
    assert loop_to_word(lz, t) == w


def test_loop_to_word_rejects():
    sp = gen_circle(1.0, 8)
    side = 2 * math.sin(math.pi / 8)
    g = build_graph(sp, side * 1.01)
    t = spanning_tree(g, 0)
    open_path = make_path(sp, g.theta, [0, 1, 2])
    with pytest.raises(ValidationError, match="closed"):
        loop_to_word(open_path, t)
    offbase = make_path(sp, g.theta, [1, 2, 1])
    with pytest.raises(ValidationError, match="root"):
        loop_to_word(offbase, t)
    # a path valid at a larger scale can use non-edges of this graph
    jump = make_path(sp, 2.0, [0, 3, 0])
    with pytest.raises(ValidationError, match="not an edge"):
        loop_to_word(jump, t)


def test_generator_index_cached():
    sp = gen_circle(1.0, 8)
    g = build_graph(sp, 2 * math.sin(math.pi / 8) * 1.01)
    t = spanning_tree(g, 0)
    idx1 = generator_index(t)
    idx2 = generator_index(t)
    assert idx1 is idx2
    assert len(idx1) == t.non_tree_edges.shape[0]


def test_discretize_positions_spacing():
    poly = PolylinePath(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]))
    pos = discretize_positions(poly, 0.3)
    assert pos[0] == 0.0 and pos[-1] == pytest.approx(2.0)
    # every polyline vertex appears
    assert any(abs(p - 1.0) < 1e-12 for p in pos)
    steps = np.diff(pos)
    assert (steps <= 0.3 + 1e-12).all()
    with pytest.raises(ValidationError):
        discretize_positions(poly, 0.0)
    with pytest.raises(ValidationError):
        discretize_positions(poly, 0.3, subdivide=1.5)


def test_discretize_fresh_space():
    poly = PolylinePath(np.array([[0.0, 0.0], [2.0, 0.0]]))
    p = discretize(poly, 0.5)
    validate_path(p)
    assert p.space.coords[p.points[0]] == pytest.approx([0.0, 0.0])
    assert p.space.coords[p.points[-1]] == pytest.approx([2.0, 0.0])
    assert p.theta <= 0.5 * (1 + 1e-9)


def test_discretize_snap():
    grid = FiniteMetricSpace.from_points(
        [[x / 10, 0.0] for x in range(0, 21)])
    poly = PolylinePath(np.array([[0.0, 0.01], [2.0, 0.01]]))
    p = discretize(poly, 0.4, snap=grid)
    validate_path(p)
    assert p.space is grid
    assert p.theta == pytest.approx(0.4 + 2 * 0.2, rel=0, abs=1e-12) or \
        p.theta <= 0.4 + 2 * 0.2
    # too-tight tolerance fails
    with pytest.raises(ValidationError, match="snap failed"):
        discretize(poly, 0.4, snap=grid, snap_tol=0.001)
    # dimension mismatch
    poly3 = PolylinePath(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    with pytest.raises(ValidationError, match="dimension"):
        discretize(poly3, 0.4, snap=grid)


def test_refinement_certificate_verifies():
    rng = np.random.default_rng(7)
    pts = np.cumsum(rng.uniform(-0.4, 0.6, size=(6, 2)), axis=0)
    poly = PolylinePath(pts)
    space, pa, pb, cert = refinement_certificate(poly, 0.35)
    validate_path(pa)
    validate_path(pb)
    rep = verify_grid_homotopy(cert, from_path=pa, to_path=pb)
    assert rep.ok, rep.first_failure()
    assert cert.rows[0][0] == pa.points[0]
    assert cert.endpoints_fixed


def test_path_json_roundtrip(square_with_center, tmp_path):
    p = make_path(square_with_center, 1.0, [0, 1, 2, 3, 0])
    data = path_to_json(p)
    assert data["kind"] == "theta_path" and data["closed"]
    back = path_from_json(data, square_with_center)
    assert back.points == p.points and back.theta == p.theta

    buf = io.StringIO()
    save_path(p, buf)
    buf.seek(0)
    assert load_path(buf, square_with_center).points == p.points

    with pytest.raises(ValidationError, match="hash"):
        path_from_json(data, gen_circle(1.0, 5))
    with pytest.raises(ValidationError, match="record"):
        path_from_json({"kind": "nope"}, square_with_center)


def test_homotopy_json_roundtrip(square_with_center, contraction):
    data = homotopy_to_json(contraction)
    assert data["kind"] == "grid_homotopy"
    back = homotopy_from_json(data, square_with_center)
    assert back.rows == contraction.rows
    assert back.endpoints_fixed == contraction.endpoints_fixed

    buf = io.StringIO()
    save_homotopy(contraction, buf)
    buf.seek(0)
    again = load_homotopy(buf, square_with_center)
    assert again.rows == contraction.rows

    with pytest.raises(ValidationError, match="hash"):
        homotopy_from_json(data, gen_circle(1.0, 5))
    with pytest.raises(ValidationError, match="record"):
        homotopy_from_json({"kind": "x"}, square_with_center)
