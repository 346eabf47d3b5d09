"""Discrete paths at a scale, grid homotopies, and polyline discretization.

A theta-path is a finite point sequence whose consecutive distances stay
within the scale.  Homotopy between theta-paths is certified by a rectangular
grid of points that is theta-Lipschitz along both rows and columns; the first
and last rows must be lazifications (stutter expansions) of the two paths.
Everything here is plain data plus an independent verifier, so certificates
can be produced by one component and checked by another.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import pairwise
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .spaces import FiniteMetricSpace, PolylinePath
from .theta_graph import SpanningTree


@dataclass(frozen=True)
class ThetaPath:
    """A path in ``space`` at scale ``theta``: consecutive distances <= theta."""

    space: FiniteMetricSpace
    theta: float
    points: tuple[int, ...]

    @property
    def start(self) -> int:
        return self.points[0]

    @property
    def end(self) -> int:
        return self.points[-1]

    @property
    def is_closed(self) -> bool:
        return self.points[0] == self.points[-1]

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:  # pragma: no cover
        return (f"ThetaPath(theta={self.theta!r}, len={len(self.points)}, "
                f"closed={self.is_closed})")


def make_path(space: FiniteMetricSpace, theta: float,
              points: Iterable[int]) -> ThetaPath:
    """Construct and validate a theta-path."""
    p = ThetaPath(space, float(theta), tuple(int(x) for x in points))
    validate_path(p)
    return p


def validate_path(path: ThetaPath) -> None:
    """Raise ValidationError at the first violation (index and distance)."""
    pts = path.points
    if len(pts) < 1:
        raise ValidationError("path must contain at least one point")
    n = path.space.n
    for i, p in enumerate(pts):
        if not (0 <= p < n):
            raise ValidationError(f"point index {p} at position {i} is out of "
                                  f"range for a space with {n} points")
    for i, (a, b) in enumerate(pairwise(pts)):
        d = path.space.distance(a, b)
        if d > path.theta:
            raise ValidationError(
                f"step {i} -> {i + 1} has distance {d:.9g} > theta="
                f"{path.theta:.9g} (points {a}, {b})")


def lazify(path: ThetaPath, reindex: Sequence[int]) -> ThetaPath:
    """Precompose with a monotone surjective reindexing.

    ``reindex`` maps new positions to old ones; it must start at 0, end at
    ``len(path) - 1``, and advance by 0 or 1 at each step.
    """
    f = [int(x) for x in reindex]
    if not f or f[0] != 0 or f[-1] != len(path.points) - 1:
        raise ValidationError("reindex must start at 0 and end at the last "
                              "position of the path")
    for a, b in pairwise(f):
        if b - a not in (0, 1):
            raise ValidationError(
                f"reindex must be monotone and surjective; saw step {a}->{b}")
    return ThetaPath(path.space, path.theta,
                     tuple(path.points[i] for i in f))


def delazify(path: ThetaPath) -> ThetaPath:
    """Remove repeated consecutive points (the canonical tight representative)."""
    return ThetaPath(path.space, path.theta, _dedup(path.points))


def _dedup(points: Sequence[int]) -> tuple[int, ...]:
    out = [points[0]]
    for p in points[1:]:
        if p != out[-1]:
            out.append(p)
    return tuple(out)


def _is_lazification(row: Sequence[int], base: Sequence[int]) -> bool:
    """Whether ``row`` equals ``base`` precomposed with some monotone surjection."""
    if not row or not base or row[0] != base[0]:
        return False
    i = 0
    for p in row[1:]:
        if i + 1 < len(base) and p == base[i + 1]:
            i += 1
        elif p != base[i]:
            return False
    return i == len(base) - 1


def concat(p: ThetaPath, q: ThetaPath) -> ThetaPath:
    """Concatenate paths with matching scale and endpoint."""
    if p.space.space_hash() != q.space.space_hash():
        raise ValidationError("cannot concatenate paths over different spaces")
    if p.theta != q.theta:
        raise ValidationError(
            f"cannot concatenate paths at different scales "
            f"({p.theta!r} vs {q.theta!r})")
    if p.points[-1] != q.points[0]:
        raise ValidationError(
            f"concatenation needs matching endpoints; got {p.points[-1]} "
            f"and {q.points[0]}")
    return ThetaPath(p.space, p.theta, p.points + q.points[1:])


def invert(p: ThetaPath) -> ThetaPath:
    """The reversed path."""
    return ThetaPath(p.space, p.theta, tuple(reversed(p.points)))


# ---------------------------------------------------------------------------
# Grid homotopies


@dataclass(frozen=True)
class GridHomotopy:
    """A homotopy certificate: a grid of point indices, one path per row.

    Adjacent entries along rows and along columns must be within ``theta``.
    With ``endpoints_fixed`` the two endpoint columns are constant (homotopy
    rel endpoints); otherwise every row must be a closed path (free homotopy
    of loops, basepoint allowed to move).
    """

    space: FiniteMetricSpace
    theta: float
    rows: tuple[tuple[int, ...], ...]
    endpoints_fixed: bool = True

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __repr__(self) -> str:  # pragma: no cover
        return (f"GridHomotopy(theta={self.theta!r}, rows={len(self.rows)}, "
                f"width={self.width}, endpoints_fixed={self.endpoints_fixed})")


@dataclass
class VerificationReport:
    """Result of checking a grid homotopy; ``failures`` lists violations in
    the order found, capped, each with a kind and grid position."""

    ok: bool
    failures: list[dict]
    rows: int = 0
    width: int = 0

    def first_failure(self) -> dict | None:
        return self.failures[0] if self.failures else None


def verify_grid_homotopy(h: GridHomotopy,
                         from_path: ThetaPath | None = None,
                         to_path: ThetaPath | None = None,
                         *, max_failures: int = 20) -> VerificationReport:
    """Check a certificate independently of how it was produced.

    Validates grid shape, point ranges, row and column steps against
    ``h.theta``, the endpoint policy, and (when given) that the first/last
    rows are lazifications of ``from_path``/``to_path``.
    """
    failures: list[dict] = []

    def fail(**kw) -> bool:
        failures.append(kw)
        return len(failures) >= max_failures

    rows = h.rows
    if not rows:
        fail(kind="shape", detail="certificate has no rows")
        return VerificationReport(False, failures)
    width = len(rows[0])
    if width < 1:
        fail(kind="shape", detail="rows must be nonempty")
        return VerificationReport(False, failures)
    n = h.space.n
    done = False
    for k, row in enumerate(rows):
        if len(row) != width:
            done = fail(kind="shape", row=k,
                        detail=f"row {k} has width {len(row)} != {width}")
            if done:
                break
            continue
        for j, p in enumerate(row):
            if not (0 <= p < n):
                done = fail(kind="vertex-range", row=k, col=j,
                            detail=f"point index {p} out of range")
                break
        if done:
            break
    if failures:
        # malformed grids make the positional step checks meaningless
        return VerificationReport(False, failures, rows=len(rows),
                                  width=width)
    dist = h.space.distance
    if not done:
        for k, row in enumerate(rows):
            for j in range(width - 1):
                d = dist(row[j], row[j + 1])
                if d > h.theta:
                    done = fail(kind="row-step", row=k, col=j, distance=d)
                    if done:
                        break
            if done:
                break
    if not done:
        for k in range(len(rows) - 1):
            for j in range(width):
                d = dist(rows[k][j], rows[k + 1][j])
                if d > h.theta:
                    done = fail(kind="column-step", row=k, col=j, distance=d)
                    if done:
                        break
            if done:
                break
    if not done:
        if h.endpoints_fixed:
            for k, row in enumerate(rows):
                if row[0] != rows[0][0] or row[-1] != rows[0][-1]:
                    done = fail(kind="moving-endpoint", row=k,
                                detail=f"row {k} endpoints ({row[0]}, {row[-1]}) "
                                       f"differ from row 0")
                    if done:
                        break
        else:
            for k, row in enumerate(rows):
                if row[0] != row[-1]:
                    done = fail(kind="row-not-closed", row=k)
                    if done:
                        break
    for side, path, row in (("from", from_path, rows[0]),
                            ("to", to_path, rows[-1])):
        if done or path is None:
            continue
        if path.space.space_hash() != h.space.space_hash():
            done = fail(kind=f"{side}-mismatch",
                        detail=f"{side} path lives in a different space")
            continue
        if path.theta > h.theta:
            done = fail(kind=f"{side}-mismatch",
                        detail=f"{side} path scale {path.theta!r} exceeds "
                               f"certificate scale {h.theta!r}")
            continue
        if not _is_lazification(row, path.points):
            done = fail(kind=f"{side}-mismatch",
                        detail=f"boundary row is not a lazification of the "
                               f"{side} path")
    return VerificationReport(not failures, failures, rows=len(rows),
                              width=width)


# ---------------------------------------------------------------------------
# Words from loops


def loop_to_word(path: ThetaPath, tree: SpanningTree) -> tuple[int, ...]:
    """Write a loop based at the tree root as a word in the presentation
    generators (the non-tree edges).

    Letter ``+(g+1)`` means generator ``g`` traversed from its smaller to its
    larger endpoint; negative letters are the reverse.  Tree edges and stays
    contribute nothing.  The word is returned unreduced.
    """
    graph = tree.graph
    pts = path.points
    if pts[0] != pts[-1]:
        raise ValidationError("loop_to_word requires a closed path")
    if pts[0] != tree.root:
        raise ValidationError(
            f"loop must be based at the tree root {tree.root}, got {pts[0]}")
    gen_index = generator_index(tree)
    word: list[int] = []
    for i, (a, b) in enumerate(pairwise(pts)):
        if a == b:
            continue
        if not graph.has_edge(a, b):
            raise ValidationError(
                f"step {i} ({a} -> {b}) is not an edge at theta="
                f"{graph.theta:.9g}")
        if tree.is_tree_edge(a, b):
            continue
        key = (a, b) if a < b else (b, a)
        g = gen_index[key]
        word.append(g + 1 if a < b else -(g + 1))
    return tuple(word)


def generator_index(tree: SpanningTree) -> dict[tuple[int, int], int]:
    """Index of non-tree edges (u, v) with u < v, cached on the tree."""
    idx = getattr(tree, "_generator_index", None)
    if idx is None:
        idx = {(int(u), int(v)): k
               for k, (u, v) in enumerate(tree.non_tree_edges)}
        tree._generator_index = idx  # type: ignore[attr-defined]
    return idx


# ---------------------------------------------------------------------------
# Polyline discretization


def discretize_positions(poly: PolylinePath, theta: float,
                         *, subdivide: float = 1.0) -> np.ndarray:
    """Arc-length breakpoints: every polyline vertex, plus enough equally
    spaced points inside each segment to keep sub-arcs <= theta * subdivide."""
    if theta <= 0.0 or not math.isfinite(theta):
        raise ValidationError(f"theta must be positive, got {theta!r}")
    if not (0.0 < subdivide <= 1.0):
        raise ValidationError("subdivide must lie in (0, 1]")
    step = theta * subdivide
    cl = poly.cumlen
    pos: list[float] = [0.0]
    for k in range(len(cl) - 1):
        a, b = float(cl[k]), float(cl[k + 1])
        seg = b - a
        if seg <= 0.0:
            continue
        m = max(1, math.ceil(seg / step - 1e-12))
        for j in range(1, m):
            pos.append(a + seg * j / m)
        pos.append(b)
    return np.array(pos, dtype=float)


def _space_from_samples(coords: np.ndarray,
                        metadata: dict) -> tuple[FiniteMetricSpace, list[int]]:
    """Deduplicate exactly repeated sample coordinates into one space,
    returning the per-sample point ids."""
    seen: dict[tuple, int] = {}
    unique: list[np.ndarray] = []
    ids: list[int] = []
    for row in coords:
        key = tuple(round(float(x), 12) for x in row)
        k = seen.get(key)
        if k is None:
            k = len(unique)
            seen[key] = k
            unique.append(row)
        ids.append(k)
    space = FiniteMetricSpace.from_points(np.array(unique), basepoint=0,
                                          metadata=metadata)
    return space, ids


def discretize(poly: PolylinePath, theta: float,
               snap: FiniteMetricSpace | None = None,
               *, snap_tol: float | None = None,
               subdivide: float = 1.0) -> ThetaPath:
    """Sample the polyline into a theta-path.

    Without ``snap`` the samples themselves become a fresh space (basepoint =
    first sample) and the result is valid at ``theta`` since chords never
    exceed arcs.  With ``snap`` every sample must lie within ``snap_tol``
    (default ``theta / 2``) of a point of the given space; ties go to the
    smallest point id, and the returned path declares the padded scale
    ``theta + 2 * snap_tol`` which the snapped steps are guaranteed to meet.
    """
    pos = discretize_positions(poly, theta, subdivide=subdivide)
    coords = np.array([poly.point_at(float(s)) for s in pos])
    if snap is None:
        space, ids = _space_from_samples(
            coords, {"source": "discretize", "theta": float(theta)})
        path = ThetaPath(space, _step_scale(space, [ids], float(theta)),
                         tuple(ids))
        validate_path(path)
        return path
    if snap.coords is None:
        raise ValidationError("snap space must carry coordinates")
    if coords.shape[1] != snap.coords.shape[1]:
        raise ValidationError(
            f"polyline dimension {coords.shape[1]} does not match snap space "
            f"dimension {snap.coords.shape[1]}")
    tol = float(theta) / 2.0 if snap_tol is None else float(snap_tol)
    if tol < 0.0:
        raise ValidationError("snap_tol must be nonnegative")
    ids = []
    worst = (-1.0, -1)
    for k, c in enumerate(coords):
        d = np.linalg.norm(snap.coords - c[None, :], axis=1)
        j = int(np.argmin(d))
        move = float(d[j])
        if move > worst[0]:
            worst = (move, k)
        ids.append(j)
    if worst[0] > tol:
        raise ValidationError(
            f"snap failed: sample {worst[1]} is {worst[0]:.9g} away from the "
            f"nearest cloud point (tolerance {tol:.9g})")
    path = ThetaPath(snap, _step_scale(snap, [ids], float(theta) + 2.0 * tol),
                     tuple(ids))
    validate_path(path)
    return path


def _step_scale(space: FiniteMetricSpace, rows: Sequence[Sequence[int]],
                theta: float) -> float:
    """The declared scale: ``theta``, nudged up to the largest realized step
    when floating-point rounding pushes a chord an ulp past it."""
    worst = theta
    for row in rows:
        for a, b in pairwise(row):
            d = space.distance(a, b)
            if d > worst:
                worst = d
    if worst > theta * (1.0 + 1e-9):
        raise ValidationError(
            f"realized step {worst:.9g} exceeds theta={theta:.9g} by more "
            f"than rounding slack")
    return worst


def refinement_certificate(
        poly: PolylinePath, theta: float,
        *, subdivide_a: float = 1.0, subdivide_b: float = 0.7,
) -> tuple[FiniteMetricSpace, ThetaPath, ThetaPath, GridHomotopy]:
    """Two independent discretizations of one polyline plus the certificate
    connecting them.

    Both sample grids are pushed into one shared space together with their
    common refinement; the middle certificate row is the refinement and the
    outer rows are the coarse paths reindexed onto it (column steps are
    bounded by the coarse sub-arc lengths, hence by theta).
    """
    pos_a = discretize_positions(poly, theta, subdivide=subdivide_a)
    pos_b = discretize_positions(poly, theta, subdivide=subdivide_b)
    pos_u = np.unique(np.concatenate([pos_a, pos_b]))
    coords = np.array([poly.point_at(float(s)) for s in pos_u])
    space, ids_u = _space_from_samples(
        coords, {"source": "refinement_certificate", "theta": float(theta)})

    def locate(positions: np.ndarray) -> list[int]:
        out = np.searchsorted(pos_u, positions)
        if not np.allclose(pos_u[out], positions, rtol=0.0, atol=0.0):
            raise ValidationError("breakpoint alignment failed")
        return [int(x) for x in out]

    at_a = locate(pos_a)
    at_b = locate(pos_b)
    row_a = tuple(ids_u[at_a[int(np.searchsorted(pos_a, s, side="right")) - 1]]
                  for s in pos_u)
    row_b = tuple(ids_u[at_b[int(np.searchsorted(pos_b, s, side="right")) - 1]]
                  for s in pos_u)
    row_u = tuple(ids_u)
    cols = [tuple(row[j] for row in (row_a, row_u, row_b))
            for j in range(len(row_u))]
    scale = _step_scale(space, [row_a, row_u, row_b, *cols], float(theta))
    path_a = ThetaPath(space, scale, tuple(ids_u[k] for k in at_a))
    path_b = ThetaPath(space, scale, tuple(ids_u[k] for k in at_b))
    cert = GridHomotopy(space, scale, (row_a, row_u, row_b),
                        endpoints_fixed=True)
    return space, path_a, path_b, cert


# ---------------------------------------------------------------------------
# Serialization


def path_to_json(path: ThetaPath) -> dict:
    return {
        "kind": "theta_path",
        "theta": path.theta,
        "points": list(path.points),
        "closed": path.is_closed,
        "space_hash": path.space.space_hash(),
    }


def path_from_json(data: dict, space: FiniteMetricSpace,
                   *, validate: bool = True) -> ThetaPath:
    if data.get("kind") != "theta_path":
        raise ValidationError("not a theta-path record")
    if data.get("space_hash") != space.space_hash():
        raise ValidationError("path was recorded over a different space "
                              "(hash mismatch)")
    p = ThetaPath(space, float(data["theta"]),
                  tuple(int(x) for x in data["points"]))
    if validate:
        validate_path(p)
    return p


def homotopy_to_json(h: GridHomotopy) -> dict:
    return {
        "kind": "grid_homotopy",
        "theta": h.theta,
        "endpoints_fixed": h.endpoints_fixed,
        "rows": [list(r) for r in h.rows],
        "space_hash": h.space.space_hash(),
    }


def homotopy_from_json(data: dict, space: FiniteMetricSpace) -> GridHomotopy:
    if data.get("kind") != "grid_homotopy":
        raise ValidationError("not a grid-homotopy record")
    if data.get("space_hash") != space.space_hash():
        raise ValidationError("certificate was recorded over a different "
                              "space (hash mismatch)")
    return GridHomotopy(space, float(data["theta"]),
                        tuple(tuple(int(x) for x in r) for r in data["rows"]),
                        endpoints_fixed=bool(data["endpoints_fixed"]))


def save_path(path: ThetaPath, fh: IO[str]) -> None:
    json.dump(path_to_json(path), fh, indent=2, sort_keys=True)
    fh.write("\n")


def load_path(fh: IO[str], space: FiniteMetricSpace) -> ThetaPath:
    return path_from_json(json.load(fh), space)


def save_homotopy(h: GridHomotopy, fh: IO[str]) -> None:
    json.dump(homotopy_to_json(h), fh, indent=2, sort_keys=True)
    fh.write("\n")


def load_homotopy(fh: IO[str], space: FiniteMetricSpace) -> GridHomotopy:
    return homotopy_from_json(json.load(fh), space)
