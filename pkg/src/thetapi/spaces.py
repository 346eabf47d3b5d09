"""Finite metric spaces, polyline curves, example-space generators, file I/O.

A :class:`FiniteMetricSpace` is a finite point set with a distance function,
backed either by coordinates under a named metric (``euclidean``, ``l1``,
``linf``), by an explicit distance matrix, or by a product structure (distance
= sum of per-factor distances).  Distances are served row-wise through numpy so
neighborhood-graph construction stays vectorized without materializing huge
matrices.

All generators are deterministic: same parameters, same points in the same
order.  Index 0 is always the distinguished basepoint of the construction.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

TAU_METRIC = 1e-9  # absolute tolerance for metric-axiom checks

_METRICS = ("euclidean", "l1", "linf")


def _metric_rows(coords: np.ndarray, i: int, metric: str) -> np.ndarray:
    diff = coords - coords[i]
    if metric == "euclidean":
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if metric == "l1":
        return np.abs(diff).sum(axis=1)
    if metric == "linf":
        return np.abs(diff).max(axis=1)
    raise ValidationError(f"unknown metric {metric!r}")


@dataclass
class FiniteMetricSpace:
    """A finite metric space with a distinguished basepoint.

    Construct through :meth:`from_points`, :meth:`from_matrix`, or a generator;
    the raw constructor is internal.
    """

    n: int
    basepoint: int = 0
    coords: np.ndarray | None = None
    metric: str | None = None
    metadata: dict = field(default_factory=dict)
    _matrix: np.ndarray | None = None
    _factors: list[np.ndarray] | None = None
    _factor_index: np.ndarray | None = None  # n x n_factors index decomposition
    _hash: str | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_points(cls, points, metric: str = "euclidean", basepoint: int = 0,
                    metadata: dict | None = None) -> "FiniteMetricSpace":
        coords = np.asarray(points, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] == 0:
            raise ValidationError("points must be a non-empty N x d array")
        if not np.isfinite(coords).all():
            raise ValidationError("points contain non-finite coordinates")
        if metric not in _METRICS:
            raise ValidationError(f"metric must be one of {_METRICS}, got {metric!r}")
        n = coords.shape[0]
        if not 0 <= basepoint < n:
            raise ValidationError(f"basepoint {basepoint} out of range for {n} points")
        return cls(n=n, basepoint=basepoint, coords=coords, metric=metric,
                   metadata=dict(metadata or {}))

    @classmethod
    def from_matrix(cls, matrix, basepoint: int = 0,
                    metadata: dict | None = None) -> "FiniteMetricSpace":
        """Build from an explicit distance matrix, validating the metric axioms
        (symmetry, zero diagonal, nonnegativity, triangle inequality) to
        absolute tolerance ``TAU_METRIC``."""
        D = np.asarray(matrix, dtype=float)
        validate_metric_matrix(D)
        n = D.shape[0]
        if not 0 <= basepoint < n:
            raise ValidationError(f"basepoint {basepoint} out of range for {n} points")
        return cls(n=n, basepoint=basepoint, _matrix=D, metadata=dict(metadata or {}))

    # -- distances -----------------------------------------------------------

    def distance_row(self, i: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[i]
        if self._factors is not None:
            idx = self._factor_index
            row = np.zeros(self.n)
            for k, Dk in enumerate(self._factors):
                row += Dk[idx[i, k]][idx[:, k]]
            return row
        return _metric_rows(self.coords, i, self.metric)

    def distance(self, i: int, j: int) -> float:
        return float(self.distance_row(i)[j])

    def distance_matrix(self) -> np.ndarray:
        """Materialize the full matrix (guarded against absurd sizes)."""
        if self._matrix is not None:
            return self._matrix
        if self.n * self.n > 64_000_000:
            raise ValidationError(
                f"refusing to materialize a {self.n}x{self.n} distance matrix")
        return np.vstack([self.distance_row(i) for i in range(self.n)])

    def subspace(self, indices, basepoint: int = 0) -> "FiniteMetricSpace":
        """Induced metric space on a subset of points (new indexing)."""
        idx = list(indices)
        if self.coords is not None:
            return FiniteMetricSpace(
                n=len(idx), basepoint=basepoint, coords=self.coords[idx],
                metric=self.metric, metadata={"subspace_of": self.space_hash()})
        sub = self.distance_matrix()[np.ix_(idx, idx)]
        return FiniteMetricSpace(
            n=len(idx), basepoint=basepoint, _matrix=sub,
            metadata={"subspace_of": self.space_hash()})

    # -- identity ------------------------------------------------------------

    def space_hash(self) -> str:
        if self._hash is None:
            h = hashlib.sha256()
            if self.coords is not None:
                h.update(b"coords:" + (self.metric or "").encode())
                h.update(np.round(self.coords, 12).tobytes())
            elif self._factors is not None:
                h.update(b"product")
                for Dk in self._factors:
                    h.update(np.round(Dk, 12).tobytes())
            else:
                h.update(b"matrix")
                h.update(np.round(self._matrix, 12).tobytes())
            h.update(f":b{self.basepoint}".encode())
            self._hash = h.hexdigest()
        return self._hash

    def __repr__(self):
        kind = ("coords" if self.coords is not None
                else "product" if self._factors is not None else "matrix")
        return f"FiniteMetricSpace(n={self.n}, kind={kind}, basepoint={self.basepoint})"


def validate_metric_matrix(D: np.ndarray) -> None:
    """Raise ValidationError unless D is a metric to tolerance TAU_METRIC."""
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
        raise ValidationError("distance matrix must be square and non-empty")
    if not np.isfinite(D).all():
        raise ValidationError("distance matrix contains non-finite entries")
    n = D.shape[0]
    bad = np.abs(np.diagonal(D)) > TAU_METRIC
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(f"nonzero diagonal entry d({i},{i}) = {D[i, i]!r}")
    asym = np.abs(D - D.T)
    if asym.max() > TAU_METRIC:
        i, j = np.unravel_index(int(np.argmax(asym)), D.shape)
        raise ValidationError(
            f"asymmetric entries d({i},{j})={D[i, j]!r} vs d({j},{i})={D[j, i]!r}")
    if D.min() < -TAU_METRIC:
        i, j = np.unravel_index(int(np.argmin(D)), D.shape)
        raise ValidationError(f"negative distance d({i},{j}) = {D[i, j]!r}")
    for k in range(n):
        slack = D - (D[:, k][:, None] + D[k, :][None, :])
        if slack.max() > TAU_METRIC:
            i, j = np.unravel_index(int(np.argmax(slack)), D.shape)
            raise ValidationError(
                "triangle inequality violated: "
                f"d({i},{j})={D[i, j]!r} > d({i},{k})+d({k},{j})="
                f"{D[i, k] + D[k, j]!r} (witness triple ({i},{k},{j}))")


def validate_space(space: FiniteMetricSpace) -> None:
    """Re-run the from_matrix axioms on a space's realized distance matrix."""
    validate_metric_matrix(space.distance_matrix())


# ---------------------------------------------------------------------------
# Polylines


class PolylinePath:
    """A piecewise-linear curve given by its vertices, parametrized by arc
    length.  ``closed`` requires first vertex == last vertex."""

    def __init__(self, vertices, closed: bool = False):
        v = np.asarray(vertices, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 2:
            raise ValidationError("polyline needs at least 2 vertices")
        if not np.isfinite(v).all():
            raise ValidationError("polyline has non-finite coordinates")
        if closed and not np.array_equal(v[0], v[-1]):
            raise ValidationError("closed polyline must repeat its first vertex last")
        self.vertices = v
        self.closed = bool(closed)
        seg = np.sqrt(((v[1:] - v[:-1]) ** 2).sum(axis=1))
        self.cumlen = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.cumlen[-1])

    def point_at(self, s: float) -> np.ndarray:
        """Point at arc-length parameter s (clamped to [0, length])."""
        s = min(max(s, 0.0), self.length)
        k = int(np.searchsorted(self.cumlen, s, side="right") - 1)
        k = min(k, len(self.vertices) - 2)
        seg = self.cumlen[k + 1] - self.cumlen[k]
        t = 0.0 if seg == 0 else (s - self.cumlen[k]) / seg
        return (1 - t) * self.vertices[k] + t * self.vertices[k + 1]

    def vertex_positions(self) -> np.ndarray:
        """Arc-length positions of the polyline vertices."""
        return self.cumlen.copy()


# ---------------------------------------------------------------------------
# Generators


def _dedupe(points: list[tuple]) -> np.ndarray:
    seen: dict[tuple, int] = {}
    out = []
    for p in points:
        key = tuple(round(c, 9) for c in p)
        if key not in seen:
            seen[key] = len(out)
            out.append(p)
    return np.array(out, dtype=float)


def _segment_points(a, b, spacing: float, include_ends: bool = True) -> list[tuple]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(b - a))
    steps = max(1, math.ceil(length / spacing))
    ts = range(0, steps + 1) if include_ends else range(1, steps)
    return [tuple(a + (b - a) * (t / steps)) for t in ts]


def gen_circle(radius: float, count: int, center=(0.0, 0.0)) -> FiniteMetricSpace:
    """Evenly sampled circle; point 0 at angle 0 (rightmost)."""
    if radius <= 0:
        raise ValidationError("radius must be positive")
    if count < 1:
        raise ValidationError("count must be >= 1")
    cx, cy = center
    ang = 2 * math.pi * np.arange(count) / count
    pts = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])
    return FiniteMetricSpace.from_points(
        pts, metadata={"generator": "circle",
                       "params": {"radius": radius, "count": count,
                                  "center": list(center)}})


def gen_hawaiian_earring(n_circles: int, samples=None,
                         spacing: float = 0.05) -> FiniteMetricSpace:
    """Circles of radius 1/k centred at (1/k, 0), k = 1..n_circles, all tangent
    at the origin.  The origin is sampled once and is the basepoint."""
    if n_circles < 1:
        raise ValidationError("n_circles must be >= 1")
    if samples is None:
        samples = [max(8, math.ceil(2 * math.pi / (k * spacing)))
                   for k in range(1, n_circles + 1)]
    samples = list(samples)
    if len(samples) != n_circles or any(s < 8 for s in samples):
        raise ValidationError("samples must give >= 8 points for each circle")
    pts: list[tuple] = []
    for k in range(1, n_circles + 1):
        r = 1.0 / k
        m = samples[k - 1]
        start = 0 if k == 1 else 1  # angle pi (the origin) only sampled once
        for j in range(start, m):
            a = math.pi + 2 * math.pi * j / m
            pts.append((r + r * math.cos(a), r * math.sin(a)))
    coords = _dedupe(pts)
    return FiniteMetricSpace.from_points(
        coords, metadata={"generator": "hawaiian_earring",
                          "params": {"n_circles": n_circles, "samples": samples,
                                     "spacing": spacing}})


def gen_telescope(n_stages: int, samples_per_ring: int = 8, spokes: bool = True,
                  spacing: float = 0.05) -> FiniteMetricSpace:
    """Telescoping tower of cylindrical shells.

    Stage n (radius 2^-n) spans x in [n, n+1], sampled as rings of
    ``samples_per_ring`` points.  With ``spokes=True`` each stage also gets the
    mid-cylinder octagon at half radius, the 8 connecting spokes, and base
    wheels (center + 8 radial lines) closing the shells at x = 0..n_stages, so
    consecutive stages stay connected at fine scales.  With ``spokes=False``
    only the rings are produced.

    Basepoint: index 0 = leftmost ring point (0, 1, 0).
    """
    if n_stages < 1:
        raise ValidationError("n_stages must be >= 1")
    if samples_per_ring < 8:
        raise ValidationError("samples_per_ring must be >= 8")
    if spacing <= 0:
        raise ValidationError("spacing must be positive")
    m = samples_per_ring
    pts: list[tuple] = []
    ring_count = math.ceil(1.0 / spacing) + 1
    if ring_count % 2 == 0:
        ring_count += 1  # keep the x = n + 1/2 ring exactly
    spoke_angles = [k * math.pi / 4 for k in range(8)]
    for n in range(n_stages):
        R = 2.0 ** (-n)
        for i in range(ring_count):
            x = n + i / (ring_count - 1)
            for k in range(m):
                a = 2 * math.pi * k / m
                pts.append((x, R * math.cos(a), R * math.sin(a)))
        if spokes:
            xm = n + 0.5
            for a in spoke_angles:
                # mid ring gets the spoke angles even if m is not a multiple of 8
                pts.append((xm, R * math.cos(a), R * math.sin(a)))
                pts.append((xm, R / 2 * math.cos(a), R / 2 * math.sin(a)))
                cnt = max(1, math.ceil((R / 2) / spacing))
                for j in range(1, cnt):
                    r = R - j * (R / 2) / cnt
                    pts.append((xm, r * math.cos(a), r * math.sin(a)))
    if spokes:
        wheel_specs = [(0.0, 1.0)] + [(float(n + 1), 2.0 ** (-n)) for n in range(n_stages)]
        for x, R in wheel_specs:
            pts.append((x, 0.0, 0.0))
            cnt = 2 * max(1, math.ceil(R / (2 * spacing)))  # even: hits R/2 exactly
            for a in spoke_angles:
                for j in range(1, cnt + 1):
                    r = j * R / cnt
                    pts.append((x, r * math.cos(a), r * math.sin(a)))
    coords = _dedupe(pts)
    return FiniteMetricSpace.from_points(
        coords, metadata={"generator": "telescope",
                          "params": {"n_stages": n_stages,
                                     "samples_per_ring": samples_per_ring,
                                     "spokes": spokes, "spacing": spacing}})


PRODUCT_POINT_CAP = 100_000


def gen_circle_product(n_factors: int, samples=None,
                       cap: int = PRODUCT_POINT_CAP) -> FiniteMetricSpace:
    """Product of circles of radius 2^-n (n = 0..n_factors-1) with the sum
    metric: distance = sum of per-factor chordal distances, exactly."""
    if n_factors < 1:
        raise ValidationError("n_factors must be >= 1")
    if samples is None:
        samples = [12] * n_factors
    samples = [int(s) for s in samples]
    if len(samples) != n_factors or any(s < 3 for s in samples):
        raise ValidationError("need >= 3 samples for each factor")
    total = math.prod(samples)
    if total > cap:
        raise ValidationError(
            f"product would have {total} points, exceeding the cap of {cap}")
    factors = []
    for n, mn in enumerate(samples):
        r = 2.0 ** (-n)
        ang = 2 * math.pi * np.arange(mn) / mn
        xy = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
        diff = xy[:, None, :] - xy[None, :, :]
        factors.append(np.sqrt((diff ** 2).sum(axis=2)))
    idx = np.zeros((total, n_factors), dtype=np.int64)
    strides = []
    s = total
    for mn in samples:
        s //= mn
        strides.append(s)
    ar = np.arange(total)
    for k, mn in enumerate(samples):
        idx[:, k] = (ar // strides[k]) % mn
    space = FiniteMetricSpace(
        n=total, basepoint=0, _factors=factors, _factor_index=idx,
        metadata={"generator": "circle_product",
                  "params": {"n_factors": n_factors, "samples": samples}})
    return space


def gen_hawaiian_window(depth: int, spacing: float = 0.05) -> FiniteMetricSpace:
    """Square window [-1,1]^2 with central crosses added recursively to the
    left-most subsquares, ``depth`` generations deep.  Basepoint (1, -1)."""
    if depth < 0:
        raise ValidationError("depth must be >= 0")
    segments: list[tuple[tuple, tuple]] = [
        ((1, -1), (1, 1)), ((1, 1), (-1, 1)),
        ((-1, 1), (-1, -1)), ((-1, -1), (1, -1)),
    ]
    frontier = [(-1.0, -1.0, 2.0)]  # (x0, y0, size)
    for _ in range(depth):
        nxt = []
        for x0, y0, s in frontier:
            h = s / 2
            segments.append(((x0, y0 + h), (x0 + s, y0 + h)))
            segments.append(((x0 + h, y0), (x0 + h, y0 + s)))
            nxt.extend([(x0, y0, h), (x0, y0 + h, h)])  # left-most children
        frontier = nxt
    pts: list[tuple] = []
    for a, b in segments:
        pts.extend(_segment_points(a, b, spacing))
    coords = _dedupe(pts)
    return FiniteMetricSpace.from_points(
        coords, metadata={"generator": "hawaiian_window",
                          "params": {"depth": depth, "spacing": spacing}})


def gen_sine_space(variant: str = "flat", resolution: float = 0.05) -> FiniteMetricSpace:
    """Topologist's-sine-curve style spaces.

    ``flat``: graph of sin(1/x) on [resolution, 1], the segment I from (0,1) to
    (0,-1), and a quarter-ellipse arc joining (1, sin 1) back to (0,1).
    ``three_squares``: surface z = sin(pi/x) over [resolution,1] x [-1,1]
    joined by the square A in the x=0 plane and side squares B1, B2 in the
    y = +-1 planes.  Basepoint: first point of the joining structure.
    """
    if resolution <= 0 or resolution >= 1:
        raise ValidationError("resolution must be in (0, 1)")
    if variant == "flat":
        pts: list[tuple] = []
        pts.extend(_segment_points((0.0, 1.0), (0.0, -1.0), resolution))
        n_arc = math.ceil((math.pi / 2) / resolution)
        s1 = math.sin(1.0)
        for t in np.linspace(math.pi / 2, 0.0, n_arc + 1):
            pts.append((math.cos(t), s1 + (1 - s1) * math.sin(t)))
        x = 1.0
        pts.append((x, math.sin(1 / x)))
        while x > resolution:
            slope = -math.cos(1 / x) / (x * x)
            dx = resolution / math.sqrt(1 + slope * slope)
            x = max(x - dx, resolution)
            pts.append((x, math.sin(1 / x)))
        coords = _dedupe(pts)
        meta = {"generator": "sine_space",
                "params": {"variant": variant, "resolution": resolution,
                           "x_min": resolution, "arc": "quarter_ellipse"}}
        return FiniteMetricSpace.from_points(coords, metadata=meta)
    if variant == "three_squares":
        pts = []
        grid = np.arange(-1.0, 1.0 + resolution / 2, resolution)
        for y in grid:            # square A at x = 0
            for z in grid:
                pts.append((0.0, y, z))
        xgrid = np.arange(0.0, 1.0 + resolution / 2, resolution)
        for s in (-1.0, 1.0):     # side squares B1, B2 at y = +-1
            for x in xgrid:
                for z in grid:
                    pts.append((x, s, z))
        xs = [1.0]
        x = 1.0
        while x > resolution:     # oscillating sheet z = sin(pi/x)
            slope = -math.pi * math.cos(math.pi / x) / (x * x)
            dx = resolution / math.sqrt(1 + slope * slope)
            x = max(x - dx, resolution)
            xs.append(x)
        for x in xs:
            z = math.sin(math.pi / x)
            for y in grid:
                pts.append((x, y, z))
        coords = _dedupe(pts)
        meta = {"generator": "sine_space",
                "params": {"variant": variant, "resolution": resolution,
                           "x_min": resolution}}
        return FiniteMetricSpace.from_points(coords, metadata=meta)
    raise ValidationError(f"unknown variant {variant!r}")


def gen_annulus(r_in: float, r_out: float, spacing: float = 0.05) -> FiniteMetricSpace:
    """Concentric rings filling the annulus r_in <= r <= r_out."""
    if not (0 < r_in < r_out):
        raise ValidationError("need 0 < r_in < r_out")
    if spacing <= 0:
        raise ValidationError("spacing must be positive")
    n_r = max(2, math.ceil((r_out - r_in) / spacing) + 1)
    pts: list[tuple] = []
    for r in np.linspace(r_in, r_out, n_r):
        count = max(8, math.ceil(2 * math.pi * r / spacing))
        for k in range(count):
            a = 2 * math.pi * k / count
            pts.append((r * math.cos(a), r * math.sin(a)))
    coords = _dedupe(pts)
    return FiniteMetricSpace.from_points(
        coords, metadata={"generator": "annulus",
                          "params": {"r_in": r_in, "r_out": r_out,
                                     "spacing": spacing}})


def gen_circle_tree(n_levels: int, spacing: float = 0.05) -> FiniteMetricSpace:
    """Stacked unit circles at heights 0..n_levels-1; level n carries the 2^n
    points at angles 2*pi*(k+1/2)/2^n, each joined by sampled segments to its
    two closest points one level up.  A tree as a continuum."""
    if n_levels < 1:
        raise ValidationError("n_levels must be >= 1")
    levels: list[list[tuple]] = []
    for n in range(n_levels):
        ring = []
        for k in range(2 ** n):
            a = 2 * math.pi * (k + 0.5) / (2 ** n)
            ring.append((math.cos(a), math.sin(a), float(n)))
        levels.append(ring)
    pts: list[tuple] = []
    for n, ring in enumerate(levels):
        pts.extend(ring)
        if n + 1 < n_levels:
            for k, p in enumerate(ring):
                for j in (2 * k, 2 * k + 1):  # the two closest above
                    pts.extend(_segment_points(p, levels[n + 1][j], spacing,
                                               include_ends=False))
    coords = _dedupe(pts)
    return FiniteMetricSpace.from_points(
        coords, metadata={"generator": "circle_tree",
                          "params": {"n_levels": n_levels, "spacing": spacing}})


GENERATORS = {
    "circle": gen_circle,
    "hawaiian_earring": gen_hawaiian_earring,
    "telescope": gen_telescope,
    "circle_product": gen_circle_product,
    "hawaiian_window": gen_hawaiian_window,
    "sine_space": gen_sine_space,
    "annulus": gen_annulus,
    "circle_tree": gen_circle_tree,
}


# ---------------------------------------------------------------------------
# File formats


def _sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def save_space(space: FiniteMetricSpace, path) -> None:
    """Write a point cloud (header x1..xd) or, for matrix-backed spaces, a
    headerless N x N distance matrix; metadata goes to a JSON sidecar."""
    p = Path(path)
    if space.coords is not None:
        d = space.coords.shape[1]
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{k + 1}" for k in range(d)])
            for row in space.coords:
                w.writerow([f"{v:.17g}" for v in row])
        kind = "cloud"
    else:
        D = space.distance_matrix()
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in D:
                w.writerow([f"{v:.17g}" for v in row])
        kind = "matrix"
    meta = {
        "kind": kind,
        "metric": space.metric,
        "basepoint": space.basepoint,
        "generator": space.metadata.get("generator"),
        "params": space.metadata.get("params"),
    }
    _sidecar_path(p).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_space(path) -> FiniteMetricSpace:
    """Read a point-cloud CSV (header row) or distance-matrix CSV (numeric
    first cell).  The sidecar, when present, supplies metric and basepoint."""
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"no such file: {p}")
    meta = {}
    sp = _sidecar_path(p)
    if sp.exists():
        try:
            meta = json.loads(sp.read_text())
        except json.JSONDecodeError as e:
            raise ValidationError(f"unreadable sidecar {sp}: {e}") from e
    with open(p, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValidationError(f"empty file: {p}")
    first = rows[0][0].strip()
    try:
        float(first)
        has_header = False
    except ValueError:
        has_header = True
    basepoint = int(meta.get("basepoint") or 0)
    extra = {k: meta[k] for k in ("generator", "params") if meta.get(k) is not None}
    if has_header:
        try:
            data = np.array([[float(x) for x in r] for r in rows[1:]])
        except ValueError as e:
            raise ValidationError(f"malformed point cloud {p}: {e}") from e
        if data.size == 0:
            raise ValidationError(f"point cloud {p} has a header but no points")
        metric = meta.get("metric") or "euclidean"
        return FiniteMetricSpace.from_points(data, metric=metric,
                                             basepoint=basepoint, metadata=extra)
    try:
        data = np.array([[float(x) for x in r] for r in rows])
    except ValueError as e:
        raise ValidationError(f"malformed matrix {p}: {e}") from e
    space = FiniteMetricSpace.from_matrix(data, basepoint=basepoint, metadata=extra)
    return space


def save_polyline(poly: PolylinePath, path) -> None:
    p = Path(path)
    d = poly.vertices.shape[1]
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k + 1}" for k in range(d)])
        for row in poly.vertices:
            w.writerow([f"{v:.17g}" for v in row])


def load_polyline(path) -> PolylinePath:
    """Load a polyline CSV; it is closed iff first vertex == last vertex."""
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"no such file: {p}")
    with open(p, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 3:
        raise ValidationError(f"polyline {p} needs a header and >= 2 vertices")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]])
    except ValueError as e:
        raise ValidationError(f"malformed polyline {p}: {e}") from e
    closed = bool(np.array_equal(data[0], data[-1]))
    return PolylinePath(data, closed=closed)
