"""Scale-theta neighborhood graphs on finite metric spaces.

The graph at scale theta joins two points when their distance is at most
theta.  This module builds such graphs, finds components and BFS spanning
trees, enumerates the short (3- and 4-) cycles that control the fundamental
group presentation, lists the critical scales where the graph changes, and
performs group-preserving domination folding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ValidationError
from .spaces import FiniteMetricSpace


@dataclass
class ThetaGraph:
    """Undirected neighborhood graph of ``space`` at scale ``theta``.

    ``edges`` is an (E, 2) int32 array with ``u < v`` per row, sorted
    lexicographically.  ``indptr``/``indices`` hold the CSR adjacency with
    each neighbor list ascending.
    """

    space: FiniteMetricSpace
    theta: float
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        row = self.neighbors(u)
        k = int(np.searchsorted(row, v))
        return k < row.shape[0] and int(row[k]) == v

    def edge_lengths(self) -> np.ndarray:
        return np.array(
            [self.space.distance(int(u), int(v)) for u, v in self.edges],
            dtype=float,
        )

    def induced(self, alive: np.ndarray) -> "ThetaGraph":
        """Subgraph keeping only edges with both ends alive (vertex ids are
        preserved; dropped vertices simply become isolated)."""
        if self.num_edges:
            mask = alive[self.edges[:, 0]] & alive[self.edges[:, 1]]
            edges = self.edges[mask]
        else:
            edges = self.edges
        indptr, indices = _csr_from_edges(self.n, edges)
        return ThetaGraph(self.space, self.theta, edges, indptr, indices)

    def __repr__(self) -> str:  # pragma: no cover
        return (f"ThetaGraph(n={self.n}, theta={self.theta!r}, "
                f"edges={self.num_edges})")


def _csr_from_edges(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if edges.shape[0] == 0:
        return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int32)
    u_all = np.concatenate([edges[:, 0], edges[:, 1]])
    v_all = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((v_all, u_all))
    indices = np.ascontiguousarray(v_all[order], dtype=np.int32)
    counts = np.bincount(u_all, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def build_graph(space: FiniteMetricSpace, theta: float) -> ThetaGraph:
    """Build the neighborhood graph at scale ``theta`` (edges iff d <= theta)."""
    if not (theta >= 0.0) or not np.isfinite(theta):
        raise ValidationError(f"theta must be finite and nonnegative, got {theta!r}")
    n = space.n
    ids = np.arange(n)
    us: list[np.ndarray] = []
    vs: list[np.ndarray] = []
    for i in range(n):
        row = space.distance_row(i)
        js = ids[(row <= theta) & (ids > i)]
        if js.shape[0]:
            us.append(np.full(js.shape[0], i, dtype=np.int32))
            vs.append(js.astype(np.int32))
    if us:
        edges = np.stack(
            [np.concatenate(us), np.concatenate(vs)], axis=1
        ).astype(np.int32)
    else:
        edges = np.empty((0, 2), dtype=np.int32)
    indptr, indices = _csr_from_edges(n, edges)
    return ThetaGraph(space, float(theta), edges, indptr, indices)


def components(graph: ThetaGraph) -> list[list[int]]:
    """Connected components, each a sorted vertex list, ordered by minimum."""
    n = graph.n
    seen = np.zeros(n, dtype=bool)
    comps: list[list[int]] = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                v = int(v)
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


@dataclass
class SpanningTree:
    """BFS spanning tree of the component of ``root``.

    ``parent[v]`` is the BFS parent, ``-1`` for the root itself and ``-2``
    for vertices outside the component.  ``non_tree_edges`` are the component
    edges absent from the tree, each row ``u < v``, lexicographic; they are
    the generators of the fundamental group presentation at this scale.
    """

    graph: ThetaGraph
    root: int
    parent: np.ndarray
    depth: np.ndarray
    order: np.ndarray
    non_tree_edges: np.ndarray

    @property
    def component(self) -> np.ndarray:
        return np.nonzero(self.parent != -2)[0]

    def in_component(self, v: int) -> bool:
        return int(self.parent[v]) != -2

    def is_tree_edge(self, u: int, v: int) -> bool:
        return int(self.parent[u]) == v or int(self.parent[v]) == u

    def path_from_root(self, v: int) -> list[int]:
        if not self.in_component(v):
            raise ValidationError(
                f"vertex {v} is not in the component of root {self.root}")
        out = [v]
        while int(self.parent[v]) != -1:
            v = int(self.parent[v])
            out.append(v)
        out.reverse()
        return out


def spanning_tree(graph: ThetaGraph, root: int) -> SpanningTree:
    """BFS spanning tree rooted at ``root``; children visited in ascending order."""
    n = graph.n
    if not (0 <= root < n):
        raise ValidationError(f"root {root} out of range for {n} vertices")
    parent = np.full(n, -2, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    parent[root] = -1
    depth[root] = 0
    order = [root]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in graph.neighbors(u):
            v = int(v)
            if parent[v] == -2:
                parent[v] = u
                depth[v] = depth[u] + 1
                order.append(v)
    in_comp = parent != -2
    if graph.num_edges:
        e = graph.edges
        both = in_comp[e[:, 0]] & in_comp[e[:, 1]]
        tree = (parent[e[:, 0]] == e[:, 1]) | (parent[e[:, 1]] == e[:, 0])
        non_tree = e[both & ~tree]
    else:
        non_tree = graph.edges
    return SpanningTree(graph, root, parent, depth,
                        np.array(order, dtype=np.int64), non_tree)


def triangle_cells(graph: ThetaGraph) -> np.ndarray:
    """(T, 3) array of triangles (u < v < w), lexicographic."""
    return kernels.triangles(graph.indptr, graph.indices, graph.n)


def square_cells(graph: ThetaGraph, *, chordless_only: bool = False) -> np.ndarray:
    """(S, 4) array of simple 4-cycles in canonical form.

    Canonical form lists the cycle starting at its minimal vertex, with the
    smaller of that vertex's two cycle-neighbors second; so row (u, v, w, x)
    means the cycle u-v-w-x-u with u minimal and v < x.  With
    ``chordless_only`` the 4-cycles carrying a diagonal edge are omitted
    (each of those is a consequence of its two triangles).
    """
    return kernels.squares(graph.indptr, graph.indices, graph.n, chordless_only)


def short_cycles(graph: ThetaGraph, *,
                 chordless_squares: bool = False) -> list[tuple[int, ...]]:
    """All 3-cycles then all 4-cycles, canonical forms, each block sorted."""
    tris = [tuple(map(int, row)) for row in triangle_cells(graph)]
    sqs = [tuple(map(int, row))
           for row in square_cells(graph, chordless_only=chordless_squares)]
    sqs.sort()
    return tris + sqs


def critical_scales(space: FiniteMetricSpace) -> list[float]:
    """Sorted distinct positive pairwise distances (graph-change scales)."""
    chunks = []
    for i in range(space.n - 1):
        chunks.append(space.distance_row(i)[i + 1:])
    if not chunks:
        return []
    vals = np.unique(np.concatenate(chunks))
    return [float(v) for v in vals if v > 0.0]


@dataclass
class FoldResult:
    """Outcome of domination folding at a fixed scale.

    ``pairs`` lists (removed, dominator) in removal order.  ``core`` is the
    graph induced on the surviving vertices (ids preserved).  ``retraction``
    maps every vertex to its surviving image; surviving vertices map to
    themselves.  Folding preserves the based fundamental group, so any path
    can be pushed to the core with ``project_path``.
    """

    graph: ThetaGraph
    keep: int
    pairs: np.ndarray
    core: ThetaGraph
    alive: np.ndarray
    retraction: np.ndarray

    @property
    def num_removed(self) -> int:
        return int(self.pairs.shape[0])

    def project_path(self, points: Sequence[int]) -> list[int]:
        return [int(self.retraction[p]) for p in points]


def fold_graph(graph: ThetaGraph, keep: int,
               also_keep: int | None = None) -> FoldResult:
    """Remove dominated vertices (closed neighborhood contained in a
    neighbor's) until stable, never removing ``keep`` or ``also_keep``."""
    n = graph.n
    if not (0 <= keep < n):
        raise ValidationError(f"keep vertex {keep} out of range")
    keep_b = -1 if also_keep is None else int(also_keep)
    if keep_b >= n:
        raise ValidationError(f"keep vertex {keep_b} out of range")
    pairs = kernels.fold_dominated(graph.indptr, graph.indices, n, keep,
                                   keep_b)
    alive = np.ones(n, dtype=bool)
    target = np.arange(n, dtype=np.int64)
    if pairs.shape[0]:
        alive[pairs[:, 0]] = False
        target[pairs[:, 0]] = pairs[:, 1]
        while True:
            nxt = target[target]
            if np.array_equal(nxt, target):
                break
            target = nxt
    core = graph.induced(alive) if pairs.shape[0] else graph
    return FoldResult(graph, keep, pairs, core, alive, target)


def write_dot(graph: ThetaGraph, fh: IO[str]) -> None:
    """Write the graph in DOT format; edge lengths with 6 decimals."""
    fh.write("graph theta_graph {\n")
    fh.write(f'  graph [theta="{graph.theta!r}"];\n')
    fh.write("  node [shape=point];\n")
    coords = graph.space.coords
    for v in range(graph.n):
        if coords is not None and coords.shape[1] == 2:
            fh.write(f'  {v} [pos="{coords[v, 0]:.6f},{coords[v, 1]:.6f}"];\n')
        else:
            fh.write(f"  {v};\n")
    for (u, v), d in zip(graph.edges, graph.edge_lengths()):
        fh.write(f"  {int(u)} -- {int(v)} [len={d:.6f}];\n")
    fh.write("}\n")


def write_edges_csv(graph: ThetaGraph, fh: IO[str]) -> None:
    """Write edges as CSV rows ``u,v,dist``."""
    fh.write("u,v,dist\n")
    for (u, v), d in zip(graph.edges, graph.edge_lengths()):
        fh.write(f"{int(u)},{int(v)},{d:.17g}\n")
