"""Brute-force first homology for small spaces, used as a cross-check.

Everything here is computed straight from the distance matrix with
``itertools.combinations``: edges, filled triangles, and filled 4-cycles
become boundary matrices, and the homology is read off from integer kernels
and Smith normal forms.  No neighborhood graphs, spanning trees, foldings,
or group presentations are involved, so agreement with the presentation
pipeline is a meaningful end-to-end check rather than a tautology.
"""

from __future__ import annotations

from itertools import combinations

from .errors import ValidationError
from .intlinalg import reference_snf_diagonal, smith_normal_form
from .presentation import AbelianInvariants
from .spaces import FiniteMetricSpace

__all__ = ["brute_force_h1", "brute_force_cells", "compare_at_scale",
           "compare_all_scales"]

_SIZE_LIMIT = 64


def brute_force_cells(space: FiniteMetricSpace, theta: float):
    """Edges, triangles, and simple 4-cycles at the scale, by enumeration.

    Edges are pairs (u, v) with u < v; triangles are fully connected
    vertex triples; 4-cycles are listed once per undirected cycle as
    (a, b, c, d) meaning a-b-c-d-a, chords allowed.
    """
    n = space.n
    if n > _SIZE_LIMIT:
        raise ValidationError(
            f"brute-force enumeration is limited to {_SIZE_LIMIT} points, "
            f"got {n}")
    adj = [[space.distance(u, v) <= theta for v in range(n)]
           for u in range(n)]
    edges = [(u, v) for u, v in combinations(range(n), 2) if adj[u][v]]
    triangles = [(u, v, w) for u, v, w in combinations(range(n), 3)
                 if adj[u][v] and adj[u][w] and adj[v][w]]
    squares = []
    for quad in combinations(range(n), 4):
        a = quad[0]
        for b, c, d in ((quad[1], quad[2], quad[3]),
                        (quad[1], quad[3], quad[2]),
                        (quad[2], quad[1], quad[3])):
            if adj[a][b] and adj[b][c] and adj[c][d] and adj[d][a]:
                squares.append((a, b, c, d))
    return edges, triangles, squares


def brute_force_h1(space: FiniteMetricSpace, theta: float,
                   basepoint: int | None = None) -> AbelianInvariants:
    """First homology of the basepoint component from boundary matrices.

    The integer kernel of the edge boundary is extracted from a Smith
    normal form; the filled-cell boundaries are rewritten in kernel
    coordinates and their elementary-operations diagonal gives rank and
    torsion of the quotient.
    """
    if basepoint is None:
        basepoint = space.basepoint
    edges, triangles, squares = brute_force_cells(space, theta)

    # Restrict to the basepoint component (union-find over the edges).
    parent = list(range(space.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    comp = find(basepoint)
    verts = sorted(v for v in range(space.n) if find(v) == comp)
    vid = {v: i for i, v in enumerate(verts)}
    edges = [e for e in edges if find(e[0]) == comp]
    eid = {e: i for i, e in enumerate(edges)}
    triangles = [t for t in triangles if find(t[0]) == comp]
    squares = [s for s in squares if find(s[0]) == comp]

    if not edges:
        return AbelianInvariants(0)

    # d1: vertices x edges, column e_uv = v - u.
    d1 = [[0] * len(edges) for _ in verts]
    for j, (u, v) in enumerate(edges):
        d1[vid[u]][j] -= 1
        d1[vid[v]][j] += 1
    _, diag, _, w = smith_normal_form(d1, want_inverse=True)
    r = sum(1 for i in range(min(len(verts), len(edges)))
            if diag[i][i] != 0)
    k = len(edges) - r  # dimension of the cycle lattice

    def oriented(a: int, b: int) -> tuple[int, int]:
        return (eid[(a, b)], 1) if a < b else (eid[(b, a)], -1)

    # Cell boundaries as edge chains, then in kernel coordinates: the
    # coordinate vector of a cycle c is the tail of V^-1 c (the head is
    # forced to zero because D has nonzero pivots there).
    relations = []
    for cell in triangles + squares:
        chain = [0] * len(edges)
        m = len(cell)
        for i in range(m):
            j, sign = oriented(cell[i], cell[(i + 1) % m])
            chain[j] += sign
        coords = [sum(w[i][j] * chain[j] for j in range(len(edges)))
                  for i in range(len(edges))]
        for i in range(r):
            if coords[i] != 0:
                raise ValidationError(
                    "cell boundary escaped the cycle lattice")
        relations.append(coords[r:])

    if not relations or k == 0:
        return AbelianInvariants(k)
    rel_diag = reference_snf_diagonal(relations)
    nonzero = [d for d in rel_diag if d != 0]
    torsion = tuple(d for d in nonzero if d != 1)
    return AbelianInvariants(k - len(nonzero), torsion)


def compare_at_scale(space: FiniteMetricSpace, theta: float,
                     basepoint: int | None = None) -> dict:
    """Presentation-pipeline invariants vs brute force at one scale."""
    from .scale_maps import analyze_scale

    pipeline = analyze_scale(space, theta, basepoint).invariants
    brute = brute_force_h1(space, theta, basepoint)
    return {
        "theta": float(theta),
        "pipeline": str(pipeline),
        "brute_force": str(brute),
        "agree": pipeline == brute,
    }


def compare_all_scales(space: FiniteMetricSpace,
                       basepoint: int | None = None) -> list[dict]:
    """Run the comparison at every critical scale of the space."""
    from .theta_graph import critical_scales

    return [compare_at_scale(space, t, basepoint)
            for t in critical_scales(space)]
