"""Pure-Python kernel fallback.

Same contracts and iteration order as the compiled extension `_kernels`:
given CSR adjacency (indptr, indices, both int32, neighbor lists sorted),
return numpy int32 arrays.  Uses Python-int bitsets; arbitrary graph sizes.
"""

from __future__ import annotations

import numpy as np


def _bitsets(indptr, indices, n: int) -> list[int]:
    nbr = [0] * n
    buf = np.zeros(n, dtype=bool)
    for u in range(n):
        lo, hi = int(indptr[u]), int(indptr[u + 1])
        if lo == hi:
            continue
        buf[:] = False
        buf[indices[lo:hi]] = True
        nbr[u] = int.from_bytes(np.packbits(buf, bitorder="little").tobytes(),
                                "little")
    return nbr


def triangles(indptr, indices, n: int) -> np.ndarray:
    """All triangles (u, v, w) with u < v < w, lexicographic order."""
    nbr = _bitsets(indptr, indices, n)
    out: list[int] = []
    for u in range(n):
        bu = nbr[u]
        lo, hi = int(indptr[u]), int(indptr[u + 1])
        for v in indices[lo:hi]:
            v = int(v)
            if v <= u:
                continue
            m = (bu & nbr[v]) >> (v + 1)
            base = v + 1
            while m:
                lsb = m & -m
                out.extend((u, v, base + lsb.bit_length() - 1))
                m ^= lsb
    return np.array(out, dtype=np.int32).reshape(-1, 3)


def squares(indptr, indices, n: int, chordless_only: bool) -> np.ndarray:
    """Simple 4-cycles (u, v, w, x): u the minimal vertex, (u,w) a diagonal,
    v < x its neighbors.  Ordered by (u, w, v, x)."""
    nbr = _bitsets(indptr, indices, n)
    out: list[int] = []
    for u in range(n):
        hi_nbrs = nbr[u] >> (u + 1)
        if hi_nbrs.bit_count() < 2:
            continue
        cand = 0
        m = hi_nbrs
        base = u + 1
        while m:
            lsb = m & -m
            cand |= nbr[base + lsb.bit_length() - 1]
            m ^= lsb
        cand >>= u + 1
        while cand:
            lsb = cand & -cand
            w = base + lsb.bit_length() - 1
            cand ^= lsb
            if chordless_only and (nbr[u] >> w) & 1:
                continue
            common = (nbr[u] & nbr[w]) >> (u + 1)
            if common.bit_count() < 2:
                continue
            vs: list[int] = []
            mm = common
            while mm:
                l2 = mm & -mm
                vs.append(base + l2.bit_length() - 1)
                mm ^= l2
            for i, v in enumerate(vs):
                bv = nbr[v]
                for x in vs[i + 1:]:
                    if chordless_only and (bv >> x) & 1:
                        continue
                    out.extend((u, v, w, x))
    return np.array(out, dtype=np.int32).reshape(-1, 4)


def fold_dominated(indptr, indices, n: int, keep: int,
                   keep_b: int = -1) -> np.ndarray:
    """Iteratively remove vertices with dominated closed neighborhoods.

    u is removed when some current neighbor v satisfies N[u] subseteq N[v] and
    (the inclusion is proper or v < u).  Scan order: ascending u, candidates
    ascending; repeated until stable (worklist of neighbors of removals).
    Returns the (removed, dominator) pairs in removal order.  ``keep`` (and
    ``keep_b`` when >= 0) is never removed.
    """
    nbr = _bitsets(indptr, indices, n)
    alive = bytearray([1]) * n
    out: list[int] = []
    current = list(range(n))
    while current:
        touched: set[int] = set()
        for u in current:
            if u == keep or u == keep_b or not alive[u]:
                continue
            cu = nbr[u] | (1 << u)
            m = nbr[u]
            while m:
                lsb = m & -m
                v = lsb.bit_length() - 1
                m ^= lsb
                if v == u:
                    continue
                cv = nbr[v] | (1 << v)
                if cu & ~cv == 0 and (cu != cv or v < u):
                    out.extend((u, v))
                    alive[u] = 0
                    mm = nbr[u]
                    while mm:
                        l2 = mm & -mm
                        w = l2.bit_length() - 1
                        mm ^= l2
                        nbr[w] &= ~(1 << u)
                        touched.add(w)
                    nbr[u] = 0
                    break
        current = sorted(w for w in touched if alive[w])
    return np.array(out, dtype=np.int32).reshape(-1, 2)
