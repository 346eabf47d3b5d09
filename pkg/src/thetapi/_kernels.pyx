# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels.

Same contracts and iteration order as the pure-Python fallback
``_kernels_py``: given CSR adjacency (indptr, indices, neighbor lists
sorted), return numpy int32 arrays.  Bitsets are uint64 words.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint64_t

cdef extern from *:
    """
    #if defined(_MSC_VER)
    #include <intrin.h>
    static inline int thetapi_ctz64(unsigned long long x)
    { unsigned long i; _BitScanForward64(&i, x); return (int)i; }
    static inline int thetapi_popcount64(unsigned long long x)
    { return (int)__popcnt64(x); }
    #else
    static inline int thetapi_ctz64(unsigned long long x)
    { return __builtin_ctzll(x); }
    static inline int thetapi_popcount64(unsigned long long x)
    { return (int)__builtin_popcountll(x); }
    #endif
    """
    int thetapi_ctz64(unsigned long long x) nogil
    int thetapi_popcount64(unsigned long long x) nogil

cdef uint64_t ONE = 1
cdef uint64_t FULL = ~(<uint64_t> 0)


cdef inline uint64_t _mask_above(uint64_t word, Py_ssize_t j,
                                 Py_ssize_t v) nogil:
    # Bits of word j restricted to indices strictly greater than v.
    if j < (v >> 6):
        return 0
    if j > (v >> 6):
        return word
    if (v & 63) == 63:
        return 0
    return word & (FULL << ((v & 63) + 1))


cdef inline bint _testbit(uint64_t[:, ::1] bits, Py_ssize_t row,
                          Py_ssize_t j) nogil:
    return (bits[row, j >> 6] >> (j & 63)) & ONE


cdef _bitsets(indptr, indices, Py_ssize_t n):
    cdef Py_ssize_t nw = ((n + 63) >> 6) if n else 1
    out = np.zeros((max(n, 1), nw), dtype=np.uint64)
    cdef uint64_t[:, ::1] bits = out
    cdef int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef Py_ssize_t u, k, v
    for u in range(n):
        for k in range(ip[u], ip[u + 1]):
            v = ix[k]
            bits[u, v >> 6] |= ONE << (v & 63)
    return out


def triangles(indptr, indices, n):
    """All triangles (u, v, w) with u < v < w, lexicographic order."""
    cdef Py_ssize_t nn = n
    bits_arr = _bitsets(indptr, indices, nn)
    cdef uint64_t[:, ::1] bits = bits_arr
    cdef Py_ssize_t nw = bits_arr.shape[1]
    cdef int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef list out = []
    cdef Py_ssize_t u, k, j, v, w, base
    cdef uint64_t m
    for u in range(nn):
        for k in range(ip[u], ip[u + 1]):
            v = ix[k]
            if v <= u:
                continue
            for j in range(v >> 6, nw):
                m = _mask_above(bits[u, j] & bits[v, j], j, v)
                base = j << 6
                while m:
                    w = base + thetapi_ctz64(m)
                    m &= m - 1
                    out.append(u)
                    out.append(v)
                    out.append(w)
    return np.array(out, dtype=np.int32).reshape(-1, 3)


def squares(indptr, indices, n, chordless_only):
    """Simple 4-cycles (u, v, w, x): u the minimal vertex, (u,w) a diagonal,
    v < x its neighbors.  Ordered by (u, w, v, x)."""
    cdef Py_ssize_t nn = n
    cdef bint chordless = bool(chordless_only)
    bits_arr = _bitsets(indptr, indices, nn)
    cdef uint64_t[:, ::1] bits = bits_arr
    cdef Py_ssize_t nw = bits_arr.shape[1]
    cand_arr = np.zeros(nw, dtype=np.uint64)
    common_arr = np.zeros(nw, dtype=np.uint64)
    vs_arr = np.zeros(max(nn, 1), dtype=np.int64)
    cdef uint64_t[::1] cand = cand_arr
    cdef uint64_t[::1] common = common_arr
    cdef int64_t[::1] vs = vs_arr
    cdef list out = []
    cdef Py_ssize_t u, j, a, b, w, v, x, base, cnt
    cdef uint64_t m, m2
    cdef int total
    for u in range(nn):
        total = 0
        for j in range(nw):
            total += thetapi_popcount64(_mask_above(bits[u, j], j, u))
        if total < 2:
            continue
        for j in range(nw):
            cand[j] = 0
        for j in range(u >> 6, nw):
            m = _mask_above(bits[u, j], j, u)
            base = j << 6
            while m:
                w = base + thetapi_ctz64(m)
                m &= m - 1
                for a in range(nw):
                    cand[a] |= bits[w, a]
        for j in range(u >> 6, nw):
            m = _mask_above(cand[j], j, u)
            base = j << 6
            while m:
                w = base + thetapi_ctz64(m)
                m &= m - 1
                if chordless and _testbit(bits, u, w):
                    continue
                total = 0
                for a in range(nw):
                    common[a] = _mask_above(bits[u, a] & bits[w, a], a, u)
                    total += thetapi_popcount64(common[a])
                if total < 2:
                    continue
                cnt = 0
                for a in range(nw):
                    m2 = common[a]
                    while m2:
                        vs[cnt] = (a << 6) + thetapi_ctz64(m2)
                        m2 &= m2 - 1
                        cnt += 1
                for a in range(cnt):
                    v = vs[a]
                    for b in range(a + 1, cnt):
                        x = vs[b]
                        if chordless and _testbit(bits, v, x):
                            continue
                        out.append(u)
                        out.append(v)
                        out.append(w)
                        out.append(x)
    return np.array(out, dtype=np.int32).reshape(-1, 4)


def fold_dominated(indptr, indices, n, keep, keep_b=-1):
    """Iteratively remove vertices with dominated closed neighborhoods.

    u is removed when some current neighbor v satisfies N[u] subseteq N[v]
    and (the inclusion is proper or v < u).  Scan order: ascending u,
    candidates ascending; repeated until stable (worklist of neighbors of
    removals).  Returns the (removed, dominator) pairs in removal order.
    ``keep`` (and ``keep_b`` when >= 0) is never removed.
    """
    cdef Py_ssize_t nn = n
    cdef Py_ssize_t kp = keep
    cdef Py_ssize_t kp2 = keep_b
    bits_arr = _bitsets(indptr, indices, nn)
    cdef uint64_t[:, ::1] bits = bits_arr
    cdef Py_ssize_t nw = bits_arr.shape[1]
    alive_arr = np.ones(max(nn, 1), dtype=np.uint8)
    touched_arr = np.zeros(max(nn, 1), dtype=np.uint8)
    cdef unsigned char[::1] alive = alive_arr
    cdef unsigned char[::1] touched = touched_arr
    cdef list out = []
    cdef list current = list(range(nn))
    cdef list nxt
    cdef Py_ssize_t u, v, w, x, j, base, base2
    cdef uint64_t m, mv, cu, cv
    cdef bint dominated, proper, found, any_touch
    while current:
        for j in range(nn):
            touched[j] = 0
        any_touch = False
        for u in current:
            if u == kp or u == kp2 or not alive[u]:
                continue
            found = False
            for j in range(nw):
                m = bits[u, j]
                base = j << 6
                while m:
                    v = base + thetapi_ctz64(m)
                    m &= m - 1
                    if v == u:
                        continue
                    dominated = True
                    proper = False
                    for w in range(nw):
                        cu = bits[u, w]
                        cv = bits[v, w]
                        if w == (u >> 6):
                            cu |= ONE << (u & 63)
                        if w == (v >> 6):
                            cv |= ONE << (v & 63)
                        if cu & ~cv:
                            dominated = False
                            break
                        if cv & ~cu:
                            proper = True
                    if dominated and (proper or v < u):
                        out.append((u, v))
                        alive[u] = 0
                        for w in range(nw):
                            mv = bits[u, w]
                            base2 = w << 6
                            while mv:
                                x = base2 + thetapi_ctz64(mv)
                                mv &= mv - 1
                                bits[x, u >> 6] &= ~(ONE << (u & 63))
                                touched[x] = 1
                                any_touch = True
                            bits[u, w] = 0
                        found = True
                        break
                if found:
                    break
        nxt = []
        if any_touch:
            for j in range(nn):
                if touched[j] and alive[j]:
                    nxt.append(j)
        current = nxt
    return np.array(out, dtype=np.int32).reshape(-1, 2)
