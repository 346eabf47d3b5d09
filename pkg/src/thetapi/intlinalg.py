"""Exact integer linear algebra over Python ints.

Everything here works with arbitrary-precision integers; numpy is deliberately
not used because entry growth during elimination must never overflow.

Main pieces:

* :func:`smith_normal_form` — U @ M @ V == D with unimodular U, V, deterministic
  pivoting (smallest |entry|, ties broken by position), divisibility chain on the
  diagonal.  Optionally tracks W = V^{-1} alongside V.
* :func:`reference_snf_diagonal` — an independent elementary-operations
  implementation (first-nonzero pivoting, no transform tracking) used as a
  cross-check oracle in tests.
* :class:`RowLattice` — incremental reduction of a large sparse family of integer
  row vectors to a unit-pivot Gauss-Jordan basis plus a small dense residual,
  yielding canonical coordinates on the quotient group Z^n / rowspan.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

Matrix = list[list[int]]

# When true, every smith_normal_form call re-multiplies the transforms and
# asserts the contract.  Enabled by the test suite.
CHECK_SNF = bool(os.environ.get("THETAPI_CHECK_SNF"))


def identity_matrix(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def copy_matrix(M) -> Matrix:
    return [[int(x) for x in row] for row in M]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    n = len(B)
    assert all(len(row) == n for row in A), "matmul shape mismatch"
    m = len(B[0]) if B else 0
    out = [[0] * m for _ in range(len(A))]
    for i, arow in enumerate(A):
        orow = out[i]
        for k, a in enumerate(arow):
            if a:
                brow = B[k]
                for j in range(m):
                    if brow[j]:
                        orow[j] += a * brow[j]
    return out


def matrix_rank(M) -> int:
    """Rank over Q of an integer matrix (fraction-free Gaussian elimination)."""
    work = copy_matrix(M)
    m = len(work)
    n = len(work[0]) if m else 0
    rank = 0
    row = 0
    for col in range(n):
        piv = next((i for i in range(row, m) if work[i][col]), None)
        if piv is None:
            continue
        work[row], work[piv] = work[piv], work[row]
        pv = work[row][col]
        for i in range(row + 1, m):
            if work[i][col]:
                f = work[i][col]
                work[i] = [pv * x - f * y for x, y in zip(work[i], work[row])]
        row += 1
        rank += 1
        if row == m:
            break
    return rank


def _find_pivot(work: Matrix, s: int) -> tuple[int, int] | None:
    """Smallest |nonzero| in the trailing submatrix; ties by (row, col)."""
    best = None
    best_abs = None
    for i in range(s, len(work)):
        row = work[i]
        for j in range(s, len(row)):
            v = row[j]
            if v:
                a = -v if v < 0 else v
                if best_abs is None or a < best_abs:
                    best_abs, best = a, (i, j)
                    if a == 1:
                        return best
    return best


def _balanced_quotient(a: int, d: int) -> int:
    """Quotient leaving the remainder in (-d/2, d/2]; requires d > 0.

    Keeping remainders balanced instead of in [0, d) is what stops entry
    sizes from exploding during elimination (plain floor quotients blow up
    dense 12x12 inputs to hundreds of thousands of bits)."""
    q, r = divmod(a, d)
    if 2 * r > d:
        q += 1
    return q


def _bezout(a: int, b: int) -> tuple[int, int]:
    """(x, y) with x*a + y*b == gcd(a, b) >= 0, by extended Euclid."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        return -old_x, -old_y
    return old_x, old_y


def smith_normal_form(M, *, want_inverse: bool = False):
    """Smith normal form of an integer matrix.

    Returns ``(U, D, V)`` with ``U @ M @ V == D``, U and V unimodular, and D
    diagonal with d_1 | d_2 | ... | d_r, all nonnegative.  With
    ``want_inverse=True`` returns ``(U, D, V, W)`` where ``W == V^{-1}``.

    Deterministic: pivot selection is smallest nonzero absolute value, ties
    broken by lexicographically smallest (row, column).
    """
    work = copy_matrix(M)
    m = len(work)
    n = len(work[0]) if m else 0
    if any(len(row) != n for row in work):
        raise ValueError("ragged matrix")
    U = identity_matrix(m)
    V = identity_matrix(n)
    W = identity_matrix(n) if want_inverse else None

    def row_op(i: int, k: int, q: int) -> None:
        # row_i -= q * row_k
        work[i] = [a - q * b for a, b in zip(work[i], work[k])]
        U[i] = [a - q * b for a, b in zip(U[i], U[k])]

    def col_op(j: int, k: int, q: int) -> None:
        # col_j -= q * col_k ; W row_k += q * W row_j (inverse op)
        for row in work:
            row[j] -= q * row[k]
        for row in V:
            row[j] -= q * row[k]
        if W is not None:
            W[k] = [a + q * b for a, b in zip(W[k], W[j])]

    def flip_row_sign(i: int) -> None:
        work[i] = [-x for x in work[i]]
        U[i] = [-x for x in U[i]]

    # Phase 1: diagonalize.  Divisibility along the diagonal is restored in
    # a separate phase; fixing it during elimination re-triggers Euclid
    # rounds against the swollen trailing submatrix and is quadratically
    # slower on dense inputs.
    s = 0
    while s < min(m, n):
        pos = _find_pivot(work, s)
        if pos is None:
            break
        i, j = pos
        if i != s:
            work[s], work[i] = work[i], work[s]
            U[s], U[i] = U[i], U[s]
        if j != s:
            for row in work:
                row[s], row[j] = row[j], row[s]
            for row in V:
                row[s], row[j] = row[j], row[s]
            if W is not None:
                W[s], W[j] = W[j], W[s]
        while True:
            if work[s][s] < 0:
                flip_row_sign(s)
            # Clear column s below the pivot: per-entry Euclid, swapping the
            # shrinking remainder up immediately (the pivot sign must be
            # restored right away or the balanced quotients degenerate).
            for i in range(s + 1, m):
                while work[i][s]:
                    q = _balanced_quotient(work[i][s], work[s][s])
                    if q:
                        row_op(i, s, q)
                    if work[i][s]:
                        work[s], work[i] = work[i], work[s]
                        U[s], U[i] = U[i], U[s]
                        if work[s][s] < 0:
                            flip_row_sign(s)
            # Clear row s right of the pivot.
            col_clean = True
            for j in range(s + 1, n):
                while work[s][j]:
                    q = _balanced_quotient(work[s][j], work[s][s])
                    if q:
                        col_op(j, s, q)
                    if work[s][j]:
                        for row in work:
                            row[s], row[j] = row[j], row[s]
                        for row in V:
                            row[s], row[j] = row[j], row[s]
                        if W is not None:
                            W[s], W[j] = W[j], W[s]
                        if work[s][s] < 0:
                            flip_row_sign(s)
                        col_clean = False
            if col_clean and not any(work[i][s] for i in range(s + 1, m)):
                break
        s += 1

    # Phase 2: enforce d_1 | d_2 | ... on the diagonal with the 2x2 lemma
    # diag(a, b) ~ diag(gcd(a, b), lcm(a, b)); entries stay bounded by the
    # pairwise lcm instead of re-entering elimination.
    r = min(m, n)
    changed = True
    while changed:
        changed = False
        for p in range(r - 1):
            a, b = work[p][p], work[p + 1][p + 1]
            if a == 0 and b == 0:
                continue
            if a != 0 and b % a == 0:
                continue
            q = p + 1
            g = math.gcd(a, b)
            x, y = _bezout(a, b)
            # U2 = [[x, y], [-b/g, a/g]], V2 = [[1, -y*b/g], [1, x*a/g]],
            # V2^{-1} = [[x*a/g, y*b/g], [-1, 1]]; all determinant 1.
            bg, ag = b // g, a // g
            for Mx in (work, U):
                rp, rq = Mx[p], Mx[q]
                Mx[p] = [x * u + y * v for u, v in zip(rp, rq)]
                Mx[q] = [-bg * u + ag * v for u, v in zip(rp, rq)]
            yb, xa = y * bg, x * ag
            for Mx in (work, V):
                for row in Mx:
                    u, v = row[p], row[q]
                    row[p] = u + v
                    row[q] = -yb * u + xa * v
            if W is not None:
                rp, rq = W[p], W[q]
                W[p] = [xa * u + yb * v for u, v in zip(rp, rq)]
                W[q] = [-u + v for u, v in zip(rp, rq)]
            if work[p][p] < 0:
                flip_row_sign(p)
            if work[q][q] < 0:
                flip_row_sign(q)
            changed = True

    if CHECK_SNF:
        prod = matmul(matmul(U, copy_matrix(M)), V)
        assert prod == work, "SNF contract violated: U @ M @ V != D"
        diag = [work[i][i] for i in range(min(m, n))]
        for a, b in zip(diag, diag[1:]):
            assert not (a == 0 and b != 0), "SNF zero ordering violated"
            assert a == 0 or b % a == 0, "SNF divisibility violated"
        if W is not None:
            assert matmul(V, W) == identity_matrix(n), "V inverse tracking broken"

    if want_inverse:
        return U, work, V, W
    return U, work, V


def snf_diagonal(M) -> list[int]:
    """Just the diagonal of the Smith normal form."""
    _, D, _ = smith_normal_form(M)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


def reference_snf_diagonal(M) -> list[int]:
    """Elementary-operations SNF kept independent of the main implementation:
    peels one diagonal entry at a time by slicing off the first row/column
    (no transform tracking, no pivot *position* bookkeeping), then turns the
    resulting diagonal into the invariant factors by plain gcd/lcm arithmetic
    on the multiset — the SNF of a diagonal matrix depends only on its
    entries.  Used as a cross-check oracle in tests."""
    work = copy_matrix(M)
    diag: list[int] = []
    while work and work[0]:
        m, n = len(work), len(work[0])
        best = None
        for i in range(m):
            for j in range(n):
                v = abs(work[i][j])
                if v and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            diag.extend([0] * min(m, n))
            work = []
            break
        _, i, j = best
        work[0], work[i] = work[i], work[0]
        for row in work:
            row[0], row[j] = row[j], row[0]
        while True:
            if work[0][0] < 0:
                work[0] = [-a for a in work[0]]
            for i in range(1, m):
                while work[i][0]:
                    q = _balanced_quotient(work[i][0], work[0][0])
                    if q:
                        work[i] = [a - q * b for a, b in zip(work[i], work[0])]
                    if work[i][0]:
                        work[0], work[i] = work[i], work[0]
                        if work[0][0] < 0:
                            work[0] = [-a for a in work[0]]
            cleared = True
            for j in range(1, n):
                while work[0][j]:
                    q = _balanced_quotient(work[0][j], work[0][0])
                    if q:
                        for row in work:
                            row[j] -= q * row[0]
                    if work[0][j]:
                        for row in work:
                            row[0], row[j] = row[j], row[0]
                        if work[0][0] < 0:
                            work[0] = [-a for a in work[0]]
                        cleared = False
            if cleared and not any(work[i][0] for i in range(1, m)):
                break
        diag.append(abs(work[0][0]))
        work = [row[1:] for row in work[1:]]
    # Invariant factors of a diagonal matrix: repeatedly replace every
    # non-dividing pair (a, b) by (gcd, lcm); zeros sort to the end.
    factors = sorted(d for d in diag if d)
    zeros = len(diag) - len(factors)
    changed = True
    while changed:
        changed = False
        for i in range(len(factors)):
            for j in range(i + 1, len(factors)):
                a, b = factors[i], factors[j]
                if b % a:
                    g = math.gcd(a, b)
                    factors[i], factors[j] = g, a * b // g
                    changed = True
    return factors + [0] * zeros


def in_column_lattice(A: Matrix, c: list[int]) -> bool:
    """Whether ``c`` lies in the integer span of the columns of ``A``."""
    m = len(A)
    if len(c) != m:
        raise ValueError("vector length does not match row count")
    if m == 0:
        return True
    k = len(A[0])
    U, D, _ = smith_normal_form(A)
    r = min(m, k)
    for i in range(m):
        y = sum(U[i][j] * c[j] for j in range(m))
        d = D[i][i] if i < r else 0
        if d:
            if y % d:
                return False
        elif y:
            return False
    return True


def unimodular_inverse(V: Matrix) -> Matrix:
    """Inverse of a unimodular integer matrix via SNF transforms."""
    U, D, Vr, W = smith_normal_form(V, want_inverse=True)
    n = len(V)
    if any(D[i][i] != 1 for i in range(n)):
        raise ValueError("matrix is not unimodular")
    # U @ V @ Vr = I  =>  V^{-1} = Vr @ U
    return matmul(Vr, U)


# ---------------------------------------------------------------------------
# Incremental row-lattice reduction


@dataclass
class QuotientStructure:
    """Canonical coordinates on Z^n_cols modulo a row lattice.

    Split presentation: ``pivot_rows[c]`` has entry 1 at pivot column c and
    support otherwise only on free (non-pivot) columns, so each pivot generator
    is expressed by free ones.  The residual block R lives entirely on the free
    columns; its SNF provides torsion/rank and the coordinate transform.

    Coordinates of a vector are ordered: torsion coordinates (moduli in
    ``torsion``) first, then free coordinates.
    """

    n_cols: int
    pivot_rows: dict[int, dict[int, int]]
    free_cols: list[int]
    res_diag: list[int]      # full SNF diagonal of the residual block (len = n_res_rank)
    res_V: Matrix            # |F| x |F| column transform of the residual SNF
    res_W: Matrix            # res_V^{-1}
    torsion: tuple[int, ...] = ()
    rank: int = 0
    _free_index: dict[int, int] = field(default_factory=dict, repr=False)
    _coord_cols: list[int] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._free_index = {c: k for k, c in enumerate(self.free_cols)}
        r = len(self.res_diag)
        torsion_cols = [k for k in range(r) if self.res_diag[k] >= 2]
        free_coord_cols = list(range(r, len(self.free_cols)))
        self._coord_cols = torsion_cols + free_coord_cols
        self.torsion = tuple(self.res_diag[k] for k in torsion_cols)
        self.rank = len(free_coord_cols)

    @property
    def dim(self) -> int:
        """Number of emitted coordinates (torsion + free)."""
        return len(self._coord_cols)

    def reduce_to_free(self, vec: dict[int, int]) -> dict[int, int]:
        """Reduce a sparse vector modulo the pivot rows; support ends up on
        free columns only."""
        out = {c: v for c, v in vec.items() if v}
        for c in [c for c in out if c in self.pivot_rows]:
            f = out.get(c, 0)
            if not f:
                continue
            for col, val in self.pivot_rows[c].items():
                nv = out.get(col, 0) - f * val
                if nv:
                    out[col] = nv
                else:
                    out.pop(col, None)
        return out

    def coordinates(self, vec) -> tuple[int, ...]:
        """Canonical coordinates of a vector's class in the quotient group.
        Accepts a sparse {column: value} dict or a dense sequence."""
        if not isinstance(vec, dict):
            vec = {c: int(v) for c, v in enumerate(vec) if v}
        red = self.reduce_to_free(vec)
        nf = len(self.free_cols)
        dense = [0] * nf
        for c, v in red.items():
            k = self._free_index.get(c)
            if k is None:
                raise ValueError("vector has support outside the generator set")
            dense[k] = v
        full = [0] * nf
        for k, v in enumerate(dense):
            if v:
                row = self.res_V[k]
                for j in range(nf):
                    if row[j]:
                        full[j] += v * row[j]
        out = []
        r = len(self.res_diag)
        for j in self._coord_cols:
            if j < r:
                out.append(full[j] % self.res_diag[j])
            else:
                out.append(full[j])
        return tuple(out)

    def basis_vector(self, k: int) -> dict[int, int]:
        """A sparse vector whose class has coordinates e_k (k-th emitted
        coordinate = 1, rest 0)."""
        j = self._coord_cols[k]
        row = self.res_W[j]
        return {
            self.free_cols[i]: row[i] for i in range(len(self.free_cols)) if row[i]
        }

    def class_in_lattice(self, coords: tuple[int, ...]) -> bool:
        return all(v == 0 for v in coords)


class RowLattice:
    """Incrementally reduce integer row vectors over Z^n to a canonical
    quotient structure.

    Rows with a unit entry become Gauss-Jordan pivots (the basis is kept fully
    reduced: no pivot row touches another pivot column), everything else lands
    in a residual block finished off by a dense SNF.  Intended for the very
    sparse relator matrices produced by short graph cycles, where almost all
    rows pivot on a +-1 entry.
    """

    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self.pivots: dict[int, dict[int, int]] = {}
        self.col_uses: dict[int, set[int]] = {}  # column -> pivot cols whose row uses it
        self.residual: list[dict[int, int]] = []

    def _reduce(self, row: dict[int, int]) -> dict[int, int]:
        out = {c: v for c, v in row.items() if v}
        for c in [c for c in out if c in self.pivots]:
            f = out.get(c, 0)
            if not f:
                continue
            for col, val in self.pivots[c].items():
                nv = out.get(col, 0) - f * val
                if nv:
                    out[col] = nv
                else:
                    out.pop(col, None)
        return out

    def _install(self, c: int, row: dict[int, int]) -> None:
        if row[c] == -1:
            row = {k: -v for k, v in row.items()}
        # Gauss-Jordan back-substitution: remove column c from older pivot rows.
        for p in list(self.col_uses.get(c, ())):
            prow = self.pivots[p]
            f = prow.get(c, 0)
            if not f:
                continue
            for col, val in row.items():
                nv = prow.get(col, 0) - f * val
                if nv:
                    prow[col] = nv
                    if col != p and col not in self.pivots:
                        self.col_uses.setdefault(col, set()).add(p)
                else:
                    prow.pop(col, None)
                    if col != p:
                        uses = self.col_uses.get(col)
                        if uses:
                            uses.discard(p)
        self.col_uses.pop(c, None)
        self.pivots[c] = row
        for col in row:
            if col != c:
                self.col_uses.setdefault(col, set()).add(c)

    def add(self, row: dict[int, int]) -> None:
        red = self._reduce(row)
        if not red:
            return
        units = [c for c, v in red.items() if v == 1 or v == -1]
        if units:
            self._install(min(units), red)
        else:
            self.residual.append(red)

    def finalize(self) -> QuotientStructure:
        # Residual rows may expose unit entries after later pivots landed.
        changed = True
        while changed:
            changed = False
            pending, self.residual = self.residual, []
            for row in pending:
                red = self._reduce(row)
                if not red:
                    continue
                units = [c for c, v in red.items() if v == 1 or v == -1]
                if units:
                    self._install(min(units), red)
                    changed = True
                else:
                    self.residual.append(red)
        free_cols = sorted(set(range(self.n_cols)) - set(self.pivots))
        fidx = {c: k for k, c in enumerate(free_cols)}
        nf = len(free_cols)
        res_rows: list[list[int]] = []
        for row in self.residual:
            red = self._reduce(row)
            if not red:
                continue
            dense = [0] * nf
            for c, v in red.items():
                dense[fidx[c]] = v
            res_rows.append(dense)
        if res_rows and nf:
            _, D, V, W = smith_normal_form(res_rows, want_inverse=True)
            diag = [D[i][i] for i in range(min(len(res_rows), nf))]
            diag = [d for d in diag if d]
        else:
            diag, V, W = [], identity_matrix(nf), identity_matrix(nf)
        return QuotientStructure(
            n_cols=self.n_cols,
            pivot_rows=self.pivots,
            free_cols=free_cols,
            res_diag=diag,
            res_V=V,
            res_W=W,
        )


def quotient_of_rows(n_cols: int, rows) -> QuotientStructure:
    """Convenience wrapper: reduce an iterable of sparse rows at once."""
    lat = RowLattice(n_cols)
    for row in rows:
        lat.add(row)
    return lat.finalize()
