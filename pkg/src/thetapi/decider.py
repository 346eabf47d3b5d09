"""Bounded decision procedure for homotopy of paths at a scale.

Verdicts are sound by construction and never guessed: a ``"trivial"`` answer
carries an explicit grid homotopy that is re-checked by the independent
verifier before being returned, a ``"nontrivial"`` answer carries a
recomputable obstruction (a nonzero abelianization class, or a nonempty
reduced word once the presentation has simplified to a free one), and when
the search budget runs out the answer is ``"unknown"``.

The search works on the folded core graph with two move kinds between
canonical (stutter-free) rows: changing one interior coordinate, and
inserting a new coordinate between two neighbors.  Both correspond to short
blocks of certificate rows, so every successful search replays into a
complete certificate from the original input down to the target.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InternalCheckError, ValidationError
from .paths import (GridHomotopy, ThetaPath, concat, invert, make_path,
                    validate_path, verify_grid_homotopy)
from .presentation import free_reduce, simplify_with_rewriter, word_exponents
from .scale_maps import ScaleAnalysis, analyze_scale
from .theta_graph import ThetaGraph

Row = tuple[int, ...]

__all__ = ["DeciderResult", "is_nullhomotopic", "are_homotopic",
           "short_loop_contraction"]


@dataclass(frozen=True)
class DeciderResult:
    """Outcome of a bounded homotopy decision.

    ``verdict`` is ``"trivial"``, ``"nontrivial"`` or ``"unknown"``.  Trivial
    results carry a verified ``certificate``; nontrivial results carry an
    ``obstruction`` dictionary that can be recomputed from the inputs;
    unknown results only report budget ``stats``.
    """

    verdict: str
    certificate: GridHomotopy | None = None
    obstruction: dict | None = None
    stats: dict = field(default_factory=dict)

    @property
    def is_trivial(self) -> bool:
        return self.verdict == "trivial"

    @property
    def is_nontrivial(self) -> bool:
        return self.verdict == "nontrivial"

    @property
    def is_unknown(self) -> bool:
        return self.verdict == "unknown"

    def __repr__(self) -> str:  # pragma: no cover
        return f"DeciderResult({self.verdict!r}, stats={self.stats!r})"


# ---------------------------------------------------------------------------
# Row manipulation helpers


def _canon(row: Sequence[int]) -> Row:
    out = [row[0]]
    for p in row[1:]:
        if p != out[-1]:
            out.append(p)
    return tuple(out)


def _dedup_steps(row: Row) -> list[Row]:
    """Successive rows, each removing one consecutive duplicate, ending with
    the canonical form.  Empty when the row is already canonical."""
    out: list[Row] = []
    cur = list(row)
    i = 0
    while i + 1 < len(cur):
        if cur[i] == cur[i + 1]:
            del cur[i + 1]
            out.append(tuple(cur))
        else:
            i += 1
    return out


def _fold_rows(row: Row, pairs) -> list[Row]:
    """One certificate row per fold pair that touches the path: every
    occurrence of the removed vertex is replaced by its dominator (a
    neighbor whose closed neighborhood contains the removed one, so both
    the row and the column steps stay within scale)."""
    rows: list[Row] = []
    cur = row
    for u, v in pairs:
        u, v = int(u), int(v)
        if u in cur:
            cur = tuple(v if x == u else x for x in cur)
            rows.append(cur)
    return rows


def _chain_to_core(points: Row, analysis: ScaleAnalysis) -> list[Row]:
    """Rows from the raw input down to its canonical core row (inclusive of
    the input itself)."""
    rows = [points]
    if analysis.fold is not None:
        rows += _fold_rows(points, analysis.fold.pairs)
    rows += _dedup_steps(rows[-1])
    return rows


def _remark_row(z: Row) -> Row:
    """Middle row of the two-step contraction of a loop with at most 4
    steps: position j holds z[max(0, min(j, W-2-j))], so every row and
    column step is one of the loop's own steps."""
    w = len(z)
    return tuple(z[max(0, min(j, w - 2 - j))] for j in range(w))


def _assemble(space, theta: float, rows: Sequence[Row],
              from_path: ThetaPath, to_path: ThetaPath) -> GridHomotopy:
    """Pad rows to a common width with their own endpoint, drop repeats,
    and verify the finished certificate before returning it."""
    width = max(len(r) for r in rows)
    padded: list[Row] = []
    for r in rows:
        pr = r + (r[-1],) * (width - len(r))
        if not padded or pr != padded[-1]:
            padded.append(pr)
    cert = GridHomotopy(space, float(theta), tuple(padded),
                        endpoints_fixed=True)
    report = verify_grid_homotopy(cert, from_path, to_path)
    if not report.ok:
        raise InternalCheckError(
            f"constructed certificate failed verification: "
            f"{report.first_failure()}")
    return cert


def short_loop_contraction(path: ThetaPath) -> GridHomotopy:
    """Explicit contraction certificate for a closed path with at most 4
    steps.

    The middle row freezes the second half of the loop onto the first
    (``(z0,z1,z2,z3,z0)`` becomes ``(z0,z1,z1,z0,z0)``), so every distance
    the certificate needs is already one of the loop's own steps; the last
    row is constant.  Works for any listed loop of width at most 5,
    stuttered entries included.
    """
    validate_path(path)
    if not path.is_closed:
        raise ValidationError("short_loop_contraction requires a closed path")
    if len(path.points) > 5:
        raise ValidationError(
            f"short_loop_contraction handles loops of at most 4 steps; "
            f"got {len(path.points) - 1}")
    z = path.points
    rows = [z, _remark_row(z), (z[0],) * len(z)]
    const = make_path(path.space, path.theta, [z[0]])
    return _assemble(path.space, path.theta, rows, path, const)


def _backtrack_rows(row: Row) -> list[Row]:
    """Contract a canonical closed walk whose word is freely trivial.

    Such a walk lifts to a closed walk in the universal cover of the graph
    (a tree), where an occurrence of maximal depth is entered and left from
    the same vertex; projecting back, some interior position satisfies
    row[i-1] == row[i+1].  Overwriting row[i] with that common neighbor and
    deduplicating strictly shortens the walk while preserving the property,
    so repeating reaches the constant walk.
    """
    rows: list[Row] = []
    cur = list(row)
    while len(cur) > 1:
        for i in range(1, len(cur) - 1):
            if cur[i - 1] == cur[i + 1]:
                break
        else:
            raise InternalCheckError(
                "no backtrack found in a walk whose word is freely trivial")
        cur[i] = cur[i - 1]
        rows.append(tuple(cur))
        rows += _dedup_steps(rows[-1])
        cur = list(rows[-1])
    return rows


# ---------------------------------------------------------------------------
# Search over canonical rows


def _closed_neighborhoods(graph: ThetaGraph) -> list[int]:
    indptr, indices = graph.indptr, graph.indices
    out: list[int] = []
    for u in range(graph.n):
        m = 1 << u
        for v in indices[indptr[u]:indptr[u + 1]]:
            m |= 1 << int(v)
        out.append(m)
    return out


def _search(nbr: list[int], start: Row, goal: Row, max_width: int,
            max_states: int):
    """Best-first search between canonical rows with pinned endpoints.

    Moves: change one interior coordinate to a common neighbor of its two
    row neighbors and its old value, or insert a common neighbor of two
    consecutive coordinates between them.  States are drained in
    (row length, lexicographic) order, so outcomes are deterministic for a
    fixed budget; enlarging the budget can only turn "unknown" into a
    certificate, never flip a verdict.
    """
    prev: dict[Row, tuple[Row, tuple] | None] = {start: None}
    stats = {"visited": 1, "expanded": 0,
             "max_width": max_width, "max_states": max_states}
    if start == goal:
        return True, prev, stats
    heap: list[tuple[int, Row]] = [(len(start), start)]

    def visit(state: Row, parent: Row, op: tuple) -> bool:
        if state in prev:
            return False
        prev[state] = (parent, op)
        stats["visited"] += 1
        heapq.heappush(heap, (len(state), state))
        return state == goal

    while heap:
        if stats["visited"] >= max_states:
            stats["exhausted"] = "budget"
            return False, prev, stats
        _, r = heapq.heappop(heap)
        stats["expanded"] += 1
        length = len(r)
        for i in range(1, length - 1):
            mask = nbr[r[i - 1]] & nbr[r[i]] & nbr[r[i + 1]]
            while mask:
                lsb = mask & -mask
                v = lsb.bit_length() - 1
                mask ^= lsb
                if v == r[i]:
                    continue
                if visit(_canon(r[:i] + (v,) + r[i + 1:]),
                         r, ("change", i, v)):
                    return True, prev, stats
        if length < max_width:
            for i in range(length - 1):
                mask = nbr[r[i]] & nbr[r[i + 1]]
                while mask:
                    lsb = mask & -mask
                    v = lsb.bit_length() - 1
                    mask ^= lsb
                    if v == r[i] or v == r[i + 1]:
                        continue
                    if visit(r[:i + 1] + (v,) + r[i + 1:],
                             r, ("insert", i, v)):
                        return True, prev, stats
    stats["exhausted"] = "frontier"
    return False, prev, stats


def _replay_rows(prev: dict, goal: Row) -> list[Row]:
    """Expand the move sequence reaching ``goal`` back into certificate
    rows (each change is one row plus its deduplications; each insert is a
    stutter row followed by the changed row)."""
    chain: list[tuple[Row, tuple, Row]] = []
    cur = goal
    while prev[cur] is not None:
        parent, op = prev[cur]
        chain.append((parent, op, cur))
        cur = parent
    chain.reverse()
    rows: list[Row] = []
    for parent, (kind, i, v), child in chain:
        if kind == "change":
            mid = parent[:i] + (v,) + parent[i + 1:]
            rows.append(mid)
            rows += _dedup_steps(mid)
        else:
            rows.append(parent[:i + 1] + (parent[i],) + parent[i + 1:])
            rows.append(child)
        if rows[-1] != child:
            raise InternalCheckError("replayed move does not reach its state")
    return rows


# ---------------------------------------------------------------------------
# Obstruction phases shared by both entry points


def _check_analysis(analysis: ScaleAnalysis, space, theta: float,
                    basepoint: int) -> None:
    if analysis.space.space_hash() != space.space_hash():
        raise ValidationError("analysis was computed over a different space")
    if analysis.theta != theta:
        raise ValidationError(
            f"analysis scale {analysis.theta!r} differs from path scale "
            f"{theta!r}")
    if analysis.basepoint != basepoint:
        raise ValidationError(
            f"analysis basepoint {analysis.basepoint} differs from the "
            f"path basepoint {basepoint}")


def _obstruction(analysis: ScaleAnalysis, word) -> dict | None:
    """A recomputable witness of non-triviality for a based loop word, or
    None when abelianization and free simplification are both blind."""
    pres = analysis.presentation
    cls = analysis.structure.coordinates(
        word_exponents(word, pres.num_generators))
    if any(cls):
        return {
            "kind": "nonzero-h1-class",
            "class": [int(x) for x in cls],
            "torsion": [int(d) for d in analysis.invariants.torsion],
            "rank": analysis.invariants.rank,
            "theta": analysis.theta,
        }
    simplified, rewrite = simplify_with_rewriter(pres, "heavy")
    if not simplified.relators:
        reduced = free_reduce(rewrite(word))
        if reduced:
            return {
                "kind": "nontrivial-free-word",
                "word": [int(x) for x in reduced],
                "num_generators": simplified.num_generators,
                "simplification": "heavy",
                "theta": analysis.theta,
            }
    return None


# ---------------------------------------------------------------------------
# Entry points


def is_nullhomotopic(path: ThetaPath, *, max_states: int = 1_000_000,
                     max_width: int | None = None,
                     analysis: ScaleAnalysis | None = None) -> DeciderResult:
    """Decide whether a based closed path contracts to its basepoint.

    Phases: short loops get the explicit contraction; a freely trivial word
    yields a certificate by backtrack removal; a nonzero abelianization
    class (or a nonempty word in a freely simplified presentation) is a
    sound obstruction; otherwise a bounded best-first search looks for a
    contraction and answers "unknown" when the budget runs out.
    """
    validate_path(path)
    if not path.is_closed:
        raise ValidationError("is_nullhomotopic requires a closed path")
    basepoint = (analysis.basepoint if analysis is not None
                 else path.space.basepoint)
    if path.start != basepoint:
        raise ValidationError(
            f"loop is based at {path.start}, expected basepoint {basepoint}")
    space, theta, pts = path.space, path.theta, path.points
    const = make_path(space, theta, [basepoint])
    canon = _canon(pts)

    if len(canon) <= 5:
        rows = [pts, *_dedup_steps(pts)]
        if len(canon) > 1:
            rows += [_remark_row(canon), (basepoint,)]
        cert = _assemble(space, theta, rows, path, const)
        return DeciderResult("trivial", certificate=cert,
                             stats={"phase": "short-loop"})

    if analysis is None:
        analysis = analyze_scale(space, theta, basepoint)
    else:
        _check_analysis(analysis, space, theta, basepoint)
    word = analysis.word_of(pts)
    chain = _chain_to_core(pts, analysis)

    if not free_reduce(word):
        rows = chain + _backtrack_rows(chain[-1])
        cert = _assemble(space, theta, rows, path, const)
        return DeciderResult("trivial", certificate=cert,
                             stats={"phase": "free-contraction"})

    obstruction = _obstruction(analysis, word)
    if obstruction is not None:
        return DeciderResult("nontrivial", obstruction=obstruction,
                             stats={"phase": "obstruction",
                                    "word_length": len(word)})

    width = max_width if max_width is not None else 2 * len(pts) + 4
    nbr = _closed_neighborhoods(analysis.graph)
    found, prev, sstats = _search(nbr, chain[-1], (basepoint,), width,
                                  max_states)
    if found:
        rows = chain + _replay_rows(prev, (basepoint,))
        cert = _assemble(space, theta, rows, path, const)
        return DeciderResult("trivial", certificate=cert,
                             stats={"phase": "search", **sstats})
    return DeciderResult("unknown", stats={"phase": "search", **sstats})


def are_homotopic(p: ThetaPath, q: ThetaPath, *, max_states: int = 1_000_000,
                  max_width: int | None = None,
                  analysis: ScaleAnalysis | None = None) -> DeciderResult:
    """Decide whether two paths with the same scale and endpoints are
    homotopic rel endpoints.

    Obstructions come from the closed loop p * reverse(q); certificates
    come from a direct search connecting the two folded cores, spliced
    between the fold/deduplication chains of the inputs.
    """
    validate_path(p)
    validate_path(q)
    if p.space.space_hash() != q.space.space_hash():
        raise ValidationError("paths live over different spaces")
    if p.theta != q.theta:
        raise ValidationError(
            f"paths have different scales ({p.theta!r} vs {q.theta!r})")
    if p.start != q.start or p.end != q.end:
        raise ValidationError(
            f"paths must share endpoints; got ({p.start}, {p.end}) and "
            f"({q.start}, {q.end})")
    space, theta = p.space, p.theta
    base, other_end = p.start, p.end

    if analysis is None:
        analysis = analyze_scale(space, theta, base, also_keep=other_end)
    else:
        _check_analysis(analysis, space, theta, base)
        if (analysis.fold is not None
                and not bool(analysis.fold.alive[other_end])):
            raise ValidationError(
                "analysis folded away the common endpoint; rebuild it with "
                "also_keep set")

    loop = concat(p, invert(q))
    word = analysis.word_of(loop.points)
    chain_p = _chain_to_core(p.points, analysis)
    chain_q = _chain_to_core(q.points, analysis)
    start, goal = chain_p[-1], chain_q[-1]

    if start == goal:
        rows = chain_p + list(reversed(chain_q))
        cert = _assemble(space, theta, rows, p, q)
        return DeciderResult("trivial", certificate=cert,
                             stats={"phase": "common-core"})

    if free_reduce(word):
        obstruction = _obstruction(analysis, word)
        if obstruction is not None:
            obstruction = dict(obstruction, loop="p * reverse(q)")
            return DeciderResult("nontrivial", obstruction=obstruction,
                                 stats={"phase": "obstruction",
                                        "word_length": len(word)})

    default_width = 2 * (len(p.points) + len(q.points)) + 4
    width = max_width if max_width is not None else default_width
    swapped = len(goal) > len(start)
    if swapped:
        start, goal = goal, start
    nbr = _closed_neighborhoods(analysis.graph)
    found, prev, sstats = _search(nbr, start, goal, width, max_states)
    if found:
        middle = _replay_rows(prev, goal)
        if swapped:
            rows = chain_q + middle + list(reversed(chain_p))
            rows = list(reversed(rows))
        else:
            rows = chain_p + middle + list(reversed(chain_q))
        cert = _assemble(space, theta, rows, p, q)
        return DeciderResult("trivial", certificate=cert,
                             stats={"phase": "search", **sstats})
    return DeciderResult("unknown", stats={"phase": "search", **sstats})
