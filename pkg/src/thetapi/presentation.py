"""Finite presentations of the discrete fundamental group at a scale.

Generators are the non-tree edges of a BFS spanning tree of the basepoint
component; every 3- and 4-cycle of the graph contributes its cycle word as a
relator.  Words are tuples of nonzero ints: letter ``+(g+1)`` is generator
``g`` from its smaller to its larger endpoint, negative letters the reverse.
The abelianization (first homology at the scale) comes from the Smith normal
form of the relator exponent matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import pairwise
from typing import Callable, Iterable, Sequence

from .errors import ValidationError
from .intlinalg import (QuotientStructure, quotient_of_rows,
                        smith_normal_form)
from .spaces import FiniteMetricSpace
from .theta_graph import (SpanningTree, ThetaGraph, build_graph,
                          spanning_tree, square_cells, triangle_cells)

Word = tuple[int, ...]

__all__ = [
    "Word", "GroupPresentation", "AbelianInvariants", "free_reduce",
    "cyclic_reduce", "invert_word", "canonical_cyclic", "presentation_at_scale",
    "exponent_matrix", "h1_structure", "abelianization", "class_of_loop",
    "tietze_simplify", "simplify_with_rewriter", "smith_normal_form",
]


def free_reduce(word: Iterable[int]) -> Word:
    """Cancel adjacent inverse letters until none remain."""
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def cyclic_reduce(word: Sequence[int]) -> Word:
    """Free reduction plus cancellation across the wrap-around."""
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def canonical_cyclic(word: Sequence[int]) -> Word:
    """Least rotation over the cyclically reduced word and its inverse;
    a canonical representative of the unoriented cyclic word."""
    w = cyclic_reduce(word)
    if not w:
        return ()
    best: Word | None = None
    for cand in (w, invert_word(w)):
        for k in range(len(cand)):
            rot = cand[k:] + cand[:k]
            if best is None or rot < best:
                best = rot
    return best  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class GroupPresentation:
    """A finite presentation tied to a scale and basepoint.

    ``generators[g]`` is the non-tree edge (u, v), u < v, that letter
    ``+-(g+1)`` refers to.  ``relators`` are cyclically reduced words.
    """

    generators: tuple[tuple[int, int], ...]
    relators: tuple[Word, ...]
    theta: float
    basepoint: int
    space_hash: str
    provenance: dict = field(default_factory=dict)

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @property
    def num_relators(self) -> int:
        return len(self.relators)

    def __repr__(self) -> str:  # pragma: no cover
        return (f"GroupPresentation(generators={self.num_generators}, "
                f"relators={self.num_relators}, theta={self.theta!r})")


@dataclass(frozen=True)
class AbelianInvariants:
    """Abelian group Z^rank + sum Z/d for d in torsion (divisibility chain)."""

    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise ValidationError("rank must be nonnegative")
        for a, b in pairwise(self.torsion):
            if b % a != 0:
                raise ValidationError(
                    f"torsion coefficients must form a divisibility chain, "
                    f"got {self.torsion}")

    def __str__(self) -> str:
        parts = ["Z"] * self.rank + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def _cycle_word(cycle: Sequence[int], tree: SpanningTree,
                gen_index: dict[tuple[int, int], int]) -> Word:
    word: list[int] = []
    k = len(cycle)
    for i in range(k):
        a, b = int(cycle[i]), int(cycle[(i + 1) % k])
        if tree.is_tree_edge(a, b):
            continue
        key = (a, b) if a < b else (b, a)
        g = gen_index[key]
        word.append(g + 1 if a < b else -(g + 1))
    return cyclic_reduce(word)


def presentation_at_scale(space: FiniteMetricSpace, theta: float,
                          basepoint: int | None = None, *,
                          relator_policy: str = "all",
                          graph: ThetaGraph | None = None,
                          tree: SpanningTree | None = None,
                          ) -> GroupPresentation:
    """Present the fundamental group of the basepoint component at ``theta``.

    ``relator_policy`` is ``"all"`` (every 3- and 4-cycle) or ``"reduced"``
    (triangles plus chordless 4-cycles only -- each chorded 4-cycle is the
    product of its two triangles, so the group is unchanged).  Relators
    appear in cell order (triangles first), with exact cyclic duplicates
    dropped.
    """
    if relator_policy not in ("all", "reduced"):
        raise ValidationError(f"unknown relator policy {relator_policy!r}")
    if basepoint is None:
        basepoint = space.basepoint
    if graph is None:
        graph = build_graph(space, theta)
    if tree is None:
        tree = spanning_tree(graph, basepoint)
    in_comp = tree.parent != -2
    gen_index = {(int(u), int(v)): k
                 for k, (u, v) in enumerate(tree.non_tree_edges)}
    relators: list[Word] = []
    seen: set[Word] = set()
    chordless = relator_policy == "reduced"
    for cells in (triangle_cells(graph),
                  square_cells(graph, chordless_only=chordless)):
        for row in cells:
            if not in_comp[row[0]]:
                continue
            w = _cycle_word(row, tree, gen_index)
            if not w:
                continue
            key = canonical_cyclic(w)
            if key in seen:
                continue
            seen.add(key)
            relators.append(w)
    gens = tuple((int(u), int(v)) for u, v in tree.non_tree_edges)
    prov = {
        "relator_policy": relator_policy,
        "component_size": int(in_comp.sum()),
        "num_edges": graph.num_edges,
    }
    return GroupPresentation(gens, tuple(relators), float(graph.theta),
                             int(basepoint), space.space_hash(), prov)


def exponent_matrix(p: GroupPresentation) -> list[list[int]]:
    """Integer matrix with one row per relator, one column per generator."""
    rows = []
    for w in p.relators:
        row = [0] * p.num_generators
        for letter in w:
            row[abs(letter) - 1] += 1 if letter > 0 else -1
        rows.append(row)
    return rows


def _exponent_rows(p: GroupPresentation) -> list[dict[int, int]]:
    rows = []
    for w in p.relators:
        row: dict[int, int] = {}
        for letter in w:
            g = abs(letter) - 1
            row[g] = row.get(g, 0) + (1 if letter > 0 else -1)
        rows.append({g: c for g, c in row.items() if c})
    return rows


def h1_structure(p: GroupPresentation) -> QuotientStructure:
    """Abelianized quotient Z^generators / relator rows, cached."""
    cached = getattr(p, "_h1_structure", None)
    if cached is None:
        cached = quotient_of_rows(p.num_generators, _exponent_rows(p))
        object.__setattr__(p, "_h1_structure", cached)
    return cached


def abelianization(p: GroupPresentation) -> AbelianInvariants:
    """Rank and torsion of the abelianized presentation."""
    s = h1_structure(p)
    return AbelianInvariants(s.rank, s.torsion)


def word_exponents(word: Sequence[int], n_generators: int) -> list[int]:
    vec = [0] * n_generators
    for letter in word:
        g = abs(letter) - 1
        if not (0 <= g < n_generators):
            raise ValidationError(f"letter {letter} outside generator range")
        vec[g] += 1 if letter > 0 else -1
    return vec


def class_of_loop(path, p: GroupPresentation,
                  tree: SpanningTree) -> tuple[int, ...]:
    """Coordinates of a based loop's homology class in the canonical
    torsion-then-free coordinates of the abelianization."""
    from .paths import loop_to_word  # local import to avoid a cycle

    if path.space.space_hash() != p.space_hash:
        raise ValidationError("loop and presentation live over different spaces")
    if tree.root != p.basepoint:
        raise ValidationError("tree root differs from presentation basepoint")
    if len(tree.non_tree_edges) != p.num_generators:
        raise ValidationError("tree does not match presentation generators")
    word = loop_to_word(path, tree)
    s = h1_structure(p)
    return s.coordinates(word_exponents(word, p.num_generators))


# ---------------------------------------------------------------------------
# Tietze simplification


def _substitute(word: Word, g: int, rep: Word) -> Word:
    """Replace letters +-(g+1) by ``rep`` / its inverse."""
    out: list[int] = []
    rep_inv = invert_word(rep)
    for letter in word:
        if letter == g + 1:
            out.extend(rep)
        elif letter == -(g + 1):
            out.extend(rep_inv)
        else:
            out.append(letter)
    return tuple(out)


def _shift_down(word: Word, g: int) -> Word:
    """Relabel letters after generator ``g`` is removed."""
    out = []
    for letter in word:
        a = abs(letter) - 1
        if a == g:
            raise ValidationError("cannot relabel a word still using the "
                                  "eliminated generator")
        if a > g:
            a -= 1
        out.append((a + 1) if letter > 0 else -(a + 1))
    return tuple(out)


def _clean(relators: Iterable[Word]) -> list[Word]:
    out: list[Word] = []
    seen: set[Word] = set()
    for w in relators:
        w = cyclic_reduce(w)
        if not w:
            continue
        key = canonical_cyclic(w)
        if key in seen:
            continue
        seen.add(key)
        out.append(w)
    return out


def simplify_with_rewriter(
        p: GroupPresentation, effort: str = "standard",
) -> tuple[GroupPresentation, Callable[[Sequence[int]], Word]]:
    """Tietze-simplify and return the presentation plus a rewriter taking
    words over the original generators to words over the surviving ones.

    Efforts: ``"light"`` reduces and deduplicates relators; ``"standard"``
    additionally eliminates generators that occur exactly once across all
    relators; ``"heavy"`` adds bounded relator-pair shortening passes.
    """
    if effort not in ("light", "standard", "heavy"):
        raise ValidationError(f"unknown simplification effort {effort!r}")
    relators = _clean(p.relators)
    gens = list(p.generators)
    ops: list[tuple[int, Word]] = []

    def eliminate_once() -> bool:
        # Remove a generator occurring exactly once across all relators; the
        # hosting relator expresses it, so no other relator needs rewriting
        # and the total relator length never grows.
        counts: dict[int, int] = {}
        for w in relators:
            for letter in w:
                g = abs(letter) - 1
                counts[g] = counts.get(g, 0) + 1
        for ri, w in enumerate(relators):
            for pos, letter in enumerate(w):
                if counts[abs(letter) - 1] != 1:
                    continue
                rot = w[pos:] + w[:pos]
                if rot[0] < 0:
                    rot = invert_word(rot)
                    rot = rot[-1:] + rot[:-1]
                g = rot[0] - 1
                rep = invert_word(rot[1:])
                del relators[ri]
                relators[:] = _clean(_shift_down(r, g) for r in relators)
                del gens[g]
                ops.append((g, rep))
                return True
        return False

    def rewrite_pass() -> bool:
        # Length-reducing relator-on-relator multiplications, trying all
        # cyclic alignments of the shorter word against the longer.
        changed = False
        for i in range(len(relators)):
            for j in range(len(relators)):
                if i == j or not relators[i] or not relators[j]:
                    continue
                base = relators[i]
                best = base
                rj = relators[j]
                for k in range(len(base)):
                    rot = base[k:] + base[:k]
                    for other in (rj, invert_word(rj)):
                        cand = cyclic_reduce(rot + other)
                        if len(cand) < len(best):
                            best = cand
                if len(best) < len(base):
                    relators[i] = best
                    changed = True
        if changed:
            relators[:] = _clean(relators)
        return changed

    if effort in ("standard", "heavy"):
        while eliminate_once():
            pass
    if effort == "heavy":
        for _ in range(8):
            changed = rewrite_pass()
            while eliminate_once():
                changed = True
            if not changed:
                break

    simplified = GroupPresentation(
        tuple(gens), tuple(relators), p.theta, p.basepoint, p.space_hash,
        dict(p.provenance, simplified=effort))

    def rewrite(word: Sequence[int]) -> Word:
        w = tuple(int(x) for x in word)
        for g, rep in ops:
            w = _shift_down(free_reduce(_substitute(w, g, rep)), g)
        return free_reduce(w)

    return simplified, rewrite


def tietze_simplify(p: GroupPresentation,
                    effort: str = "standard") -> GroupPresentation:
    """Simplified presentation of the same group (see simplify_with_rewriter)."""
    simplified, _ = simplify_with_rewriter(p, effort)
    return simplified
