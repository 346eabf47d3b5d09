"""Maps between scales, towers, barcodes, and inverse-limit diagnostics.

Growing the scale only adds edges, so the identity on points induces a
homomorphism from the group at a smaller scale to the group at a larger one.
On abelianizations this becomes an integer matrix in the canonical
(torsion-then-free) coordinates.  A tower evaluates a whole grid of scales,
composes the adjacent maps, extracts a persistence barcode of the free rank,
and reports how image ranks stabilize toward the inverse limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import InternalCheckError, ValidationError
from .intlinalg import QuotientStructure, in_column_lattice, matrix_rank
from .presentation import (AbelianInvariants, GroupPresentation, Word,
                           abelianization, h1_structure, presentation_at_scale,
                           word_exponents)
from .spaces import FiniteMetricSpace
from .theta_graph import (FoldResult, SpanningTree, ThetaGraph, build_graph,
                          critical_scales, fold_graph, spanning_tree)


@dataclass
class ScaleAnalysis:
    """Everything computed about one scale: folded core graph, spanning tree,
    presentation, and the abelianized quotient structure."""

    space: FiniteMetricSpace
    theta: float
    basepoint: int
    graph: ThetaGraph
    fold: FoldResult | None
    tree: SpanningTree
    presentation: GroupPresentation
    structure: QuotientStructure
    invariants: AbelianInvariants

    @property
    def dim(self) -> int:
        return self.structure.dim

    def to_core(self, points: Sequence[int]) -> list[int]:
        """Push a path of the full graph into the folded core (with stutters
        removed); folding preserves the based fundamental group."""
        pts = (self.fold.project_path(points) if self.fold is not None
               else [int(p) for p in points])
        out = [pts[0]]
        for p in pts[1:]:
            if p != out[-1]:
                out.append(p)
        return out

    def word_of(self, points: Sequence[int]) -> Word:
        from .paths import ThetaPath, loop_to_word

        core = self.to_core(points)
        return loop_to_word(
            ThetaPath(self.space, self.theta, tuple(core)), self.tree)

    def class_of(self, points: Sequence[int]) -> tuple[int, ...]:
        word = self.word_of(points)
        return self.structure.coordinates(
            word_exponents(word, self.presentation.num_generators))

    def generator_loop(self, g: int) -> list[int]:
        """Based loop representing generator ``g``: tree path to the edge,
        across it, and back."""
        u, v = self.presentation.generators[g]
        down = self.tree.path_from_root(u)
        back = self.tree.path_from_root(v)
        return down + list(reversed(back))

    def loop_from_generator_exponents(self, vec: Sequence[int]) -> list[int]:
        """A based loop whose word has the given generator exponents."""
        loop = [self.basepoint]
        for g, e in enumerate(vec):
            if e == 0:
                continue
            piece = self.generator_loop(g)
            if e < 0:
                piece = list(reversed(piece))
            for _ in range(abs(e)):
                loop.extend(piece[1:])
        return loop

    def coordinate_loop(self, k: int) -> list[int]:
        """A based loop representing the k-th free coordinate of the
        abelianization."""
        vec = self.structure.basis_vector(len(self.structure.torsion) + k)
        return self.loop_from_generator_exponents(
            self._dense_gen_vector(vec))

    def _dense_gen_vector(self, sparse: dict[int, int]) -> list[int]:
        out = [0] * self.presentation.num_generators
        for g, e in sparse.items():
            out[g] = e
        return out


def analyze_scale(space: FiniteMetricSpace, theta: float,
                  basepoint: int | None = None, *, fold: bool = True,
                  also_keep: int | None = None,
                  relator_policy: str = "reduced") -> ScaleAnalysis:
    """Build the folded graph, tree, presentation and homology at one scale."""
    if basepoint is None:
        basepoint = space.basepoint
    graph = build_graph(space, theta)
    fold_result = fold_graph(graph, basepoint, also_keep) if fold else None
    core = fold_result.core if fold_result is not None else graph
    tree = spanning_tree(core, basepoint)
    pres = presentation_at_scale(space, theta, basepoint,
                                 relator_policy=relator_policy,
                                 graph=core, tree=tree)
    structure = h1_structure(pres)
    return ScaleAnalysis(space, float(theta), int(basepoint), core,
                         fold_result, tree, pres, structure,
                         abelianization(pres))


def _canon_vec(vec: Sequence[int], torsion: tuple[int, ...]) -> tuple[int, ...]:
    out = list(int(x) for x in vec)
    for i, d in enumerate(torsion):
        out[i] %= d
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ScaleMap:
    """The induced homomorphism on abelianizations from ``theta_from`` up to
    ``theta_to``, as a matrix in canonical coordinates, together with the
    word image of every source generator."""

    space_hash: str
    basepoint: int
    theta_from: float
    theta_to: float
    torsion_from: tuple[int, ...]
    rank_from: int
    torsion_to: tuple[int, ...]
    rank_to: int
    gen_words: tuple[Word, ...]
    matrix: tuple[tuple[int, ...], ...]

    @property
    def dim_from(self) -> int:
        return len(self.torsion_from) + self.rank_from

    @property
    def dim_to(self) -> int:
        return len(self.torsion_to) + self.rank_to

    def apply(self, coords: Sequence[int]) -> tuple[int, ...]:
        if len(coords) != self.dim_from:
            raise ValidationError(
                f"coordinate vector has length {len(coords)}, expected "
                f"{self.dim_from}")
        out = [sum(row[j] * int(coords[j]) for j in range(self.dim_from))
               for row in self.matrix]
        return _canon_vec(out, self.torsion_to)

    def free_block(self) -> list[list[int]]:
        """The free-to-free submatrix (torsion maps to torsion, so this block
        carries the whole rational rank)."""
        t_to, t_from = len(self.torsion_to), len(self.torsion_from)
        return [[int(x) for x in row[t_from:]] for row in self.matrix[t_to:]]

    def rank(self) -> int:
        """Rational rank of the induced map."""
        return matrix_rank(self.free_block())

    def kernel_rank(self) -> int:
        """Rational dimension of the kernel on free parts."""
        return self.rank_from - self.rank()

    def __repr__(self) -> str:  # pragma: no cover
        return (f"ScaleMap({self.theta_from!r} -> {self.theta_to!r}, "
                f"dim {self.dim_from} -> {self.dim_to}, rank {self.rank()})")


def induced_map(space: FiniteMetricSpace, theta_from: float, theta_to: float,
                basepoint: int | None = None, *,
                analyses: tuple[ScaleAnalysis, ScaleAnalysis] | None = None,
                ) -> ScaleMap:
    """Compute the map induced by growing the scale.

    Every source generator is realized as a based loop (tree path, non-tree
    edge, tree path back); the loop is still valid at the larger scale, gets
    pushed into the target core, and read off as a word there.  Matrix
    columns are the images of the canonical free basis classes.
    """
    if theta_from > theta_to:
        raise ValidationError(
            f"induced maps go from smaller to larger scale; got "
            f"{theta_from!r} > {theta_to!r}")
    if analyses is None:
        src = analyze_scale(space, theta_from, basepoint)
        dst = analyze_scale(space, theta_to, basepoint)
    else:
        src, dst = analyses
        if src.theta != float(theta_from) or dst.theta != float(theta_to):
            raise ValidationError("provided analyses do not match the scales")
    if src.basepoint != dst.basepoint:
        raise ValidationError("analyses use different basepoints")

    gen_words: list[Word] = []
    gen_classes: list[tuple[int, ...]] = []
    for g in range(src.presentation.num_generators):
        loop = src.generator_loop(g)
        word = dst.word_of(loop)
        gen_words.append(word)
        cls = dst.structure.coordinates(
            word_exponents(word, dst.presentation.num_generators))
        direct = dst.class_of(loop)
        if cls != direct:
            raise InternalCheckError(
                f"generator {g}: image class differs between word route "
                f"{cls} and direct route {direct}")
        gen_classes.append(cls)

    dim_from, dim_to = src.dim, dst.dim
    cols: list[tuple[int, ...]] = []
    for j in range(dim_from):
        rep = src.structure.basis_vector(j)  # sparse over source generators
        acc = [0] * dim_to
        for g, e in rep.items():
            for i in range(dim_to):
                acc[i] += e * gen_classes[g][i]
        cols.append(_canon_vec(acc, dst.structure.torsion))
    matrix = tuple(tuple(cols[j][i] for j in range(dim_from))
                   for i in range(dim_to))
    return ScaleMap(space.space_hash(), src.basepoint, float(theta_from),
                    float(theta_to), src.structure.torsion,
                    src.structure.rank, dst.structure.torsion,
                    dst.structure.rank, tuple(gen_words), matrix)


def compose(first: ScaleMap, second: ScaleMap) -> ScaleMap:
    """The composite map: ``first`` (smaller scales) followed by ``second``."""
    if first.space_hash != second.space_hash:
        raise ValidationError("maps belong to different spaces")
    if first.basepoint != second.basepoint:
        raise ValidationError("maps use different basepoints")
    if first.theta_to != second.theta_from:
        raise ValidationError(
            f"maps do not chain: first ends at {first.theta_to!r}, second "
            f"starts at {second.theta_from!r}")
    matrix = tuple(
        _canon_vec(
            [sum(second.matrix[i][k] * first.matrix[k][j]
                 for k in range(first.dim_to))
             for j in range(first.dim_from)],
            second.torsion_to)
        for i in range(second.dim_to))
    words = []
    for w in first.gen_words:
        out: list[int] = []
        for letter in w:
            img = second.gen_words[abs(letter) - 1]
            out.extend(img if letter > 0 else
                       tuple(-x for x in reversed(img)))
        words.append(tuple(out))
    return ScaleMap(first.space_hash, first.basepoint, first.theta_from,
                    second.theta_to, first.torsion_from, first.rank_from,
                    second.torsion_to, second.rank_to, tuple(words), matrix)


@dataclass
class ScaleTower:
    """Analyses at a descending grid of scales plus the adjacent induced maps
    (``maps[i]`` goes from ``scales[i+1]`` up to ``scales[i]``)."""

    space: FiniteMetricSpace
    basepoint: int
    scales: tuple[float, ...]
    analyses: list[ScaleAnalysis]
    maps: list[ScaleMap]
    _composed: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.scales)

    def analysis_at(self, theta: float) -> ScaleAnalysis:
        for a in self.analyses:
            if a.theta == theta:
                return a
        raise ValidationError(f"scale {theta!r} is not in the tower")

    def composed_map(self, i_from: int, i_to: int) -> ScaleMap:
        """Map from tower index ``i_from`` to coarser index ``i_to <= i_from``
        (indices follow the descending scale list)."""
        if not (0 <= i_to <= i_from < len(self.scales)):
            raise ValidationError(
                f"bad tower indices {i_from} -> {i_to}")
        if i_from == i_to:
            raise ValidationError("identity maps are not materialized")
        key = (i_from, i_to)
        if key not in self._composed:
            m = self.maps[i_from - 1]
            for k in range(i_from - 1, i_to, -1):
                m = compose(m, self.maps[k - 1])
            self._composed[key] = m
        return self._composed[key]


def resolve_scales(space: FiniteMetricSpace,
                   scales: str | Sequence[float]) -> list[float]:
    """Normalize a scale request to a descending list.

    ``"critical"`` takes midpoints between consecutive critical scales plus
    one value above the largest; an explicit sequence is deduplicated and
    sorted descending.
    """
    if isinstance(scales, str):
        if scales != "critical":
            raise ValidationError(f"unknown scale request {scales!r}")
        crit = critical_scales(space)
        if not crit:
            raise ValidationError("space has no positive distances")
        vals = [(a + b) / 2.0 for a, b in zip(crit, crit[1:])]
        vals.append(crit[-1] * 1.0625)
    else:
        vals = [float(s) for s in scales]
        for s in vals:
            if not (s > 0.0):
                raise ValidationError(f"scales must be positive, got {s!r}")
    out = sorted(set(vals), reverse=True)
    if not out:
        raise ValidationError("no scales to sweep")
    return out


def sweep(space: FiniteMetricSpace, scales: str | Sequence[float] = "critical",
          basepoint: int | None = None, *, fold: bool = True,
          relator_policy: str = "reduced") -> ScaleTower:
    """Analyze a grid of scales and connect consecutive ones by induced maps."""
    if basepoint is None:
        basepoint = space.basepoint
    grid = resolve_scales(space, scales)
    analyses = [analyze_scale(space, t, basepoint, fold=fold,
                              relator_policy=relator_policy) for t in grid]
    maps = [
        induced_map(space, grid[i + 1], grid[i], basepoint,
                    analyses=(analyses[i + 1], analyses[i]))
        for i in range(len(grid) - 1)
    ]
    return ScaleTower(space, int(basepoint), tuple(grid), analyses, maps)


# ---------------------------------------------------------------------------
# Barcode


@dataclass(frozen=True)
class Bar:
    """A persistence bar over the ascending scale grid: born at ``birth``,
    alive through scales < ``death`` (None = open-ended)."""

    birth: float
    death: float | None
    multiplicity: int


def barcode(tower: ScaleTower) -> list[Bar]:
    """Free-rank persistence over the tower's scales.

    Ranks of all composed maps between grid scales determine bar
    multiplicities; torsion is ignored (ranks are rational).  The number of
    bars covering any grid scale equals the free rank there.
    """
    L = len(tower.scales)
    asc = list(range(L - 1, -1, -1))  # tower indices, finest first

    def r(i: int, j: int) -> int:
        # ascending positions i <= j
        if i < 0 or j < 0:
            return 0
        if i == j:
            return tower.analyses[asc[i]].invariants.rank
        return tower.composed_map(asc[i], asc[j]).rank()

    scales_asc = [tower.scales[t] for t in asc]
    bars: list[Bar] = []
    for b in range(L):
        for d in range(b + 1, L):
            mult = r(b, d - 1) - r(b, d) - r(b - 1, d - 1) + r(b - 1, d)
            if mult < 0:
                raise InternalCheckError(
                    f"negative bar multiplicity at grid positions "
                    f"({b}, {d}): {mult}")
            if mult > 0:
                bars.append(Bar(scales_asc[b], scales_asc[d], mult))
        mult = r(b, L - 1) - r(b - 1, L - 1)
        if mult > 0:
            bars.append(Bar(scales_asc[b], None, mult))
    bars.sort(key=lambda bar: (bar.birth,
                               bar.death if bar.death is not None
                               else float("inf")))
    return bars


def bars_covering(bars: Sequence[Bar], theta: float) -> int:
    """Total multiplicity of bars whose interval [birth, death) contains theta."""
    total = 0
    for bar in bars:
        if bar.birth <= theta and (bar.death is None or theta < bar.death):
            total += bar.multiplicity
    return total


def barcode_to_csv(bars: Sequence[Bar], fh) -> None:
    fh.write("birth,death,multiplicity\n")
    for bar in bars:
        death = "inf" if bar.death is None else f"{bar.death:.17g}"
        fh.write(f"{bar.birth:.17g},{death},{bar.multiplicity}\n")


# ---------------------------------------------------------------------------
# Inverse-limit report


def inverse_limit_report(tower: ScaleTower, *,
                         max_witnesses: int = 8) -> dict:
    """How the finest scale maps into every coarser one.

    For each grid scale: the rank of the image from the finest scale, free
    basis classes missing from the image lattice (cokernel witnesses, each
    with a representative loop), and the kernel rank with verified witness
    loops that die.  The report describes the computed grid only; scales
    between grid points are not interpolated.
    """
    L = len(tower.scales)
    finest = L - 1
    per_scale: list[dict] = []
    image_ranks_asc: list[int] = []
    for pos, idx in enumerate(range(finest, -1, -1)):
        a = tower.analyses[idx]
        entry: dict = {
            "theta": tower.scales[idx],
            "rank": a.invariants.rank,
            "torsion": list(a.invariants.torsion),
        }
        if idx == finest:
            entry["image_rank_from_finest"] = a.invariants.rank
            entry["surjective_from_finest"] = True
            entry["kernel_rank_from_finest"] = 0
            entry["cokernel_witnesses"] = []
            entry["kernel_witnesses"] = []
            image_ranks_asc.append(a.invariants.rank)
            per_scale.append(entry)
            continue
        m = tower.composed_map(finest, idx)
        img_rank = m.rank()
        entry["image_rank_from_finest"] = img_rank
        entry["kernel_rank_from_finest"] = m.kernel_rank()
        image_ranks_asc.append(img_rank)

        # Image lattice: columns of the matrix plus the target torsion
        # relations d_i * e_i.
        aug = [list(row) for row in m.matrix]
        n_tor = len(m.torsion_to)
        for i, d in enumerate(m.torsion_to):
            col = [0] * m.dim_to
            col[i] = d
            for r_i in range(m.dim_to):
                aug[r_i].append(col[r_i])
        cok: list[dict] = []
        surjective = True
        for k in range(m.rank_to):
            j = n_tor + k
            e = [0] * m.dim_to
            e[j] = 1
            if in_column_lattice(aug, e):
                continue
            surjective = False
            if len(cok) < max_witnesses:
                cok.append({
                    "coordinate": j,
                    "class": e,
                    "representative_loop": a.coordinate_loop(k),
                })
        entry["surjective_from_finest"] = surjective
        entry["cokernel_witnesses"] = cok

        fine = tower.analyses[finest]
        n_tor_from = len(fine.structure.torsion)
        kernel_ws: list[dict] = []
        for vec in _free_kernel_vectors(m)[:max_witnesses]:
            gen_vec = [0] * fine.presentation.num_generators
            for k, c in enumerate(vec):
                if c == 0:
                    continue
                basis = fine.structure.basis_vector(n_tor_from + k)
                for g, e in basis.items():
                    gen_vec[g] += c * e
            loop = fine.loop_from_generator_exponents(gen_vec)
            mapped_class = a.class_of(loop)
            if any(mapped_class):
                raise InternalCheckError(
                    "kernel witness loop does not map to the trivial class")
            kernel_ws.append({
                "free_coordinates": list(vec),
                "loop": loop,
                "maps_to_zero": True,
            })
        entry["kernel_witnesses"] = kernel_ws
        per_scale.append(entry)

    stab_pos = len(image_ranks_asc) - 1
    while stab_pos > 0 and image_ranks_asc[stab_pos - 1] == image_ranks_asc[-1]:
        stab_pos -= 1
    report = {
        "note": ("computed over the swept grid from its finest scale; "
                 "ranks between grid scales are not interpolated"),
        "basepoint": tower.basepoint,
        "scales_descending": list(tower.scales),
        "finest_scale": tower.scales[finest],
        "per_scale_from_finest": per_scale,
        "image_ranks_from_finest": image_ranks_asc,
        "stabilization_position": stab_pos,
        "stabilization_scale": tower.scales[finest - stab_pos],
        "stable_image_rank": image_ranks_asc[-1],
    }
    return report


def _free_kernel_vectors(m: ScaleMap) -> list[list[int]]:
    """Integer basis of the rational kernel of the free block."""
    from .intlinalg import smith_normal_form

    block = m.free_block()
    if m.rank_from == 0:
        return []
    if not block or not block[0]:
        # target free part is zero: whole free domain is kernel
        return [[1 if j == k else 0 for j in range(m.rank_from)]
                for k in range(m.rank_from)]
    _, D, V = smith_normal_form(block)
    rank = sum(1 for i in range(min(len(D), len(D[0]))) if D[i][i] != 0)
    out = []
    for j in range(rank, m.rank_from):
        out.append([V[i][j] for i in range(m.rank_from)])
    return out
