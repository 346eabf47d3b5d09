"""Discrete fundamental groups of finite metric spaces at a scale.

The package builds neighborhood graphs at a scale, presents the fundamental
group of closed paths modulo grid homotopies, abelianizes it exactly over
the integers, connects the groups across scales into towers and barcodes,
and decides individual homotopy questions with verifiable certificates.
"""

from __future__ import annotations

from .errors import (BudgetExhausted, InternalCheckError, ThetapiError,
                     ValidationError)
from .spaces import (GENERATORS, TAU_METRIC, FiniteMetricSpace, PolylinePath,
                     gen_annulus, gen_circle, gen_circle_product,
                     gen_circle_tree, gen_hawaiian_earring,
                     gen_hawaiian_window, gen_sine_space, gen_telescope,
                     load_polyline, load_space, save_polyline, save_space,
                     validate_metric_matrix, validate_space)
from .kernels import backend_name
from .theta_graph import (FoldResult, SpanningTree, ThetaGraph, build_graph,
                          components, critical_scales, fold_graph,
                          short_cycles, spanning_tree, square_cells,
                          triangle_cells, write_dot, write_edges_csv)
from .paths import (GridHomotopy, ThetaPath, VerificationReport, concat,
                    delazify, discretize, discretize_positions,
                    homotopy_from_json, homotopy_to_json, invert, lazify,
                    load_homotopy, load_path, loop_to_word, make_path,
                    path_from_json, path_to_json, refinement_certificate,
                    save_homotopy, save_path, validate_path,
                    verify_grid_homotopy)
from .intlinalg import (QuotientStructure, in_column_lattice, matrix_rank,
                        quotient_of_rows, reference_snf_diagonal,
                        smith_normal_form, snf_diagonal)
from .presentation import (AbelianInvariants, GroupPresentation, Word,
                           abelianization, canonical_cyclic, class_of_loop,
                           cyclic_reduce, exponent_matrix, free_reduce,
                           h1_structure, invert_word, presentation_at_scale,
                           simplify_with_rewriter, tietze_simplify,
                           word_exponents)
from .scale_maps import (Bar, ScaleAnalysis, ScaleMap, ScaleTower,
                         analyze_scale, barcode, barcode_to_csv,
                         bars_covering, compose, induced_map,
                         inverse_limit_report, resolve_scales, sweep)
from .decider import (DeciderResult, are_homotopic, is_nullhomotopic,
                      short_loop_contraction)
from .oracle import brute_force_h1, compare_all_scales, compare_at_scale

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "ThetapiError", "ValidationError", "BudgetExhausted", "InternalCheckError",
    # spaces
    "FiniteMetricSpace", "PolylinePath", "TAU_METRIC", "GENERATORS",
    "gen_circle", "gen_hawaiian_earring", "gen_telescope",
    "gen_circle_product", "gen_hawaiian_window", "gen_sine_space",
    "gen_annulus", "gen_circle_tree", "save_space", "load_space",
    "save_polyline", "load_polyline", "validate_space",
    "validate_metric_matrix",
    # graphs
    "ThetaGraph", "build_graph", "components", "SpanningTree",
    "spanning_tree", "triangle_cells", "square_cells", "short_cycles",
    "critical_scales", "FoldResult", "fold_graph", "write_dot",
    "write_edges_csv", "backend_name",
    # paths
    "ThetaPath", "make_path", "validate_path", "lazify", "delazify",
    "concat", "invert", "GridHomotopy", "VerificationReport",
    "verify_grid_homotopy", "loop_to_word", "discretize",
    "discretize_positions", "refinement_certificate", "path_to_json",
    "path_from_json", "homotopy_to_json", "homotopy_from_json", "save_path",
    "load_path", "save_homotopy", "load_homotopy",
    # integer linear algebra
    "smith_normal_form", "snf_diagonal", "reference_snf_diagonal",
    "matrix_rank", "in_column_lattice", "QuotientStructure",
    "quotient_of_rows",
    # presentations
    "Word", "GroupPresentation", "AbelianInvariants", "free_reduce",
    "cyclic_reduce", "invert_word", "canonical_cyclic",
    "presentation_at_scale", "exponent_matrix", "h1_structure",
    "abelianization", "word_exponents", "class_of_loop", "tietze_simplify",
    "simplify_with_rewriter",
    # scale maps
    "ScaleAnalysis", "analyze_scale", "ScaleMap", "induced_map", "compose",
    "ScaleTower", "resolve_scales", "sweep", "Bar", "barcode",
    "bars_covering", "barcode_to_csv", "inverse_limit_report",
    # decider
    "DeciderResult", "is_nullhomotopic", "are_homotopic",
    "short_loop_contraction",
    # oracle
    "brute_force_h1", "compare_at_scale", "compare_all_scales",
]
