"""Finite-scale Assouad/star and lower dimension toolkit on b-adic
cube trees: exact counting estimators and constructive extraction of
subsets with prescribed dimension estimates."""

from .core import (BadicCube, CubeTree, DomainError, PointSet,
                   SetFormatError, Window, WindowedSet,
                   leaf_representatives, read_bdt, read_wdt, subdivide,
                   tree_from_digit_rule, write_bdt, write_wdt)
from .estimators import (DimensionReport, ScaleRecord, ball_cover_count,
                         count_hit_subcubes, h_star, lower_dimension_report,
                         packing_count, star_dimension_report,
                         verify_cover_pack_sandwich)
from .extract_assouad import (ConstructionTrace, PruneParams,
                              check_gap_condition, construct_subset_assouad,
                              construct_subset_assouad_global,
                              find_dense_window, prune, sandwich_assemble)
from .extract_lower import (BallTree, LowerParams, construct_subset_lower,
                            select_packing_children, verify_lower_bounds)
from .generators import (GeneratorSpec, generate, oracle_exact_cover,
                         oracle_exact_hstar, oracle_exact_packing,
                         random_branching_tree)

__version__ = "1.0.0"

__all__ = [
    "BadicCube", "CubeTree", "DomainError", "PointSet", "SetFormatError",
    "Window", "WindowedSet", "leaf_representatives", "read_bdt", "read_wdt",
    "subdivide", "tree_from_digit_rule", "write_bdt", "write_wdt",
    "DimensionReport", "ScaleRecord", "ball_cover_count",
    "count_hit_subcubes", "h_star", "lower_dimension_report",
    "packing_count", "star_dimension_report", "verify_cover_pack_sandwich",
    "ConstructionTrace", "PruneParams", "check_gap_condition",
    "construct_subset_assouad", "construct_subset_assouad_global",
    "find_dense_window", "prune", "sandwich_assemble",
    "BallTree", "LowerParams", "construct_subset_lower",
    "select_packing_children", "verify_lower_bounds",
    "GeneratorSpec", "generate", "oracle_exact_cover", "oracle_exact_hstar",
    "oracle_exact_packing", "random_branching_tree",
    "__version__",
]
