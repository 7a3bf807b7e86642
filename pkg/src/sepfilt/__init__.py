"""Separating filtrations, rainbow censuses, and ball-volume bounds."""

__version__ = "0.1.0"

from .complexes import (
    Ball,
    ComplexGeometry,
    MetricGraph,
    Subpolyhedron,
    WeightedComplex,
    simplex_volume,
    total_area,
)
from .filtration import (
    Filtration,
    SeparationConfig,
    build_filtration,
    is_r_separating,
    minimize_separating,
    sphere_replacement_move,
)
from .rainbow import (
    Chain,
    LevelColoring,
    boundary,
    color_by_filtration,
    count_rainbow,
    refine_with_filtration,
    straighten,
)
from .bounds import (
    BoundReport,
    bound_report,
    coarea_check,
    estimate_v1,
    greedy_packing,
    point_density_check,
)
from .cantor import (
    ClopenAlgebra,
    ThickOrbit,
    greedy_equivariant_packing,
    independent_partition,
    parametrized_l1_norm,
    pattern_partition,
    thick_area,
    thick_rainbow_weight,
)

__all__ = [
    "Ball",
    "BoundReport",
    "Chain",
    "ClopenAlgebra",
    "ComplexGeometry",
    "Filtration",
    "LevelColoring",
    "MetricGraph",
    "SeparationConfig",
    "Subpolyhedron",
    "ThickOrbit",
    "WeightedComplex",
    "bound_report",
    "boundary",
    "build_filtration",
    "coarea_check",
    "color_by_filtration",
    "count_rainbow",
    "estimate_v1",
    "greedy_equivariant_packing",
    "greedy_packing",
    "independent_partition",
    "is_r_separating",
    "minimize_separating",
    "parametrized_l1_norm",
    "pattern_partition",
    "point_density_check",
    "refine_with_filtration",
    "simplex_volume",
    "sphere_replacement_move",
    "straighten",
    "thick_area",
    "thick_rainbow_weight",
    "total_area",
    "__version__",
]
