"""DEM estimation from syndrome statistics."""

from .closed_form import (
    Flags,
    boundary_from_moment,
    estimate_boundary,
    estimate_bulk_pair,
    pair_from_moments,
    subtract_hyperedge,
)
from .correlators import CorrelatorTable, accumulate, table_from_distribution
from .disambiguation import disambiguate, disambiguate_boundary_logical, shot_pattern_frequencies
from .pipeline import EstimationReport, EstimatorOptions, discover_regions, estimate_dem, estimate_from_table
from .regions import (
    RegionEquations,
    RegionSolution,
    RegionSystem,
    build_region_equations,
    initial_guess,
    solve_region,
)
from .skeleton import DemSkeleton

__all__ = [
    "CorrelatorTable",
    "DemSkeleton",
    "EstimationReport",
    "EstimatorOptions",
    "Flags",
    "RegionEquations",
    "RegionSolution",
    "RegionSystem",
    "accumulate",
    "boundary_from_moment",
    "build_region_equations",
    "disambiguate",
    "disambiguate_boundary_logical",
    "discover_regions",
    "estimate_boundary",
    "estimate_bulk_pair",
    "estimate_dem",
    "estimate_from_table",
    "initial_guess",
    "pair_from_moments",
    "shot_pattern_frequencies",
    "solve_region",
    "subtract_hyperedge",
    "table_from_distribution",
]
