from .geography import UnitGraph
from .plan import UNASSIGNED, Constraints, Plan, plan_from_districts
from .scoring import (
    ScoreReport,
    boundary_units,
    county_splits,
    cut_edge_indicators,
    cut_edges,
    district_populations,
    is_contiguous,
    is_valid,
    max_deviation,
    validate,
)

__all__ = [
    "UnitGraph",
    "UNASSIGNED",
    "Constraints",
    "Plan",
    "plan_from_districts",
    "ScoreReport",
    "boundary_units",
    "county_splits",
    "cut_edge_indicators",
    "cut_edges",
    "district_populations",
    "is_contiguous",
    "is_valid",
    "max_deviation",
    "validate",
]
