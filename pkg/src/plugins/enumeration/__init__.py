from .enumerator import (
    DEFAULT_NODE_BUDGET,
    EnumerationResult,
    PlanEnumerator,
    cut_edge_distribution,
    enumerate_plans,
    iter_plans,
)

__all__ = [
    "DEFAULT_NODE_BUDGET",
    "EnumerationResult",
    "PlanEnumerator",
    "cut_edge_distribution",
    "enumerate_plans",
    "iter_plans",
]
