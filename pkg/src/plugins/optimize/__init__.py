from .exact import (
    INCUMBENT,
    INFEASIBLE,
    LOWER_BOUND,
    PROVEN_OPTIMAL,
    ExactResult,
    SolverAdapter,
    exact_min_cut_edges,
)
from .mode_anneal import AnnealOptimizer, AnnealSchedule, simulated_annealing
from .mode_evolution import EvolutionOptimizer, common_refinement, crossover, evolutionary
from .mode_hill_climb import HillClimbOptimizer, hill_climb, multi_start_hill_climb
from .mode_tabu import TabuOptimizer, tabu_search
from .objective import CUT_EDGES, TERMS, WEIGHTED_SUM, Objective, OptimizeResult
from .optimizer import METHODS, BaseOptimizer, check_start
from .pareto import ParetoPoint, pareto_sweep

__all__ = [
    "INCUMBENT",
    "INFEASIBLE",
    "LOWER_BOUND",
    "PROVEN_OPTIMAL",
    "ExactResult",
    "SolverAdapter",
    "exact_min_cut_edges",
    "AnnealOptimizer",
    "AnnealSchedule",
    "simulated_annealing",
    "EvolutionOptimizer",
    "common_refinement",
    "crossover",
    "evolutionary",
    "HillClimbOptimizer",
    "hill_climb",
    "multi_start_hill_climb",
    "TabuOptimizer",
    "tabu_search",
    "CUT_EDGES",
    "TERMS",
    "WEIGHTED_SUM",
    "Objective",
    "OptimizeResult",
    "METHODS",
    "BaseOptimizer",
    "check_start",
    "ParetoPoint",
    "pareto_sweep",
]
