import random

from ..core import Constraints, UnitGraph
from ..samplers import register_generator
from .runner import CONVERGENCE_CAVEAT, ChainConfig, hamming_autocorrelation, run_chain, run_chains
from .spanning import DEFAULT_RETRIES, bipartition_tree, random_spanning_tree, recom_seed_plan
from .steps import (
    StepKind,
    apply_flip,
    apply_move,
    apply_swap,
    flip_moves,
    flip_step,
    neighbor_moves,
    recom_step,
    swap_moves,
    swap_step,
    take_step,
)


def _recom_seed_factory(graph: UnitGraph, constraints: Constraints, recom_retries: int = DEFAULT_RETRIES, **_):
    def generate(rng: random.Random):
        return recom_seed_plan(graph, constraints, rng, recom_retries)

    return generate


register_generator("recom_seed", _recom_seed_factory)

__all__ = [
    "CONVERGENCE_CAVEAT",
    "ChainConfig",
    "hamming_autocorrelation",
    "run_chain",
    "run_chains",
    "DEFAULT_RETRIES",
    "bipartition_tree",
    "random_spanning_tree",
    "recom_seed_plan",
    "StepKind",
    "apply_flip",
    "apply_move",
    "apply_swap",
    "flip_moves",
    "flip_step",
    "neighbor_moves",
    "recom_step",
    "swap_moves",
    "swap_step",
    "take_step",
]
