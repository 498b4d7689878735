import random

from ..core import Constraints, UnitGraph
from ..samplers import register_generator
from .diagram import (
    GeometricPartition,
    Hub,
    balance_power_diagram,
    lloyd_kmeans,
    power_assign,
    random_hubs,
    snap_to_units,
)
from .splitline import SAMPLE, SHORTEST, SplitLine, SplitlineResult, split_region, splitline


def _power_factory(graph: UnitGraph, constraints: Constraints, max_iters: int = 500, power_step: float = 0.5, **_):
    def generate(rng: random.Random):
        partition = balance_power_diagram(graph, constraints.k, constraints, max_iters, rng, power_step)
        if not partition.balanced:
            return None
        return snap_to_units(partition, graph, constraints)

    return generate


def _splitline_factory(graph: UnitGraph, constraints: Constraints, angles: int = 180, **_):
    def generate(rng: random.Random):
        return splitline(graph, constraints, rng, angles, SAMPLE)

    return generate


register_generator("power", _power_factory)
register_generator("splitline", _splitline_factory)

__all__ = [
    "GeometricPartition",
    "Hub",
    "balance_power_diagram",
    "lloyd_kmeans",
    "power_assign",
    "random_hubs",
    "snap_to_units",
    "SAMPLE",
    "SHORTEST",
    "SplitLine",
    "SplitlineResult",
    "split_region",
    "splitline",
]
