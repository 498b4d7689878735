from .ensemble import GENERATORS, chunk_seed, make_generator, register_generator, sample_ensemble
from .flood_fill import flood_fill
from .merge import iterative_merge, merge_regions, regions_to_plan
from .policy import (
    DISTRICT_BY_DISTRICT,
    SEED_BOUNDARY,
    SEED_UNIFORM,
    SEED_ZONES,
    SPREAD_BOUNDING_BOX,
    SPREAD_COUNTY,
    SPREAD_UNIFORM,
    WHOLE_PLAN,
    FloodFillPolicy,
)
from .refine import RebalanceResult, rebalance
from .rejection import Generator, SampleRun, random_assignment, rejection_sample

__all__ = [
    "GENERATORS",
    "chunk_seed",
    "make_generator",
    "register_generator",
    "sample_ensemble",
    "flood_fill",
    "iterative_merge",
    "merge_regions",
    "regions_to_plan",
    "DISTRICT_BY_DISTRICT",
    "SEED_BOUNDARY",
    "SEED_UNIFORM",
    "SEED_ZONES",
    "SPREAD_BOUNDING_BOX",
    "SPREAD_COUNTY",
    "SPREAD_UNIFORM",
    "WHOLE_PLAN",
    "FloodFillPolicy",
    "RebalanceResult",
    "rebalance",
    "Generator",
    "SampleRun",
    "random_assignment",
    "rejection_sample",
]
