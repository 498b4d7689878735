from .ensemble import Ensemble
from .export import (
    edge_frequency_to_frame,
    histogram_to_frame,
    load_ensemble,
    save_ensemble,
    save_frame,
)
from .stats import (
    DivergenceReport,
    EdgeFrequency,
    MeanComparison,
    compare_means,
    compare_to_oracle,
    cut_edge_histogram,
    distinct_plans,
    edge_frequency,
    uniform_resample,
)

__all__ = [
    "Ensemble",
    "edge_frequency_to_frame",
    "histogram_to_frame",
    "load_ensemble",
    "save_ensemble",
    "save_frame",
    "DivergenceReport",
    "EdgeFrequency",
    "MeanComparison",
    "compare_means",
    "compare_to_oracle",
    "cut_edge_histogram",
    "distinct_plans",
    "edge_frequency",
    "uniform_resample",
]
