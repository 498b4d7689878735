from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.common.errors import PolicyConfigError
from ..core import Constraints, Plan, UnitGraph, county_splits, cut_edges, max_deviation

CUT_EDGES = "cut_edges"
WEIGHTED_SUM = "weighted_sum"

TERMS = ("cut_edges", "population_deviation", "county_splits")


@dataclass(frozen=True)
class Objective:
    """最小化的目标

    cut_edges 只看切边数；weighted_sum 是切边数、人口偏差、跨县数的非负加权和。
    """

    kind: str = CUT_EDGES
    weights: Dict[str, float] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.kind not in (CUT_EDGES, WEIGHTED_SUM):
            raise PolicyConfigError(f"未知的目标类型 {self.kind}")
        if self.kind == WEIGHTED_SUM:
            unknown = set(self.weights) - set(TERMS)
            if unknown:
                raise PolicyConfigError(f"未知的目标项 {sorted(unknown)}，可选 {TERMS}")
            if any(w < 0 for w in self.weights.values()):
                raise PolicyConfigError("目标权重必须非负")
            if not any(w > 0 for w in self.weights.values()):
                raise PolicyConfigError("至少需要一个正的目标权重")

    @classmethod
    def weighted(cls, **weights: float) -> "Objective":
        return cls(WEIGHTED_SUM, dict(weights))

    @classmethod
    def parse(cls, text: str) -> "Objective":
        """命令行格式：cut_edges 或 weighted_sum:cut_edges=1,population_deviation=100"""
        text = text.strip()
        if text == CUT_EDGES:
            return cls()
        kind, _, body = text.partition(":")
        if kind != WEIGHTED_SUM or not body:
            raise PolicyConfigError(f"无法解析目标 {text}")
        weights = {}
        for item in body.split(","):
            name, _, value = item.partition("=")
            try:
                weights[name.strip()] = float(value)
            except ValueError as e:
                raise PolicyConfigError(f"目标权重 {item} 不是数字") from e
        return cls(WEIGHTED_SUM, weights)

    def score(self, plan: Plan, graph: UnitGraph, constraints: Constraints) -> float:
        if self.kind == CUT_EDGES:
            return float(cut_edges(plan, graph))
        total = 0.0
        w = self.weights.get("cut_edges", 0.0)
        if w:
            total += w * cut_edges(plan, graph)
        w = self.weights.get("population_deviation", 0.0)
        if w:
            total += w * max_deviation(plan, graph, constraints)
        w = self.weights.get("county_splits", 0.0)
        if w:
            total += w * county_splits(plan, graph)
        return total

    def describe(self) -> str:
        if self.kind == CUT_EDGES:
            return CUT_EDGES
        return WEIGHTED_SUM + ":" + ",".join(f"{k}={v:g}" for k, v in sorted(self.weights.items()))


@dataclass
class OptimizeResult:
    """优化结果；plan 是搜索过程中见过的最好方案

    trace 的含义随方法而定：爬山是每次接受后的目标值，退火是每个温度结束时的
    当前目标值，禁忌搜索是每一步的目标值，进化是每代的最好目标值。
    """

    plan: Plan
    score: float
    start_score: float
    method: str
    steps: int = 0
    trace: List[float] = field(default_factory=list)
    trajectory: Optional[List[Plan]] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "score": self.score,
            "start_score": self.start_score,
            "steps": self.steps,
            **self.extra,
        }
