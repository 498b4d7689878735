from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, OPTIMIZE_STYLE_CONFIG
from ..core import Constraints, Plan, UnitGraph
from .exact import INFEASIBLE, LOWER_BOUND, PROVEN_OPTIMAL, exact_min_cut_edges

logger = get_module_logger("optimize", config=LogConfig.from_style(OPTIMIZE_STYLE_CONFIG))


@dataclass
class ParetoPoint:
    """一个人口偏差上限下的最少切边；status 为 lower_bound 时 cut_edges 只是下界"""

    deviation: float
    cut_edges: int
    status: str
    lower_bound: Optional[int] = None
    plan: Optional[Plan] = None

    def dominates(self, other: "ParetoPoint") -> bool:
        return (
            self.deviation <= other.deviation
            and self.cut_edges <= other.cut_edges
            and (self.deviation < other.deviation or self.cut_edges < other.cut_edges)
        )

    def to_row(self) -> Dict:
        return {
            "deviation": self.deviation,
            "cut_edges": self.cut_edges,
            "status": self.status,
            "lower_bound": self.lower_bound,
        }


def pareto_sweep(
    graph: UnitGraph,
    k: int,
    deviations: Sequence[float],
    time_budget_each: Optional[float] = 60.0,
    keep_dominated: bool = False,
    allow_discontiguous: bool = False,
    seed: int = 0,
) -> List[ParetoPoint]:
    """按偏差从小到大逐个精确求解，每次用上一个点的方案做初始上界

    偏差越大可行集越大，上一个方案在下一次一定仍然可行。默认丢掉被支配的点。
    """
    if list(deviations) != sorted(deviations):
        raise PolicyConfigError("偏差列表必须升序")
    points: List[ParetoPoint] = []
    previous: Optional[Plan] = None
    for deviation in deviations:
        constraints = Constraints(k, deviation, not allow_discontiguous)
        result = exact_min_cut_edges(
            graph,
            constraints,
            time_budget_each,
            warm_start=previous,
            allow_discontiguous=allow_discontiguous,
            seed=seed,
        )
        if result.status == INFEASIBLE:
            logger.info(f"偏差 {deviation} 下没有可行方案")
            continue
        if result.plan is None:
            points.append(ParetoPoint(deviation, result.lower_bound, LOWER_BOUND, result.lower_bound))
            continue
        previous = result.plan
        points.append(ParetoPoint(deviation, result.cut_edges, result.status, result.lower_bound, result.plan))

    if not keep_dominated:
        # 只有下界的点不参与支配判断
        solved = [p for p in points if p.status != LOWER_BOUND]
        points = [p for p in points if p.status == LOWER_BOUND or not any(q.dominates(p) for q in solved)]
    proven = sum(1 for p in points if p.status == PROVEN_OPTIMAL)
    logger.success(f"{graph.name}: Pareto 扫描得到 {len(points)} 个点，其中 {proven} 个已证明最优")
    return points
