import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

from src.common.errors import InvalidPlanError
from src.common.logger import get_module_logger, LogConfig, SAMPLER_STYLE_CONFIG
from ..core import Constraints, Plan, UnitGraph, boundary_units, validate

logger = get_module_logger("samplers", config=LogConfig.from_style(SAMPLER_STYLE_CONFIG))


@dataclass
class RebalanceResult:
    """再平衡的结果；success 为 False 时 plan 是尽力得到的方案"""

    plan: Plan
    success: bool
    moves: int = 0


def _squared_gap(pop: float, ideal: float) -> float:
    return (pop - ideal) ** 2


def rebalance(
    plan: Plan, graph: UnitGraph, constraints: Constraints, budget: int, rng: Optional[random.Random] = None
) -> RebalanceResult:
    """逐个移动边界单元，使人口平方偏差和下降，直到满足人口约束或用完预算

    每一步在所有保持连通的移动中选平方偏差下降最多的，并列时用 rng 打破。
    """
    if not plan.is_complete:
        raise InvalidPlanError("incomplete plan: 再平衡需要完整的方案")
    if plan.n_units != graph.n_units:
        raise InvalidPlanError("size mismatch: 方案与实例大小不一致")

    if validate(plan, graph, constraints).valid:
        return RebalanceResult(plan, True, 0)

    ideal = constraints.ideal(graph.total_population)
    labels = list(plan.assignment)
    pops = [0] * plan.k
    members: List[set] = [set() for _ in range(plan.k)]
    for uid, label in enumerate(labels):
        pops[label] += graph.populations[uid]
        members[label].add(uid)

    moves = 0
    while moves < budget:
        current = Plan(tuple(labels), plan.k)
        if validate(current, graph, constraints).valid:
            return RebalanceResult(current, True, moves)

        best: List[Tuple[int, int, int]] = []
        best_delta = 0.0
        for unit in sorted(boundary_units(current, graph)):
            src = labels[unit]
            if len(members[src]) == 1:
                continue
            p = graph.populations[unit]
            targets = sorted({labels[v] for v in graph.neighbors(unit)} - {src})
            connected_after: Optional[bool] = None
            for dst in targets:
                delta = (
                    _squared_gap(pops[src] - p, ideal)
                    + _squared_gap(pops[dst] + p, ideal)
                    - _squared_gap(pops[src], ideal)
                    - _squared_gap(pops[dst], ideal)
                )
                if delta > best_delta + 1e-9:
                    continue
                if connected_after is None:
                    connected_after = graph.is_connected_set(members[src] - {unit})
                if not connected_after:
                    break
                if delta < best_delta - 1e-9:
                    best, best_delta = [(unit, src, dst)], delta
                else:
                    best.append((unit, src, dst))

        if not best or best_delta >= 0:
            break
        unit, src, dst = rng.choice(best) if rng is not None else best[0]
        labels[unit] = dst
        members[src].discard(unit)
        members[dst].add(unit)
        pops[src] -= graph.populations[unit]
        pops[dst] += graph.populations[unit]
        moves += 1

    final = Plan(tuple(labels), plan.k)
    success = validate(final, graph, constraints).valid
    if not success:
        logger.debug(f"再平衡失败：{moves} 步后仍不满足约束")
    return RebalanceResult(final, success, moves)
