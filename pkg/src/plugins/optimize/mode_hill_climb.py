import random
from typing import Iterable, Optional

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, OPTIMIZE_STYLE_CONFIG
from ..chains import StepKind, apply_move, neighbor_moves, take_step
from ..core import Constraints, Plan, UnitGraph
from .objective import Objective, OptimizeResult
from .optimizer import BaseOptimizer, check_start

logger = get_module_logger("optimize", config=LogConfig.from_style(OPTIMIZE_STYLE_CONFIG))

_EPS = 1e-12


def hill_climb(
    start: Plan,
    graph: UnitGraph,
    constraints: Constraints,
    objective: Objective,
    neighborhood: StepKind = StepKind.FLIP,
    max_steps: int = 10_000,
    rng: Optional[random.Random] = None,
    stall_limit: int = 200,
) -> OptimizeResult:
    """只接受严格变好的移动

    翻转 / 交换邻域按随机顺序逐个尝试全部候选，一轮都没有改进即为局部最优；
    重组邻域无法穷举，连续 stall_limit 次提议没有改进就停。每尝试一个候选算一步。
    """
    check_start(start, graph, constraints)
    kind = StepKind.parse(neighborhood)
    rng = rng or random.Random(0)
    current = start
    score = objective.score(current, graph, constraints)
    start_score = score
    trace = [score]
    steps = 0

    while steps < max_steps:
        improved = False
        moves = neighbor_moves(kind, current, graph)
        if moves is None:
            for _ in range(stall_limit):
                if steps >= max_steps:
                    break
                steps += 1
                candidate = take_step(kind, current, graph, constraints, rng)
                if candidate is current:
                    continue
                value = objective.score(candidate, graph, constraints)
                if value < score - _EPS:
                    current, score, improved = candidate, value, True
                    break
        else:
            rng.shuffle(moves)
            for move in moves:
                if steps >= max_steps:
                    break
                steps += 1
                candidate = apply_move(kind, current, graph, constraints, move)
                if candidate is None:
                    continue
                value = objective.score(candidate, graph, constraints)
                if value < score - _EPS:
                    current, score, improved = candidate, value, True
                    break
        if not improved:
            break
        trace.append(score)

    logger.debug(f"爬山结束：{start_score:g} -> {score:g}，共 {steps} 步")
    return OptimizeResult(current, score, start_score, "hill_climb", steps, trace)


def multi_start_hill_climb(
    starts: Iterable[Plan],
    graph: UnitGraph,
    constraints: Constraints,
    objective: Objective,
    neighborhood: StepKind = StepKind.FLIP,
    max_steps: int = 10_000,
    rng: Optional[random.Random] = None,
) -> OptimizeResult:
    """从多个起点分别爬山，保留最好的局部最优（相同时保留先出现的）"""
    rng = rng or random.Random(0)
    best: Optional[OptimizeResult] = None
    runs = 0
    for start in starts:
        result = hill_climb(start, graph, constraints, objective, neighborhood, max_steps, rng)
        runs += 1
        if best is None or result.score < best.score:
            best = result
    if best is None:
        raise PolicyConfigError("多起点爬山至少需要一个起点")
    best.method = "multi_start_hill_climb"
    best.extra["restarts"] = runs
    logger.info(f"多起点爬山：{runs} 个起点，最好目标值 {best.score:g}")
    return best


class HillClimbOptimizer(BaseOptimizer):
    method = "hill_climb"

    def optimize(self, start: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random) -> OptimizeResult:
        return hill_climb(start, graph, constraints, self.objective, self.neighborhood, self.config.max_steps, rng)
