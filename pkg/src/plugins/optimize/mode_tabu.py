import random
from collections import deque
from typing import Deque, Optional, Set, Tuple

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, OPTIMIZE_STYLE_CONFIG
from ..chains import StepKind, apply_move, neighbor_moves, take_step
from ..core import Constraints, Plan, UnitGraph
from .objective import Objective, OptimizeResult
from .optimizer import BaseOptimizer, check_start

logger = get_module_logger("optimize", config=LogConfig.from_style(OPTIMIZE_STYLE_CONFIG))


def _sample_neighbors(kind: StepKind, plan: Plan, graph: UnitGraph, constraints: Constraints, samples: int, rng):
    moves = neighbor_moves(kind, plan, graph)
    if moves is not None:
        if len(moves) > samples:
            moves = rng.sample(moves, samples)
        for move in moves:
            candidate = apply_move(kind, plan, graph, constraints, move)
            if candidate is not None:
                yield candidate
        return
    for _ in range(samples):
        candidate = take_step(kind, plan, graph, constraints, rng)
        if candidate is not plan:
            yield candidate


def tabu_search(
    start: Plan,
    graph: UnitGraph,
    constraints: Constraints,
    objective: Objective,
    tenure: int = 50,
    max_steps: int = 10_000,
    rng: Optional[random.Random] = None,
    samples: int = 20,
    neighborhood: StepKind = StepKind.FLIP,
) -> OptimizeResult:
    """每步在抽到的邻居中移到最好的非禁忌方案，即便它更差

    最近 tenure 个访问过的方案（按规范形式）是禁忌的；没有非禁忌邻居时提前停止。
    """
    if tenure < 1 or samples < 1:
        raise PolicyConfigError("禁忌长度与采样数都至少为 1")
    check_start(start, graph, constraints)
    kind = StepKind.parse(neighborhood)
    rng = rng or random.Random(0)

    current = best = start
    score = best_score = objective.score(start, graph, constraints)
    start_score = score
    recent: Deque[Tuple[int, ...]] = deque([start.canonical_form()], maxlen=tenure)
    tabu: Set[Tuple[int, ...]] = set(recent)
    trace = [score]
    trajectory = [start]
    steps = 0

    while steps < max_steps:
        chosen: Optional[Plan] = None
        chosen_score = 0.0
        for candidate in _sample_neighbors(kind, current, graph, constraints, samples, rng):
            key = candidate.canonical_form()
            if key in tabu:
                continue
            value = objective.score(candidate, graph, constraints)
            if chosen is None or value < chosen_score:
                chosen, chosen_score = candidate, value
        if chosen is None:
            logger.debug(f"第 {steps} 步没有非禁忌邻居，禁忌搜索提前结束")
            break
        steps += 1
        current, score = chosen, chosen_score
        if len(recent) == recent.maxlen:
            tabu.discard(recent[0])
        recent.append(current.canonical_form())
        tabu.add(recent[-1])
        trace.append(score)
        trajectory.append(current)
        if score < best_score:
            best, best_score = current, score

    logger.debug(f"禁忌搜索结束：{start_score:g} -> {best_score:g}，共 {steps} 步")
    return OptimizeResult(best, best_score, start_score, "tabu", steps, trace, trajectory, {"tenure": tenure})


class TabuOptimizer(BaseOptimizer):
    method = "tabu"

    def optimize(self, start: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random) -> OptimizeResult:
        return tabu_search(
            start,
            graph,
            constraints,
            self.objective,
            self.config.tabu_tenure,
            self.config.max_steps,
            rng,
            self.config.tabu_samples,
            self.neighborhood,
        )
