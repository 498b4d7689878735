import math
import random
from dataclasses import dataclass
from typing import Optional

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, OPTIMIZE_STYLE_CONFIG
from ..chains import StepKind, take_step
from ..config.config import LabConfig
from ..core import Constraints, Plan, UnitGraph
from .objective import Objective, OptimizeResult
from .optimizer import BaseOptimizer, check_start

logger = get_module_logger("optimize", config=LogConfig.from_style(OPTIMIZE_STYLE_CONFIG))


@dataclass(frozen=True)
class AnnealSchedule:
    """几何降温：每个温度走 steps_per_temperature 步，然后 T *= cooling，低于 min_temperature 停止"""

    initial_temperature: float = 2.0
    cooling: float = 0.99
    steps_per_temperature: int = 100
    min_temperature: float = 1e-3

    def __post_init__(self):
        if self.initial_temperature <= 0 or self.min_temperature <= 0:
            raise PolicyConfigError("温度必须为正")
        if not 0 < self.cooling < 1:
            raise PolicyConfigError(f"降温系数必须在 (0, 1) 内，当前为 {self.cooling}")
        if self.steps_per_temperature < 1:
            raise PolicyConfigError("每个温度至少走一步")

    @classmethod
    def from_config(cls, config: LabConfig) -> "AnnealSchedule":
        return cls(
            config.initial_temperature, config.cooling, config.steps_per_temperature, config.min_temperature
        )


def simulated_annealing(
    start: Plan,
    graph: UnitGraph,
    constraints: Constraints,
    objective: Objective,
    schedule: Optional[AnnealSchedule] = None,
    rng: Optional[random.Random] = None,
    neighborhood: StepKind = StepKind.FLIP,
    max_steps: Optional[int] = None,
) -> OptimizeResult:
    """Metropolis 接受：变差 delta 时以 exp(-delta/T) 的概率接受；返回全程最好的方案"""
    check_start(start, graph, constraints)
    schedule = schedule or AnnealSchedule()
    kind = StepKind.parse(neighborhood)
    rng = rng or random.Random(0)

    current = best = start
    score = best_score = objective.score(start, graph, constraints)
    start_score = score
    trace = []
    steps = accepted = 0
    temperature = schedule.initial_temperature

    while temperature >= schedule.min_temperature:
        for _ in range(schedule.steps_per_temperature):
            if max_steps is not None and steps >= max_steps:
                break
            steps += 1
            candidate = take_step(kind, current, graph, constraints, rng)
            if candidate is current:
                continue
            value = objective.score(candidate, graph, constraints)
            delta = value - score
            if delta <= 0 or rng.random() < math.exp(-delta / temperature):
                current, score = candidate, value
                accepted += 1
                if score < best_score:
                    best, best_score = current, score
        trace.append(score)
        if max_steps is not None and steps >= max_steps:
            break
        temperature *= schedule.cooling

    logger.debug(f"退火结束：{start_score:g} -> {best_score:g}，{steps} 步，接受 {accepted} 次，终止温度 {temperature:.4g}")
    return OptimizeResult(
        best,
        best_score,
        start_score,
        "anneal",
        steps,
        trace,
        extra={"accepted": accepted, "final_temperature": temperature},
    )


class AnnealOptimizer(BaseOptimizer):
    method = "anneal"

    def optimize(self, start: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random) -> OptimizeResult:
        schedule = AnnealSchedule.from_config(self.config)
        return simulated_annealing(
            start, graph, constraints, self.objective, schedule, rng, self.neighborhood, self.config.max_steps
        )
