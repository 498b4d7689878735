import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from src.common.logger import get_module_logger, LogConfig, SAMPLER_STYLE_CONFIG
from ..core import Constraints, Plan, UnitGraph, validate

logger = get_module_logger("samplers", config=LogConfig.from_style(SAMPLER_STYLE_CONFIG))

# 生成器：给定随机数发生器，返回一个方案或 None（拒绝）
Generator = Callable[[random.Random], Optional[Plan]]


@dataclass
class SampleRun:
    """一次拒绝采样的记录；plans 中的每个方案都通过了 validate"""

    seed: Optional[int] = None
    attempts: int = 0
    successes: int = 0
    plans: List[Plan] = field(default_factory=list)
    algorithm: str = ""

    @property
    def acceptance_rate(self) -> float:
        return self.successes / self.attempts if self.attempts else 0.0

    @property
    def empty(self) -> bool:
        return self.successes == 0

    def extend(self, other: "SampleRun") -> None:
        self.attempts += other.attempts
        self.successes += other.successes
        self.plans.extend(other.plans)

    def to_dict(self) -> Dict:
        return {
            "seed": self.seed,
            "algorithm": self.algorithm,
            "attempts": self.attempts,
            "successes": self.successes,
            "acceptance_rate": self.acceptance_rate,
        }


def random_assignment(graph: UnitGraph, k: int, rng: random.Random) -> Plan:
    """每个单元独立均匀地选一个选区"""
    return Plan(tuple(rng.randrange(k) for _ in range(graph.n_units)), k)


def rejection_sample(
    generator: Generator,
    graph: UnitGraph,
    constraints: Constraints,
    max_attempts: int,
    rng: random.Random,
    target: int = 1,
    seed: Optional[int] = None,
    algorithm: str = "",
) -> SampleRun:
    """反复调用生成器，丢弃不合法的方案，直到拿到 target 个合法方案或用完尝试次数

    一个都没拿到时返回空的 SampleRun，不抛异常。
    """
    if max_attempts < 1:
        raise ValueError("max_attempts 必须 >= 1")
    run = SampleRun(seed=seed, algorithm=algorithm)
    while run.attempts < max_attempts and run.successes < target:
        run.attempts += 1
        plan = generator(rng)
        if plan is None:
            continue
        if validate(plan, graph, constraints).valid:
            run.successes += 1
            run.plans.append(plan)
    if run.empty:
        logger.warning(f"{algorithm or '采样'}: {run.attempts} 次尝试没有得到任何合法方案")
    else:
        logger.debug(f"{algorithm or '采样'}: 接受率 {run.acceptance_rate:.4f} ({run.successes}/{run.attempts})")
    return run
