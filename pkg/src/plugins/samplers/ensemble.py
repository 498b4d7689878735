import math
import random
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Callable, Dict, Optional, Union

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, SAMPLER_STYLE_CONFIG
from ..core import Constraints, UnitGraph
from ..utils.timer_calculater import Timer
from .flood_fill import flood_fill
from .merge import iterative_merge
from .policy import FloodFillPolicy
from .rejection import Generator, SampleRun, random_assignment, rejection_sample

logger = get_module_logger("samplers", config=LogConfig.from_style(SAMPLER_STYLE_CONFIG))

GeneratorFactory = Callable[..., Generator]


def _random_assignment_factory(graph: UnitGraph, constraints: Constraints, **_) -> Generator:
    return partial(random_assignment, graph, constraints.k)


def _flood_fill_factory(
    graph: UnitGraph, constraints: Constraints, policy: Optional[FloodFillPolicy] = None, **_
) -> Generator:
    policy = policy or FloodFillPolicy()
    policy.check(graph, constraints.k)

    def generate(rng: random.Random):
        return flood_fill(graph, constraints, policy, rng)

    return generate


def _merge_factory(graph: UnitGraph, constraints: Constraints, rebalance_budget: int = 2000, **_) -> Generator:
    def generate(rng: random.Random):
        return iterative_merge(graph, constraints, rng, rebalance_budget)

    return generate


GENERATORS: Dict[str, GeneratorFactory] = {
    "random_assignment": _random_assignment_factory,
    "flood_fill": _flood_fill_factory,
    "iterative_merge": _merge_factory,
}


def register_generator(name: str, factory: GeneratorFactory) -> None:
    """注册额外的生成器（几何方法等在各自模块里注册）"""
    GENERATORS[name] = factory


def make_generator(name: str, graph: UnitGraph, constraints: Constraints, **options) -> Generator:
    if name not in GENERATORS:
        raise PolicyConfigError(f"未知的生成器 {name}，可选 {sorted(GENERATORS)}")
    return GENERATORS[name](graph, constraints, **options)


def chunk_seed(seed: int, index: int) -> int:
    """第 index 块使用的种子，只依赖总种子和块号"""
    return seed * 1_000_003 + index


def sample_ensemble(
    generator: Union[str, Generator],
    graph: UnitGraph,
    constraints: Constraints,
    count: int,
    seed: int,
    threads: int = 1,
    chunk_size: int = 500,
    max_attempts_per_chunk: Optional[int] = None,
    **options,
) -> SampleRun:
    """并行采样 count 个合法方案

    按固定大小分块，每块用派生种子独立做拒绝采样，最后按块号顺序合并，
    因此结果与线程数无关。
    """
    name = generator if isinstance(generator, str) else getattr(generator, "__name__", "custom")
    gen = make_generator(generator, graph, constraints, **options) if isinstance(generator, str) else generator
    n_chunks = max(1, math.ceil(count / chunk_size))

    def run_chunk(index: int) -> SampleRun:
        target = min(chunk_size, count - index * chunk_size)
        limit = max_attempts_per_chunk or max(1, target) * 1000
        return rejection_sample(
            gen,
            graph,
            constraints,
            limit,
            random.Random(chunk_seed(seed, index)),
            target=target,
            seed=chunk_seed(seed, index),
            algorithm=name,
        )

    merged = SampleRun(seed=seed, algorithm=name)
    with Timer(f"采样 {name}") as timer:
        if count <= 0:
            chunks = []
        elif threads <= 1:
            chunks = [run_chunk(i) for i in range(n_chunks)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(pool.map(run_chunk, range(n_chunks)))
    for chunk in chunks:
        merged.extend(chunk)

    logger.success(
        f"{name}: 得到 {merged.successes}/{count} 个方案，尝试 {merged.attempts} 次，"
        f"接受率 {merged.acceptance_rate:.4f}，耗时 {timer.human_readable}"
    )
    return merged
