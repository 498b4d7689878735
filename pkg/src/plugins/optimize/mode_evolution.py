import random
from typing import List, Optional, Sequence, Set, Tuple

from src.common.errors import InvalidStartError, PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, OPTIMIZE_STYLE_CONFIG
from ..chains import StepKind, recom_seed_plan, take_step
from ..core import Constraints, Plan, UnitGraph, validate
from ..samplers import merge_regions, rebalance, regions_to_plan
from .objective import Objective, OptimizeResult
from .optimizer import BaseOptimizer, check_start

logger = get_module_logger("optimize", config=LogConfig.from_style(OPTIMIZE_STYLE_CONFIG))


def common_refinement(a: Plan, b: Plan, graph: UnitGraph) -> List[Set[int]]:
    """两个方案的公共细分：标签对 (a[u], b[u]) 相同且在图上连通的单元构成一块"""
    if a.n_units != b.n_units or a.n_units != graph.n_units:
        raise PolicyConfigError("父代方案与实例大小不一致")
    seen = [False] * graph.n_units
    regions: List[Set[int]] = []
    for root in range(graph.n_units):
        if seen[root]:
            continue
        key = (a[root], b[root])
        seen[root] = True
        region = {root}
        stack = [root]
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                if not seen[v] and (a[v], b[v]) == key:
                    seen[v] = True
                    region.add(v)
                    stack.append(v)
        regions.append(region)
    return regions


def crossover(
    a: Plan,
    b: Plan,
    graph: UnitGraph,
    constraints: Constraints,
    rng: random.Random,
    rebalance_budget: int = 2000,
) -> Optional[Plan]:
    """公共细分后合并回 k 块再平衡；得不到合法方案时返回 None"""
    regions = merge_regions(graph, common_refinement(a, b, graph), constraints.k, rng)
    if regions is None:
        return None
    child = regions_to_plan(regions, graph.n_units, constraints.k)
    result = rebalance(child, graph, constraints, rebalance_budget, rng)
    if result.success and validate(result.plan, graph, constraints).valid:
        return result.plan
    return None


def evolutionary(
    population: Sequence[Plan],
    graph: UnitGraph,
    constraints: Constraints,
    objective: Objective,
    generations: int = 200,
    rng: Optional[random.Random] = None,
    mutation: StepKind = StepKind.FLIP,
    mutate: bool = True,
    rebalance_budget: int = 2000,
) -> OptimizeResult:
    """每代两两交叉产生子代（可选再走一步变异），父子合在一起按目标值截断选择

    排序是稳定的，目标值相同时先出现的个体优先保留。
    """
    if len(population) < 2:
        raise PolicyConfigError("进化搜索的种群至少需要两个方案")
    for index, member in enumerate(population):
        report = validate(member, graph, constraints)
        if not report.valid:
            raise InvalidStartError(f"种群第 {index} 个方案不合法: {', '.join(report.reasons)}")
    kind = StepKind.parse(mutation)
    rng = rng or random.Random(0)
    size = len(population)

    scored: List[Tuple[float, Plan]] = [(objective.score(p, graph, constraints), p) for p in population]
    scored.sort(key=lambda item: item[0])
    start_score = scored[0][0]
    trace = [start_score]
    trace_max = [scored[-1][0]]
    children_made = 0

    for generation in range(generations):
        offspring: List[Tuple[float, Plan]] = []
        for _ in range(size):
            i, j = rng.sample(range(len(scored)), 2)
            child = crossover(scored[i][1], scored[j][1], graph, constraints, rng, rebalance_budget)
            if child is None:
                continue
            if mutate:
                child = take_step(kind, child, graph, constraints, rng)
            offspring.append((objective.score(child, graph, constraints), child))
        children_made += len(offspring)
        scored = sorted(scored + offspring, key=lambda item: item[0])[:size]
        trace.append(scored[0][0])
        trace_max.append(scored[-1][0])
        logger.trace(f"第 {generation + 1} 代：{len(offspring)} 个子代，最好 {scored[0][0]:g}")

    best_score, best = scored[0]
    logger.debug(f"进化搜索结束：{start_score:g} -> {best_score:g}，{generations} 代")
    return OptimizeResult(
        best,
        best_score,
        start_score,
        "evolution",
        generations,
        trace,
        extra={"population": size, "children": children_made, "trace_max": trace_max},
    )


def _seed_population(start: Plan, graph: UnitGraph, constraints: Constraints, size: int, rng) -> List[Plan]:
    members = [start]
    seen: Set[Tuple[int, ...]] = {start.canonical_form()}
    attempts = 0
    while len(members) < size and attempts < size * 20:
        attempts += 1
        plan = recom_seed_plan(graph, constraints, rng)
        if plan is not None and plan.canonical_form() not in seen:
            seen.add(plan.canonical_form())
            members.append(plan)
    while len(members) < size:
        members.append(take_step(StepKind.RECOM, members[-1], graph, constraints, rng))
    return members


class EvolutionOptimizer(BaseOptimizer):
    method = "evolution"

    def optimize(self, start: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random) -> OptimizeResult:
        check_start(start, graph, constraints)
        population = _seed_population(start, graph, constraints, max(2, self.config.population_size), rng)
        return evolutionary(
            population,
            graph,
            constraints,
            self.objective,
            self.config.generations,
            rng,
            self.neighborhood,
            rebalance_budget=self.config.rebalance_budget,
        )
