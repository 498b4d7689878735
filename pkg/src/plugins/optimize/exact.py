"""最少切边的精确求解

目标是整数规划"最小化切边数，每个选区人口在 [lo, hi] 内"，这里不调外部求解器，
而是专门写的分支定界：

- 默认（要求连通）：以选区为单位分支。每层取剩余单元中编号最小的一个，枚举包含它
  的连通可行选区。下界 = 已确定的切边 + 剩余部分拆成 r 块至少要切的 r − 连通分量数 条边。
- allow_discontiguous：以单元为单位分支，按度数降序给单元分配标签，标签规范化以消除
  选区对称。下界 = 两端都已分配的切边 + 每个未分配单元至少要切掉的、通向已分配邻居的边。

两种方式都用 recombination 链的结果做初始上界。时间或节点预算用完时返回当前最好方案
以及所有未展开节点下界的最小值。
"""

import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from src.common.errors import BudgetExceededError, PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, OPTIMIZE_STYLE_CONFIG
from ..chains import StepKind, recom_seed_plan
from ..core import Constraints, Plan, UnitGraph, cut_edges, validate
from ..enumeration import DEFAULT_NODE_BUDGET, PlanEnumerator
from ..utils.timer_calculater import Timer
from .mode_hill_climb import hill_climb
from .objective import Objective

logger = get_module_logger("optimize", config=LogConfig.from_style(OPTIMIZE_STYLE_CONFIG))

PROVEN_OPTIMAL = "proven_optimal"
INCUMBENT = "incumbent"
LOWER_BOUND = "lower_bound"
INFEASIBLE = "infeasible"

WARM_START_STEPS = 200


@dataclass
class ExactResult:
    """plan 为 None 时 status 是 lower_bound（预算内没找到可行解）或 infeasible"""

    plan: Optional[Plan]
    cut_edges: Optional[int]
    status: str
    lower_bound: Optional[int]
    nodes: int = 0
    elapsed: float = 0.0

    @property
    def proven(self) -> bool:
        return self.status == PROVEN_OPTIMAL

    def to_dict(self) -> Dict:
        return {
            "cut_edges": self.cut_edges,
            "status": self.status,
            "lower_bound": self.lower_bound,
            "nodes": self.nodes,
            "elapsed": round(self.elapsed, 3),
        }


class SolverAdapter(ABC):
    """外部整数规划求解器的接口，目前没有实现"""

    name = ""

    @abstractmethod
    def solve(self, graph: UnitGraph, constraints: Constraints, time_budget: float) -> ExactResult:
        """返回与 exact_min_cut_edges 相同含义的结果"""


class _SearchStopped(Exception):
    pass


def _warm_start(
    graph: UnitGraph,
    constraints: Constraints,
    warm_start: Optional[Plan],
    rng: random.Random,
) -> Tuple[Optional[Plan], Optional[int]]:
    best: Optional[Plan] = None
    best_cut: Optional[int] = None
    if warm_start is not None:
        if warm_start.k == constraints.k and validate(warm_start, graph, constraints).valid:
            best, best_cut = warm_start, cut_edges(warm_start, graph)
        else:
            logger.debug("传入的初始方案在当前约束下不合法，忽略")
    seed = recom_seed_plan(graph, constraints, rng)
    if seed is not None:
        polished = hill_climb(seed, graph, constraints, Objective(), StepKind.RECOM, WARM_START_STEPS, rng).plan
        value = cut_edges(polished, graph)
        if best_cut is None or value < best_cut:
            best, best_cut = polished, value
    if best_cut is not None:
        logger.debug(f"初始上界 {best_cut} 条切边")
    return best, best_cut


class _DistrictSearch:
    """以连通选区为单位的分支定界"""

    def __init__(self, graph: UnitGraph, constraints: Constraints, node_budget: int):
        self.graph = graph
        self.enum = PlanEnumerator(graph, constraints, node_budget)
        self.m = graph.n_edges

    def _components(self, mask: int) -> int:
        count = 0
        rest = mask
        while rest:
            rest &= ~self.enum._closure(rest & -rest, mask)
            count += 1
        return count

    def _bound(self, internal: int, rest: int, r: int) -> int:
        return self.m - internal - self.enum._internal_edges(rest) + max(0, r - self._components(rest))

    def run(self, timer: Timer, best: Optional[Plan], best_cut: Optional[int]):
        enum = self.enum
        k = enum.constraints.k
        full = enum._full
        if k == 1:
            if enum._feasible(full, 1):
                plan = Plan((0,) * self.graph.n_units, 1)
                return plan, self.m - enum._internal_edges(full), []
            return best, best_cut, []
        if not enum._feasible(full, k):
            return best, best_cut, []

        stack: List[Tuple[int, int, int, int, Tuple[int, ...]]] = [(self._bound(0, full, k), full, k, 0, ())]
        try:
            while stack:
                node = None
                if timer.expired:
                    raise _SearchStopped
                node = stack.pop()
                lb, mask, r, internal, chosen = node
                if best_cut is not None and lb >= best_cut:
                    continue
                children = []
                for d_mask, d_int in enum.districts_from(mask):
                    rest = mask & ~d_mask
                    if not enum._feasible(rest, r - 1):
                        continue
                    total = internal + d_int
                    if r - 1 == 1:
                        value = self.m - total - enum._internal_edges(rest)
                        if best_cut is None or value < best_cut:
                            best_cut = value
                            best = enum._plan_of(list(chosen) + [d_mask, rest])
                            logger.debug(f"新的最好解：{best_cut} 条切边，下界节点 {enum.nodes}")
                        continue
                    child_lb = self._bound(total, rest, r - 1)
                    if best_cut is None or child_lb < best_cut:
                        children.append((child_lb, rest, r - 1, total, chosen + (d_mask,)))
                children.sort(key=lambda node: node[0], reverse=True)
                stack.extend(children)
        except (_SearchStopped, BudgetExceededError):
            if node is not None:
                stack.append(node)
            return best, best_cut, [node[0] for node in stack]
        return best, best_cut, []

    @property
    def nodes(self) -> int:
        return self.enum.nodes


class _UnitSearch:
    """以单元为单位的分支定界，允许不连通的选区"""

    def __init__(self, graph: UnitGraph, constraints: Constraints, node_budget: int):
        self.graph = graph
        self.k = constraints.k
        self.lo, self.hi = constraints.population_bounds(graph.total_population)
        self.order = sorted(range(graph.n_units), key=lambda u: (-graph.degree(u), u))
        self.node_budget = node_budget
        self.nodes = 0

    def _bound(self, labels: List[int], cut: int) -> int:
        extra = 0
        for u in range(self.graph.n_units):
            if labels[u] >= 0:
                continue
            counts: Dict[int, int] = {}
            assigned = 0
            for v in self.graph.neighbors(u):
                if labels[v] >= 0:
                    assigned += 1
                    counts[labels[v]] = counts.get(labels[v], 0) + 1
            extra += assigned - max(counts.values(), default=0)
        return cut + extra

    def _population_ok(self, pops: Tuple[int, ...], remaining_pop: int, remaining_units: int, used: int) -> bool:
        if any(p > self.hi for p in pops):
            return False
        if remaining_units < self.k - used:
            return False
        return sum(max(0.0, self.lo - p) for p in pops) <= remaining_pop

    def run(self, timer: Timer, best: Optional[Plan], best_cut: Optional[int]):
        graph = self.graph
        n, k = graph.n_units, self.k
        if k > n:
            return best, best_cut, []
        total = graph.total_population
        # (下界, 深度, 标签, 各选区人口, 已用标签数, 已确定切边)
        start = ([-1] * n, (0,) * k, 0, 0)
        stack = [(0, 0) + start]
        try:
            while stack:
                node = None
                if timer.expired:
                    raise _SearchStopped
                self.nodes += 1
                if self.nodes > self.node_budget:
                    raise BudgetExceededError(f"搜索节点超过上限 {self.node_budget}")
                node = stack.pop()
                lb, depth, labels, pops, used, cut = node
                if best_cut is not None and lb >= best_cut:
                    continue
                if depth == n:
                    if used == k and all(p >= self.lo for p in pops):
                        best_cut, best = cut, Plan(tuple(labels), k)
                        logger.debug(f"新的最好解：{best_cut} 条切边")
                    continue
                u = self.order[depth]
                remaining_pop = total - sum(pops) - graph.populations[u]
                children = []
                for label in range(min(used + 1, k)):
                    new_pops = list(pops)
                    new_pops[label] += graph.populations[u]
                    new_used = max(used, label + 1)
                    if not self._population_ok(tuple(new_pops), remaining_pop, n - depth - 1, new_used):
                        continue
                    new_labels = list(labels)
                    new_labels[u] = label
                    new_cut = cut + sum(1 for v in graph.neighbors(u) if labels[v] >= 0 and labels[v] != label)
                    child_lb = self._bound(new_labels, new_cut)
                    if best_cut is None or child_lb < best_cut:
                        children.append((child_lb, depth + 1, new_labels, tuple(new_pops), new_used, new_cut))
                children.sort(key=lambda node: node[0], reverse=True)
                stack.extend(children)
        except (_SearchStopped, BudgetExceededError):
            if node is not None:
                stack.append(node)
            return best, best_cut, [node[0] for node in stack]
        return best, best_cut, []


def exact_min_cut_edges(
    graph: UnitGraph,
    constraints: Constraints,
    time_budget: Optional[float] = 300.0,
    warm_start: Optional[Plan] = None,
    allow_discontiguous: bool = False,
    node_budget: Optional[int] = None,
    seed: int = 0,
) -> ExactResult:
    """最少切边数；搜索树在预算内走完时 status 为 proven_optimal

    lower_bound 总是不超过返回方案的切边数，证明最优时两者相等。
    """
    if time_budget is not None and time_budget <= 0:
        raise PolicyConfigError("时间预算必须为正")
    constraints = Constraints(constraints.k, constraints.deviation, not allow_discontiguous)
    rng = random.Random(seed)
    node_budget = node_budget or DEFAULT_NODE_BUDGET

    with Timer("精确求解", budget=time_budget) as timer:
        best, best_cut = _warm_start(graph, constraints, warm_start, rng)
        if allow_discontiguous:
            search = _UnitSearch(graph, constraints, node_budget)
        else:
            search = _DistrictSearch(graph, constraints, node_budget)
        best, best_cut, open_bounds = search.run(timer, best, best_cut)

    if not open_bounds:
        if best is None:
            status, lower = INFEASIBLE, None
        else:
            status, lower = PROVEN_OPTIMAL, best_cut
    else:
        lower = min(open_bounds)
        if best is None:
            status = LOWER_BOUND
        else:
            status = INCUMBENT
            lower = min(lower, best_cut)

    result = ExactResult(best, best_cut, status, lower, search.nodes, timer.elapsed or 0.0)
    logger.info(
        f"{graph.name}: k={constraints.k}, 偏差 {constraints.deviation} 下最少切边 {best_cut}（{status}，"
        f"下界 {lower}），节点 {result.nodes}，耗时 {timer.human_readable}"
    )
    return result
