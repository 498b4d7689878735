"""穷举所有合法方案

以"剩余单元集合"为状态做记忆化搜索：每一步取剩余集合中编号最小的单元，
枚举包含它的所有连通且人口可行的选区，再对剩余部分递归。这样生成的选区
天然按最小单元编号排序，每个无标签划分只出现一次。

记忆表存的是"内部边数 → 方案数"的直方图，切边数 = m − 内部边总数，
所以计数和直方图都不需要真正展开方案。
"""

import bisect
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from src.common.errors import BudgetExceededError, DistrictLabError
from src.common.logger import get_module_logger, LogConfig, ENUMERATE_STYLE_CONFIG
from ..core import Constraints, Plan, UnitGraph
from ..utils.timer_calculater import Timer

logger = get_module_logger("enumerate", config=LogConfig.from_style(ENUMERATE_STYLE_CONFIG))

# 默认节点上限：6x6 分 4 个选区可以跑完，10x10 会被拒绝
DEFAULT_NODE_BUDGET = 50_000_000

Histogram = Dict[int, int]


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass
class EnumerationResult:
    """枚举结果

    histogram 的键是切边数。partial 为 True 时 count 只是已完成分支的计数，不能当作答案。
    """

    count: int
    histogram: Histogram
    plans: Optional[List[Plan]] = None
    partial: bool = False
    nodes: int = 0
    elapsed: float = 0.0
    instance: str = ""
    constraints: Optional[Constraints] = None
    enumerator: Optional["PlanEnumerator"] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict:
        return {
            "instance": self.instance,
            "count": self.count,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "partial": self.partial,
            "nodes": self.nodes,
        }


class PlanEnumerator:
    """在一个实例 + 约束上做记忆化枚举

    同一个对象可以反复计数、流式输出方案、按均匀分布抽样，共享记忆表。
    """

    def __init__(self, graph: UnitGraph, constraints: Constraints, node_budget: int = DEFAULT_NODE_BUDGET):
        self.graph = graph
        self.constraints = constraints
        self.node_budget = node_budget
        self.nodes = 0
        self.lo, self.hi = constraints.population_bounds(graph.total_population)
        self._nbr = graph.neighbor_masks
        self._pop = graph.populations
        self._full = (1 << graph.n_units) - 1
        self._memo: Dict[Tuple[int, int], Histogram] = {}
        self._choices: Dict[Tuple[int, int], Tuple[List[int], List[int]]] = {}

    # ---- 位掩码工具 ----

    def _mask_pop(self, mask: int) -> int:
        total = 0
        while mask:
            low = mask & -mask
            total += self._pop[low.bit_length() - 1]
            mask ^= low
        return total

    def _closure(self, start: int, avail: int) -> int:
        """start 在 avail 内能到达的所有单元"""
        reach = start
        frontier = start
        while frontier:
            grow = 0
            m = frontier
            while m:
                low = m & -m
                grow |= self._nbr[low.bit_length() - 1]
                m ^= low
            grow &= avail & ~reach
            reach |= grow
            frontier = grow
        return reach

    def _internal_edges(self, mask: int) -> int:
        twice = 0
        m = mask
        while m:
            low = m & -m
            twice += _popcount(self._nbr[low.bit_length() - 1] & mask)
            m ^= low
        return twice // 2

    def _tick(self, amount: int = 1) -> None:
        self.nodes += amount
        if self.nodes > self.node_budget:
            raise BudgetExceededError(
                f"combinatorial explosion guard: 搜索节点超过上限 {self.node_budget}",
            )

    # ---- 可行性剪枝 ----

    def _district_count_range(self, pop: int, size: int) -> Tuple[int, int]:
        """一个连通分量能容纳的选区数范围 [cmin, cmax]"""
        cmin = max(1, math.ceil(pop / self.hi)) if self.hi > 0 else size + 1
        cmax = size if self.lo <= 0 else min(size, math.floor(pop / self.lo))
        return cmin, cmax

    def _feasible(self, mask: int, districts: int) -> bool:
        if districts == 0:
            return mask == 0
        if mask == 0:
            return False
        lo_sum = hi_sum = 0
        rest = mask
        while rest:
            comp = self._closure(rest & -rest, mask)
            rest &= ~comp
            cmin, cmax = self._district_count_range(self._mask_pop(comp), _popcount(comp))
            if cmin > cmax:
                return False
            lo_sum += cmin
            hi_sum += cmax
            if lo_sum > districts:
                return False
        return lo_sum <= districts <= hi_sum

    # ---- 选区生成 ----

    def districts_from(self, mask: int) -> List[Tuple[int, int]]:
        """mask 中包含最小单元的所有连通、人口可行的子集

        用"加入 / 排除"二叉分支：每个连通子集恰好在最后一个单元被加入时产出一次。
        返回 (子集掩码, 内部边数)，顺序确定。
        """
        out: List[Tuple[int, int]] = []
        seed = mask & -mask
        sid = seed.bit_length() - 1
        lo, hi = self.lo, self.hi
        nbr = self._nbr
        pop = self._pop
        # (S, pop(S), 内部边数, 候选边界, 已排除, 是否新加入)
        stack = [(seed, pop[sid], 0, nbr[sid] & mask, 0, True)]
        while stack:
            s_mask, s_pop, s_int, frontier, excluded, fresh = stack.pop()
            self._tick()
            if s_pop > hi:
                continue
            if fresh and s_pop >= lo:
                out.append((s_mask, s_int))
            if not frontier:
                continue
            avail = mask & ~excluded
            if s_pop < lo:
                reach = self._closure(s_mask, avail)
                if s_pop + self._mask_pop(reach & ~s_mask) < lo:
                    continue
            v = frontier & -frontier
            vid = v.bit_length() - 1
            stack.append((s_mask, s_pop, s_int, frontier & ~v, excluded | v, False))
            grown = s_mask | v
            stack.append(
                (
                    grown,
                    s_pop + pop[vid],
                    s_int + _popcount(nbr[vid] & s_mask),
                    (frontier & ~v) | (nbr[vid] & avail & ~grown),
                    excluded,
                    True,
                )
            )
        return out

    # ---- 记忆化计数 ----

    def solve(self, mask: int, districts: int) -> Histogram:
        """把 mask 划分成 districts 个选区的内部边数直方图"""
        key = (mask, districts)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        result: Histogram = {}
        if districts == 0:
            result = {0: 1} if mask == 0 else {}
        elif mask == 0:
            result = {}
        elif districts == 1:
            self._tick()
            seed = mask & -mask
            if self._closure(seed, mask) == mask and self.lo <= self._mask_pop(mask) <= self.hi:
                result = {self._internal_edges(mask): 1}
        else:
            acc: Dict[int, int] = defaultdict(int)
            for d_mask, d_int in self.districts_from(mask):
                rest = mask & ~d_mask
                if (rest, districts - 1) not in self._memo and not self._feasible(rest, districts - 1):
                    continue
                for internal, count in self.solve(rest, districts - 1).items():
                    acc[internal + d_int] += count
            result = dict(acc)
        self._memo[key] = result
        return result

    def count_of(self, mask: int, districts: int) -> int:
        return sum(self.solve(mask, districts).values())

    def to_cut_histogram(self, internal_hist: Histogram) -> Histogram:
        m = self.graph.n_edges
        return {m - internal: count for internal, count in sorted(internal_hist.items(), reverse=True)}

    # ---- 流式输出与均匀抽样 ----

    def _plan_of(self, district_masks: List[int]) -> Plan:
        labels = [0] * self.graph.n_units
        for label, d_mask in enumerate(district_masks):
            m = d_mask
            while m:
                low = m & -m
                labels[low.bit_length() - 1] = label
                m ^= low
        return Plan(tuple(labels), len(district_masks))

    def _walk(self, mask: int, districts: int) -> Iterator[List[int]]:
        if districts == 0:
            if mask == 0:
                yield []
            return
        if districts == 1:
            if self.solve(mask, 1):
                yield [mask]
            return
        for d_mask, _ in self.districts_from(mask):
            rest = mask & ~d_mask
            if not self.solve(rest, districts - 1):
                continue
            for tail in self._walk(rest, districts - 1):
                yield [d_mask] + tail

    def iter_plans(self) -> Iterator[Plan]:
        """按确定顺序产出每个合法方案（选区按最小单元编号标号）"""
        for masks in self._walk(self._full, self.constraints.k):
            yield self._plan_of(masks)

    def _weighted_choices(self, mask: int, districts: int) -> Tuple[List[int], List[int]]:
        key = (mask, districts)
        cached = self._choices.get(key)
        if cached is None:
            options: List[int] = []
            cumulative: List[int] = []
            running = 0
            for d_mask, _ in self.districts_from(mask):
                weight = self.count_of(mask & ~d_mask, districts - 1)
                if weight:
                    running += weight
                    options.append(d_mask)
                    cumulative.append(running)
            cached = (options, cumulative)
            self._choices[key] = cached
        return cached

    def sample_uniform(self, rng: random.Random) -> Plan:
        """按完成方案数加权逐个选区抽取，结果在所有合法方案上严格均匀"""
        mask, districts = self._full, self.constraints.k
        if self.count_of(mask, districts) == 0:
            raise DistrictLabError("没有合法方案，无法均匀抽样")
        chosen: List[int] = []
        while districts > 1:
            options, cumulative = self._weighted_choices(mask, districts)
            pick = rng.randrange(cumulative[-1])
            d_mask = options[bisect.bisect_right(cumulative, pick)]
            chosen.append(d_mask)
            mask &= ~d_mask
            districts -= 1
        chosen.append(mask)
        return self._plan_of(chosen)


def enumerate_plans(
    graph: UnitGraph,
    constraints: Constraints,
    collect: bool = False,
    node_budget: int = DEFAULT_NODE_BUDGET,
    progress_every: int = 1000,
) -> EnumerationResult:
    """枚举所有完整、连通、人口可行的无标签划分

    超出 node_budget 时抛出 BudgetExceededError，其 partial 字段是标记为 partial 的结果。
    """
    if not constraints.require_contiguity:
        logger.warning("枚举总是要求选区连通，require_contiguity=False 被忽略")
    enumerator = PlanEnumerator(graph, constraints, node_budget)
    k = constraints.k
    full = enumerator._full
    acc: Dict[int, int] = defaultdict(int)

    with Timer("枚举") as timer:
        try:
            if k == 1 or graph.n_units == 0:
                for internal, count in enumerator.solve(full, k).items():
                    acc[internal] += count
            else:
                branches = enumerator.districts_from(full)
                logger.info(f"{graph.name}: k={k}, 第一个选区共有 {len(branches)} 种候选")
                for i, (d_mask, d_int) in enumerate(branches, start=1):
                    rest = full & ~d_mask
                    if enumerator._feasible(rest, k - 1):
                        for internal, count in enumerator.solve(rest, k - 1).items():
                            acc[internal + d_int] += count
                    if progress_every and i % progress_every == 0:
                        logger.info(f"进度 {i}/{len(branches)}，已计数 {sum(acc.values())}，节点 {enumerator.nodes}")
                enumerator._memo[(full, k)] = dict(acc)
        except BudgetExceededError as e:
            partial = EnumerationResult(
                count=sum(acc.values()),
                histogram=enumerator.to_cut_histogram(acc),
                partial=True,
                nodes=enumerator.nodes,
                elapsed=timer.running,
                instance=graph.name,
                constraints=constraints,
            )
            logger.error(f"{graph.name}: 枚举超出节点上限，已计数 {partial.count}（不完整）")
            raise BudgetExceededError(str(e), partial=partial) from e

    histogram = enumerator.to_cut_histogram(acc)
    result = EnumerationResult(
        count=sum(histogram.values()),
        histogram=histogram,
        nodes=enumerator.nodes,
        elapsed=timer.elapsed or 0.0,
        instance=graph.name,
        constraints=constraints,
        enumerator=enumerator,
    )
    if collect:
        plans: List[Plan] = []
        try:
            for plan in enumerator.iter_plans():
                plans.append(plan)
        except BudgetExceededError as e:
            # 计数已完成，只有方案列表不完整
            result.plans = plans
            result.partial = True
            result.nodes = enumerator.nodes
            result.enumerator = None
            logger.error(f"{graph.name}: 收集方案时超出节点上限，只收集到 {len(plans)}/{result.count} 个方案")
            raise BudgetExceededError(str(e), partial=result) from e
        result.plans = plans
    logger.success(
        f"{graph.name}: k={k}, 偏差 {constraints.deviation} 下共有 {result.count} 个方案，"
        f"搜索节点 {result.nodes}，耗时 {timer.human_readable}"
    )
    return result


def iter_plans(graph: UnitGraph, constraints: Constraints, node_budget: int = DEFAULT_NODE_BUDGET) -> Iterator[Plan]:
    """流式输出所有方案，不在内存中保存列表"""
    return PlanEnumerator(graph, constraints, node_budget).iter_plans()


def cut_edge_distribution(result: EnumerationResult) -> Histogram:
    """切边数直方图（按分数升序）"""
    if result.partial:
        raise DistrictLabError("枚举没有完成，直方图不完整")
    return dict(sorted(result.histogram.items()))
