import random
from enum import Enum
from typing import List, Optional, Tuple

from src.common.errors import PolicyConfigError
from ..core import Constraints, Plan, UnitGraph, boundary_units, district_populations, validate
from .spanning import DEFAULT_RETRIES, bipartition_tree

Move = Tuple[int, int]


class StepKind(str, Enum):
    """随机游走的单步类型"""

    FLIP = "flip"
    SWAP = "swap"
    RECOM = "recombination"

    @property
    def merge_count(self) -> int:
        # 重组只合并两个相邻选区
        return 2 if self is StepKind.RECOM else 0

    @classmethod
    def parse(cls, value) -> "StepKind":
        if isinstance(value, cls):
            return value
        aliases = {"recom": cls.RECOM}
        key = str(value).lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError as e:
            raise PolicyConfigError(f"未知的单步类型 {value}，可选 {[k.value for k in cls]}") from e


def _stays_connected(graph: UnitGraph, labels: Tuple[int, ...], unit: int) -> bool:
    """unit 离开后原选区是否仍连通

    原选区本来连通，所以只需检查 unit 在原选区内的邻居在去掉 unit 后是否互相可达。
    """
    src = labels[unit]
    targets = [v for v in graph.neighbors(unit) if labels[v] == src]
    if not targets:
        return False
    waiting = set(targets[1:])
    seen = {unit, targets[0]}
    stack = [targets[0]]
    while stack and waiting:
        u = stack.pop()
        for v in graph.neighbors(u):
            if v not in seen and labels[v] == src:
                seen.add(v)
                waiting.discard(v)
                stack.append(v)
    return not waiting


def flip_moves(plan: Plan, graph: UnitGraph) -> List[Move]:
    """所有 (边界单元, 相邻的其他选区) 组合"""
    labels = plan.assignment
    moves = []
    for unit in sorted(boundary_units(plan, graph)):
        for dst in sorted({labels[v] for v in graph.neighbors(unit)} - {labels[unit]}):
            moves.append((unit, dst))
    return moves


def swap_moves(plan: Plan, graph: UnitGraph) -> List[Move]:
    labels = plan.assignment
    return [(a, b) for a, b in graph.edge_list if labels[a] != labels[b]]


def apply_flip(plan: Plan, graph: UnitGraph, constraints: Constraints, move: Move) -> Optional[Plan]:
    """把 unit 改到 dst，结果仍满足人口与连通约束时返回新方案，否则返回 None"""
    unit, dst = move
    labels = plan.assignment
    src = labels[unit]
    if src == dst or all(labels[v] != dst for v in graph.neighbors(unit)):
        return None
    pops = district_populations(plan, graph)
    lo, hi = constraints.population_bounds(graph.total_population)
    p = graph.populations[unit]
    if not (lo <= pops[src] - p <= hi and lo <= pops[dst] + p <= hi):
        return None
    if constraints.require_contiguity:
        if not _stays_connected(graph, labels, unit):
            return None
    elif labels.count(src) == 1:
        return None
    return plan.with_labels({unit: dst})


def apply_swap(plan: Plan, graph: UnitGraph, constraints: Constraints, move: Move) -> Optional[Plan]:
    a, b = move
    labels = plan.assignment
    if labels[a] == labels[b]:
        return None
    candidate = plan.with_labels({a: labels[b], b: labels[a]})
    return candidate if validate(candidate, graph, constraints).valid else None


def flip_step(plan: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random) -> Plan:
    """均匀选一个边界单元，再均匀选一个相邻选区；不合法则原地不动

    原地不动时返回的就是传入的对象本身。
    """
    boundary = sorted(boundary_units(plan, graph))
    if not boundary:
        return plan
    unit = rng.choice(boundary)
    labels = plan.assignment
    dst = rng.choice(sorted({labels[v] for v in graph.neighbors(unit)} - {labels[unit]}))
    return apply_flip(plan, graph, constraints, (unit, dst)) or plan


def swap_step(plan: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random) -> Plan:
    """均匀选一条切边，交换两端单元的选区"""
    cut = swap_moves(plan, graph)
    if not cut:
        return plan
    return apply_swap(plan, graph, constraints, rng.choice(cut)) or plan


def recom_step(
    plan: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random, retries: int = DEFAULT_RETRIES
) -> Plan:
    """合并一对相邻选区，用随机生成树重新切成两块，其余选区保持不变"""
    labels = plan.assignment
    pairs = sorted({(min(labels[a], labels[b]), max(labels[a], labels[b])) for a, b in swap_moves(plan, graph)})
    if not pairs:
        return plan
    first, second = rng.choice(pairs)
    region = [u for u, label in enumerate(labels) if label in (first, second)]
    if not graph.is_connected_set(region):
        return plan

    bounds = constraints.population_bounds(graph.total_population)
    split = bipartition_tree(region, graph, rng, bounds, bounds, retries)
    if split is None:
        return plan
    part_a, part_b = split
    # 含最小单元的那一块沿用较小的标签
    if min(part_b) < min(part_a):
        part_a, part_b = part_b, part_a
    changes = {u: first for u in part_a}
    changes.update({u: second for u in part_b})
    candidate = plan.with_labels(changes)
    return candidate if validate(candidate, graph, constraints).valid else plan


def take_step(
    kind: StepKind,
    plan: Plan,
    graph: UnitGraph,
    constraints: Constraints,
    rng: random.Random,
    recom_retries: int = DEFAULT_RETRIES,
) -> Plan:
    if kind is StepKind.FLIP:
        return flip_step(plan, graph, constraints, rng)
    if kind is StepKind.SWAP:
        return swap_step(plan, graph, constraints, rng)
    return recom_step(plan, graph, constraints, rng, recom_retries)


def neighbor_moves(kind: StepKind, plan: Plan, graph: UnitGraph) -> Optional[List[Move]]:
    """可穷举的邻域返回全部候选移动；重组的邻域无法穷举，返回 None"""
    if kind is StepKind.FLIP:
        return flip_moves(plan, graph)
    if kind is StepKind.SWAP:
        return swap_moves(plan, graph)
    return None


def apply_move(kind: StepKind, plan: Plan, graph: UnitGraph, constraints: Constraints, move: Move) -> Optional[Plan]:
    if kind is StepKind.FLIP:
        return apply_flip(plan, graph, constraints, move)
    if kind is StepKind.SWAP:
        return apply_swap(plan, graph, constraints, move)
    raise ValueError(f"{kind.value} 没有可枚举的移动")
