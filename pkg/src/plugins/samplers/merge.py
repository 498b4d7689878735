import random
from typing import Dict, List, Optional, Sequence, Set

import numpy as np

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, SAMPLER_STYLE_CONFIG
from ..core import Constraints, Plan, UnitGraph, validate
from .refine import rebalance

logger = get_module_logger("samplers", config=LogConfig.from_style(SAMPLER_STYLE_CONFIG))


def merge_regions(
    graph: UnitGraph, regions: Sequence[Set[int]], k: int, rng: random.Random
) -> Optional[List[Set[int]]]:
    """反复随机选一个聚合块，与最近的相邻聚合块合并，直到剩 k 块

    有质心时"最近"指人口加权质心距离最近，否则选人口最少的邻居；
    距离相同时选标识较小的邻居。聚合块以其最小单元编号为标识。
    剩余的块互不相邻、无法继续合并时返回 None。
    """
    units: Dict[int, Set[int]] = {}
    owner: Dict[int, int] = {}
    for region in regions:
        key = min(region)
        units[key] = set(region)
        for u in region:
            owner[u] = key
    if len(owner) != graph.n_units:
        raise PolicyConfigError("聚合块必须恰好覆盖所有单元")

    adjacency: Dict[int, Set[int]] = {key: set() for key in units}
    for a, b in graph.edge_list:
        ka, kb = owner[a], owner[b]
        if ka != kb:
            adjacency[ka].add(kb)
            adjacency[kb].add(ka)

    weight: Dict[int, float] = {key: float(graph.population_of(members)) for key, members in units.items()}
    size: Dict[int, int] = {key: len(members) for key, members in units.items()}
    centroid: Dict[int, np.ndarray] = {}
    if graph.has_centroids:
        for key, members in units.items():
            pts = graph.centroids[sorted(members)]
            w = graph.population_array[sorted(members)]
            centroid[key] = np.average(pts, axis=0, weights=w) if w.sum() > 0 else pts.mean(axis=0)

    def distance(a: int, b: int) -> float:
        if centroid:
            return float(np.sum((centroid[a] - centroid[b]) ** 2))
        return weight[b]

    while len(units) > k:
        mergeable = sorted(a for a in units if adjacency[a])
        if not mergeable:
            logger.trace(f"剩余 {len(units)} 个互不相邻的块，无法合并到 {k} 个")
            return None
        a = rng.choice(mergeable)
        b = min(adjacency[a], key=lambda other: (distance(a, other), other))
        keep, drop = (a, b) if a < b else (b, a)

        if centroid:
            total_w = weight[keep] + weight[drop]
            if total_w > 0:
                centroid[keep] = (centroid[keep] * weight[keep] + centroid[drop] * weight[drop]) / total_w
            else:
                centroid[keep] = (centroid[keep] * size[keep] + centroid[drop] * size[drop]) / (size[keep] + size[drop])
            del centroid[drop]
        weight[keep] += weight.pop(drop)
        size[keep] += size.pop(drop)
        units[keep] |= units.pop(drop)
        neighbors = (adjacency[keep] | adjacency.pop(drop)) - {keep, drop}
        adjacency[keep] = neighbors
        for other in neighbors:
            adjacency[other].discard(drop)
            adjacency[other].add(keep)

    return [units[key] for key in sorted(units)]


def regions_to_plan(regions: Sequence[Set[int]], n_units: int, k: int) -> Plan:
    labels = [0] * n_units
    for label, members in enumerate(regions):
        for u in members:
            labels[u] = label
    return Plan(tuple(labels), k)


def iterative_merge(
    graph: UnitGraph, constraints: Constraints, rng: random.Random, rebalance_budget: int = 2000
) -> Optional[Plan]:
    """从每个单元自成一块开始，按质心距离合并到 k 块，然后再平衡"""
    if not graph.has_centroids:
        raise PolicyConfigError(f"迭代合并需要质心坐标，实例 {graph.name} 没有")
    k = constraints.k
    if k > graph.n_units:
        return None

    regions = merge_regions(graph, [{u} for u in range(graph.n_units)], k, rng)
    if regions is None:
        return None
    plan = regions_to_plan(regions, graph.n_units, k)

    result = rebalance(plan, graph, constraints, rebalance_budget, rng)
    if result.success and validate(result.plan, graph, constraints).valid:
        return result.plan
    return None
