"""Voronoi / 幂图划分

所有几何计算都在单元质心上进行，单元的人口视为集中在质心处。
幂距离为 d(x, h)^2 - w_h；权重全为 0 时就是普通的 Voronoi 划分。
"""

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, GEOMETRIC_STYLE_CONFIG
from ..core import Constraints, Plan, UnitGraph, validate

logger = get_module_logger("geometric", config=LogConfig.from_style(GEOMETRIC_STYLE_CONFIG))

Point = Tuple[float, float]


@dataclass(frozen=True)
class Hub:
    position: Point
    weight: float = 0.0

    def __post_init__(self):
        x, y = (float(v) for v in self.position)
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(self.weight)):
            raise PolicyConfigError(f"中心坐标必须是有限实数: {self.position}")
        object.__setattr__(self, "position", (x, y))
        object.__setattr__(self, "weight", float(self.weight))


@dataclass
class GeometricPartition:
    """k 个中心以及每个单元所属的胞腔

    history 在 Lloyd 中是每轮的目标值，在幂图平衡中是每轮的 (最大偏差, 目标值)。
    """

    hubs: List[Hub]
    assignment: Tuple[int, ...]
    history: List = field(default_factory=list)
    iterations: int = 0
    balanced: Optional[bool] = None

    @property
    def k(self) -> int:
        return len(self.hubs)

    def cell_populations(self, graph: UnitGraph) -> List[int]:
        return np.bincount(np.asarray(self.assignment), weights=graph.population_array, minlength=self.k).astype(int).tolist()


def _require_centroids(graph: UnitGraph) -> np.ndarray:
    if not graph.has_centroids:
        raise PolicyConfigError(f"几何方法需要质心坐标，实例 {graph.name} 没有")
    return graph.centroids


def power_assign(points: np.ndarray, hubs: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """每个点归入幂距离最小的中心，距离相同时取编号最小的中心"""
    dist = cdist(points, hubs, "sqeuclidean")
    if weights is not None:
        dist = dist - np.asarray(weights, dtype=float)[None, :]
    return np.argmin(dist, axis=1)


def _objective(points: np.ndarray, pops: np.ndarray, hubs: np.ndarray, labels: np.ndarray) -> float:
    """人口加权的到所属中心的距离平方和"""
    return float(np.sum(pops * np.sum((points - hubs[labels]) ** 2, axis=1)))


def _cell_centroid(points: np.ndarray, pops: np.ndarray, members: np.ndarray) -> np.ndarray:
    w = pops[members]
    if w.sum() > 0:
        return np.average(points[members], axis=0, weights=w)
    return points[members].mean(axis=0)


def random_hubs(graph: UnitGraph, k: int, rng: random.Random) -> np.ndarray:
    """从互不相同的质心中均匀选 k 个作为初始中心"""
    points = _require_centroids(graph)
    distinct = np.unique(points, axis=0)
    if k > len(distinct):
        raise PolicyConfigError(f"k={k} 超过了不同质心的数量 {len(distinct)}")
    picks = rng.sample(range(len(distinct)), k)
    return distinct[picks].astype(float)


def _initial_hubs(graph: UnitGraph, k: int, init_hubs, rng: Optional[random.Random]) -> np.ndarray:
    if init_hubs is None:
        return random_hubs(graph, k, rng or random.Random(0))
    hubs = np.asarray([h.position if isinstance(h, Hub) else h for h in init_hubs], dtype=float)
    if hubs.shape != (k, 2):
        raise PolicyConfigError(f"需要 {k} 个初始中心，实际给了 {len(hubs)} 个")
    return hubs


def lloyd_kmeans(
    graph: UnitGraph,
    k: int,
    init_hubs: Optional[Sequence] = None,
    max_iters: int = 100,
    tol: float = 1e-6,
    rng: Optional[random.Random] = None,
) -> GeometricPartition:
    """人口加权的 Lloyd 迭代：分配到最近中心，再把中心移到胞腔的加权质心

    空胞腔的中心会被挪到离自己中心最远的单元上，然后重新分配。
    目标值序列单调不增。
    """
    points = _require_centroids(graph)
    pops = graph.population_array.astype(float)
    hubs = _initial_hubs(graph, k, init_hubs, rng)
    distinct = len(np.unique(points, axis=0))
    if k > distinct:
        raise PolicyConfigError(f"k={k} 超过了不同质心的数量 {distinct}")

    history: List[float] = []
    labels = power_assign(points, hubs)
    iterations = 0
    for iterations in range(1, max_iters + 1):
        labels = power_assign(points, hubs)
        for cell in range(k):
            if np.any(labels == cell):
                continue
            far = np.sum((points - hubs[labels]) ** 2, axis=1)
            far[np.any(np.all(points[:, None, :] == hubs[None, :, :], axis=2), axis=1)] = -1.0
            victim = int(np.argmax(far))
            logger.debug(f"第 {iterations} 轮胞腔 {cell} 为空，中心挪到单元 {victim}")
            hubs[cell] = points[victim]
            labels = power_assign(points, hubs)

        moved = np.array(hubs)
        for cell in range(k):
            members = np.flatnonzero(labels == cell)
            if len(members):
                moved[cell] = _cell_centroid(points, pops, members)
        shift = float(np.max(np.linalg.norm(moved - hubs, axis=1))) if k else 0.0
        hubs = moved
        history.append(_objective(points, pops, hubs, labels))
        logger.debug(f"Lloyd 第 {iterations} 轮：目标值 {history[-1]:.4f}，中心最大位移 {shift:.6f}")
        if shift < tol:
            break

    labels = power_assign(points, hubs)
    return GeometricPartition(
        hubs=[Hub((float(x), float(y))) for x, y in hubs],
        assignment=tuple(int(c) for c in labels),
        history=history,
        iterations=iterations,
    )


def balance_power_diagram(
    graph: UnitGraph,
    k: int,
    constraints: Constraints,
    max_iters: int = 500,
    rng: Optional[random.Random] = None,
    step: float = 0.5,
    init_hubs: Optional[Sequence] = None,
) -> GeometricPartition:
    """交替做 Lloyd 中心更新和权重更新，直到每个胞腔的人口偏差都不超过约束

    权重更新：w_h += η·s·(ideal - pop_h)/ideal，s 是当前到所属中心的平均距离平方，
    偏差没有改善时 η 乘以 0.9。达不到平衡时返回偏差最小的一轮，balanced=False。
    """
    points = _require_centroids(graph)
    pops = graph.population_array.astype(float)
    hubs = _initial_hubs(graph, k, init_hubs, rng)
    weights = np.zeros(k)
    ideal = constraints.ideal(graph.total_population)
    eta = step

    history: List[Tuple[float, float]] = []
    best: Optional[Tuple[float, np.ndarray, np.ndarray, np.ndarray]] = None
    previous = float("inf")
    balanced = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        labels = power_assign(points, hubs, weights)
        cell_pops = np.bincount(labels, weights=pops, minlength=k)
        deviation = float(np.max(np.abs(cell_pops - ideal)) / ideal)
        objective = _objective(points, pops, hubs, labels)
        history.append((deviation, objective))
        logger.debug(f"幂图第 {iterations} 轮：最大偏差 {deviation:.5f}，目标值 {objective:.4f}")

        if best is None or deviation < best[0]:
            best = (deviation, labels.copy(), hubs.copy(), weights.copy())
        if deviation <= constraints.deviation + 1e-9:
            balanced = True
            break
        if deviation >= previous:
            eta *= 0.9
        previous = deviation

        spread = float(np.mean(np.sum((points - hubs[labels]) ** 2, axis=1)))
        scale = spread if spread > 0 else 1.0
        weights = weights + eta * scale * (ideal - cell_pops) / ideal
        for cell in range(k):
            members = np.flatnonzero(labels == cell)
            if len(members):
                hubs[cell] = _cell_centroid(points, pops, members)

    deviation, labels, hubs, weights = best
    if not balanced:
        logger.info(f"幂图 {max_iters} 轮内没有平衡，返回最好的一轮（偏差 {deviation:.5f}）")
    return GeometricPartition(
        hubs=[Hub((float(x), float(y)), float(w)) for (x, y), w in zip(hubs, weights)],
        assignment=tuple(int(c) for c in labels),
        history=history,
        iterations=iterations,
        balanced=balanced,
    )


def snap_to_units(partition: GeometricPartition, graph: UnitGraph, constraints: Constraints) -> Optional[Plan]:
    """按单元质心所在的胞腔离散回单元，不合法时返回 None"""
    if partition.k != constraints.k:
        raise PolicyConfigError(f"划分有 {partition.k} 个胞腔，约束要求 k={constraints.k}")
    if len(partition.assignment) != graph.n_units:
        raise PolicyConfigError("划分的单元数与实例不一致")
    plan = Plan(partition.assignment, constraints.k)
    report = validate(plan, graph, constraints)
    if not report.valid:
        logger.trace(f"离散化后的方案被拒绝: {', '.join(report.reasons)}")
        return None
    return plan
