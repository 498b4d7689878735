"""最短分割线

把区域按人口比例 ceil(k/2):floor(k/2) 用一条直线切成两半，递归到 k 块。
候选直线由角度网格给出：每个角度把单元质心投影到法向上排序，在相邻投影之间找
人口可行的切点。优化版选穿过区域凸包最短的线，抽样版在可行候选中均匀选。
"""

import math
import random
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from src.common.errors import PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, GEOMETRIC_STYLE_CONFIG
from ..core import UNASSIGNED, Constraints, Plan, UnitGraph, validate

logger = get_module_logger("geometric", config=LogConfig.from_style(GEOMETRIC_STYLE_CONFIG))

SHORTEST = "shortest"
SAMPLE = "sample"

_GAP = 1e-9


@dataclass(frozen=True)
class SplitLine:
    """一条分割线：法向角 angle 下 x·n = offset，length 是它在区域凸包内的长度"""

    angle: float
    offset: float
    length: float
    low_parts: int
    high_parts: int


@dataclass
class SplitlineResult:
    plan: Plan
    lines: List[SplitLine] = field(default_factory=list)


def _chord_length(points: np.ndarray, normal: np.ndarray, offset: float) -> float:
    """直线 x·n = offset 与点集凸包相交的长度；点共线时退化为点集沿直线方向的跨度"""
    direction = np.array([-normal[1], normal[0]])
    try:
        hull = ConvexHull(points)
        ring = points[hull.vertices]
    except (RuntimeError, ValueError):
        span = points @ direction
        return float(span.max() - span.min()) if len(points) else 0.0

    hits = []
    for p, q in zip(ring, np.roll(ring, -1, axis=0)):
        sp, sq = p @ normal - offset, q @ normal - offset
        if sp == sq or sp * sq > 0:
            continue
        t = sp / (sp - sq)
        hits.append(p + t * (q - p))
    if len(hits) < 2:
        return 0.0
    along = np.array([h @ direction for h in hits])
    return float(along.max() - along.min())


def _candidates(
    units: List[int], points: np.ndarray, pops: np.ndarray, parts: int, bounds: Tuple[float, float], angles: int
) -> List[Tuple[SplitLine, List[int], List[int]]]:
    low_parts = math.ceil(parts / 2)
    high_parts = parts - low_parts
    lo, hi = bounds
    region_pts = points[units]
    total = float(pops[units].sum())
    target = total * low_parts / parts
    out = []
    for i in range(angles):
        theta = math.pi * i / angles
        normal = np.array([math.cos(theta), math.sin(theta)])
        proj = region_pts @ normal
        order = np.argsort(proj, kind="stable")
        cumulative = np.cumsum(pops[units][order])
        best_cut = None
        for cut in range(1, len(units)):
            if proj[order[cut]] - proj[order[cut - 1]] <= _GAP:
                continue
            low = float(cumulative[cut - 1])
            high = total - low
            if not (low_parts * lo <= low <= low_parts * hi and high_parts * lo <= high <= high_parts * hi):
                continue
            if best_cut is None or abs(low - target) < abs(float(cumulative[best_cut - 1]) - target):
                best_cut = cut
        if best_cut is None:
            continue
        offset = float((proj[order[best_cut]] + proj[order[best_cut - 1]]) / 2)
        line = SplitLine(theta, offset, _chord_length(region_pts, normal, offset), low_parts, high_parts)
        low_units = [units[j] for j in order[:best_cut]]
        high_units = [units[j] for j in order[best_cut:]]
        out.append((line, low_units, high_units))
    return out


def split_region(
    graph: UnitGraph,
    constraints: Constraints,
    rng: Optional[random.Random] = None,
    angles: int = 180,
    method: str = SHORTEST,
) -> Optional[SplitlineResult]:
    """递归分割，返回方案和每次选中的分割线；某一步没有可行直线或结果不合法时返回 None"""
    if not graph.has_centroids:
        raise PolicyConfigError(f"分割线需要质心坐标，实例 {graph.name} 没有")
    if method not in (SHORTEST, SAMPLE):
        raise PolicyConfigError(f"未知的分割线方式 {method}，可选 {SHORTEST}/{SAMPLE}")
    if method == SAMPLE and rng is None:
        raise PolicyConfigError("抽样版分割线需要随机数发生器")
    if angles < 1:
        raise PolicyConfigError("angles 必须 >= 1")

    points = graph.centroids
    pops = graph.population_array.astype(float)
    bounds = constraints.population_bounds(graph.total_population)
    labels = [UNASSIGNED] * graph.n_units
    lines: List[SplitLine] = []
    next_label = 0
    # (单元列表, 要切成的块数)
    stack: List[Tuple[List[int], int]] = [(list(range(graph.n_units)), constraints.k)]
    while stack:
        units, parts = stack.pop()
        if parts == 1:
            for u in units:
                labels[u] = next_label
            next_label += 1
            continue
        options = _candidates(units, points, pops, parts, bounds, angles)
        if not options:
            logger.trace(f"{len(units)} 个单元的区域在 {angles} 个角度下都找不到可行的分割线")
            return None
        if method == SHORTEST:
            line, low, high = min(options, key=lambda o: o[0].length)
        else:
            line, low, high = rng.choice(options)
        lines.append(line)
        stack.append((high, line.high_parts))
        stack.append((low, line.low_parts))

    plan = Plan(tuple(labels), constraints.k)
    report = validate(plan, graph, constraints)
    if not report.valid:
        logger.trace(f"分割线方案被拒绝: {', '.join(report.reasons)}")
        return None
    return SplitlineResult(plan, lines)


def splitline(
    graph: UnitGraph,
    constraints: Constraints,
    rng: Optional[random.Random] = None,
    angles: int = 180,
    method: str = SHORTEST,
) -> Optional[Plan]:
    result = split_region(graph, constraints, rng, angles, method)
    return result.plan if result is not None else None


