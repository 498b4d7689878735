"""集成的统计：切边直方图、每条边的切割频率、与穷举结果的分布比较"""

import random
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from src.common.errors import DistrictLabError, EmptyEnsembleError, InvalidPlanError
from src.common.logger import get_module_logger, LogConfig, ANALYZE_STYLE_CONFIG
from ..core import Plan, UnitGraph, cut_edges
from ..enumeration import EnumerationResult
from ..instances import instance_hash
from .ensemble import Ensemble

logger = get_module_logger("analyze", config=LogConfig.from_style(ANALYZE_STYLE_CONFIG))

# 卡方检验中期望频数低于该值的相邻分箱合并
MIN_EXPECTED = 5.0

PlanSource = Union[Ensemble, Sequence[Plan]]


def _plans_of(source: PlanSource) -> List[Plan]:
    plans = list(source.plans if isinstance(source, Ensemble) else source)
    if not plans:
        raise EmptyEnsembleError("集成为空")
    return plans


def cut_edge_histogram(ensemble: Ensemble, graph: Optional[UnitGraph] = None) -> Dict[int, int]:
    """每个切边数出现的次数，按切边数升序"""
    if ensemble.empty:
        raise EmptyEnsembleError("集成为空，无法统计直方图")
    scores = ensemble.scores
    if not scores:
        if graph is None:
            raise DistrictLabError("集成没有记录切边数，需要提供实例")
        scores = [cut_edges(p, graph) for p in ensemble.plans]
    return dict(sorted(Counter(scores).items()))


@dataclass
class EdgeFrequency:
    """每条边在多少比例的方案中被切开，顺序与 graph.edge_list 一致"""

    edges: List[Tuple[int, int]]
    values: np.ndarray
    sample_size: int

    def of(self, a: int, b: int) -> float:
        key = (a, b) if a < b else (b, a)
        return float(self.values[self.edges.index(key)])

    def as_dict(self) -> Dict[Tuple[int, int], float]:
        return {edge: float(v) for edge, v in zip(self.edges, self.values)}


def edge_frequency(source: PlanSource, graph: UnitGraph) -> EdgeFrequency:
    plans = _plans_of(source)
    labels = np.array([p.assignment for p in plans], dtype=np.int64)
    if labels.shape[1] != graph.n_units:
        raise InvalidPlanError(f"size mismatch: 方案有 {labels.shape[1]} 个单元，实例 {graph.name} 有 {graph.n_units} 个")
    edges = [tuple(sorted(e)) for e in graph.edge_list]
    if not edges:
        return EdgeFrequency([], np.zeros(0), len(plans))
    ends = np.array(edges, dtype=np.int64)
    cut = labels[:, ends[:, 0]] != labels[:, ends[:, 1]]
    return EdgeFrequency(edges, cut.mean(axis=0), len(plans))


@dataclass
class DivergenceReport:
    """集成与穷举分布的差异

    tv_distance 是两个归一化切边直方图的全变差距离；卡方检验以穷举分布为期望，
    期望频数小于 5 的相邻分箱会被合并，只剩一箱时 p 值记为 1。
    """

    tv_distance: float
    chi_square: float
    p_value: float
    bins: int
    sample_size: int
    oracle_count: int

    def to_dict(self) -> Dict:
        return {
            "tv_distance": self.tv_distance,
            "chi_square": self.chi_square,
            "p_value": self.p_value,
            "bins": self.bins,
            "sample_size": self.sample_size,
            "oracle_count": self.oracle_count,
        }


def _pool_bins(observed: List[float], expected: List[float]) -> Tuple[List[float], List[float]]:
    pooled_obs: List[float] = []
    pooled_exp: List[float] = []
    acc_obs = acc_exp = 0.0
    for o, e in zip(observed, expected):
        acc_obs += o
        acc_exp += e
        if acc_exp >= MIN_EXPECTED:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
    if acc_exp > 0 or acc_obs > 0:
        if pooled_exp:
            pooled_obs[-1] += acc_obs
            pooled_exp[-1] += acc_exp
        else:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
    return pooled_obs, pooled_exp


def compare_to_oracle(ensemble: Ensemble, oracle: EnumerationResult) -> DivergenceReport:
    if oracle.partial:
        raise DistrictLabError("穷举没有完成，不能作为比较基准")
    if ensemble.empty:
        raise EmptyEnsembleError("集成为空，无法与穷举比较")
    if oracle.instance and ensemble.instance and oracle.instance != ensemble.instance:
        raise InvalidPlanError(f"instance mismatch: 集成来自 {ensemble.instance}，穷举来自 {oracle.instance}")
    if oracle.enumerator is not None and ensemble.instance_hash:
        if instance_hash(oracle.enumerator.graph) != ensemble.instance_hash:
            raise InvalidPlanError(f"instance mismatch: {ensemble.instance} 的实例内容与穷举所用的不一致（instance_hash 不同）")
    if oracle.constraints is not None and any(p.k != oracle.constraints.k for p in ensemble.plans):
        raise InvalidPlanError(f"集成中的方案与穷举的 k={oracle.constraints.k} 不一致")
    if oracle.count == 0:
        raise DistrictLabError("穷举没有合法方案")

    histogram = cut_edge_histogram(ensemble)
    n = len(ensemble)
    support = sorted(set(histogram) | set(oracle.histogram))
    p_sample = np.array([histogram.get(s, 0) / n for s in support])
    p_oracle = np.array([oracle.histogram.get(s, 0) / oracle.count for s in support])
    tv = float(0.5 * np.abs(p_sample - p_oracle).sum())

    outside = sum(c for s, c in histogram.items() if s not in oracle.histogram)
    if outside:
        logger.warning(f"集成中有 {outside} 个方案的切边数不在穷举分布的支撑集内")
        chi, p_value, bins = float("inf"), 0.0, len(support)
    else:
        scores = sorted(oracle.histogram)
        observed = [float(histogram.get(s, 0)) for s in scores]
        expected = [n * oracle.histogram[s] / oracle.count for s in scores]
        observed, expected = _pool_bins(observed, expected)
        bins = len(observed)
        if bins < 2:
            chi, p_value = 0.0, 1.0
        else:
            result = stats.chisquare(observed, expected)
            chi, p_value = float(result.statistic), float(result.pvalue)

    report = DivergenceReport(tv, chi, p_value, bins, n, oracle.count)
    logger.info(f"{ensemble.algorithm or '集成'} 对比穷举：TV={tv:.4f}，卡方={chi:.2f}，p={p_value:.3g}（{bins} 箱）")
    return report


@dataclass
class MeanComparison:
    mean_a: float
    mean_b: float
    statistic: float
    p_value: float


def compare_means(a: Ensemble, b: Ensemble, alternative: str = "less") -> MeanComparison:
    """单侧 Mann-Whitney 检验：默认备择假设是 a 的切边数偏小"""
    if a.empty or b.empty:
        raise EmptyEnsembleError("比较的两个集成都不能为空")
    result = stats.mannwhitneyu(a.scores, b.scores, alternative=alternative)
    return MeanComparison(float(np.mean(a.scores)), float(np.mean(b.scores)), float(result.statistic), float(result.pvalue))


def distinct_plans(source: PlanSource) -> int:
    """不同的无标签方案个数"""
    return len({p.canonical_form() for p in _plans_of(source)})


def uniform_resample(oracle: EnumerationResult, size: int, rng: Optional[random.Random] = None) -> Ensemble:
    """按均匀分布从穷举结果中抽取 size 个方案"""
    if oracle.partial or oracle.enumerator is None:
        raise DistrictLabError("需要一个完整的穷举结果才能均匀抽样")
    rng = rng or random.Random(0)
    enumerator = oracle.enumerator
    plans = [enumerator.sample_uniform(rng) for _ in range(size)]
    return Ensemble.from_plans(plans, enumerator.graph, algorithm="uniform_resample")
