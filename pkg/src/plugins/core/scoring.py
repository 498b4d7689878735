from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Set

from src.common.errors import DegenerateInstanceError, EmptyDistrictError, InvalidPlanError
from .geography import UnitGraph
from .plan import UNASSIGNED, Constraints, Plan


@dataclass
class ScoreReport:
    """validate 的输出

    cut_edges 对未完成的方案为 None。
    """

    cut_edges: Optional[int]
    district_populations: List[int]
    max_deviation: float
    contiguous: List[bool]
    valid: bool
    complete: bool = True
    reasons: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def _check_sized(plan: Plan, graph: UnitGraph) -> None:
    if plan.n_units != graph.n_units:
        raise InvalidPlanError(f"size mismatch: 方案有 {plan.n_units} 个单元，实例 {graph.name} 有 {graph.n_units} 个")


def _require_complete(plan: Plan, graph: UnitGraph) -> None:
    _check_sized(plan, graph)
    if not plan.is_complete:
        raise InvalidPlanError("incomplete plan: 方案中存在未分配的单元")


def cut_edges(plan: Plan, graph: UnitGraph) -> int:
    """被切断的边数：两端点属于不同选区的相邻单元对"""
    _require_complete(plan, graph)
    labels = plan.assignment
    return sum(1 for a, b in graph.edge_list if labels[a] != labels[b])


def cut_edge_indicators(plan: Plan, graph: UnitGraph) -> List[int]:
    """与 graph.edge_list 对齐的 0/1 切边指示"""
    _require_complete(plan, graph)
    labels = plan.assignment
    return [1 if labels[a] != labels[b] else 0 for a, b in graph.edge_list]


def district_populations(plan: Plan, graph: UnitGraph) -> List[int]:
    _require_complete(plan, graph)
    return _populations(plan, graph)


def _populations(plan: Plan, graph: UnitGraph) -> List[int]:
    pops = [0] * plan.k
    for uid, label in enumerate(plan.assignment):
        if label != UNASSIGNED:
            pops[label] += graph.populations[uid]
    return pops


def _deviation_of(pops: List[int], total: int, k: int) -> float:
    if total <= 0:
        raise DegenerateInstanceError("degenerate instance: 总人口为 0")
    ideal = total / k
    return max(abs(p - ideal) / ideal for p in pops)


def max_deviation(plan: Plan, graph: UnitGraph, constraints: Constraints) -> float:
    """max_j |pop_j − ideal| / ideal"""
    _require_complete(plan, graph)
    if plan.k != constraints.k:
        raise InvalidPlanError(f"方案的 k={plan.k} 与约束的 k={constraints.k} 不一致")
    return _deviation_of(_populations(plan, graph), graph.total_population, plan.k)


def is_contiguous(plan: Plan, graph: UnitGraph, district: int) -> bool:
    _check_sized(plan, graph)
    units = [uid for uid, label in enumerate(plan.assignment) if label == district]
    if not units:
        raise EmptyDistrictError(f"empty district: 选区 {district} 中没有单元")
    return graph.is_connected_set(units)


def boundary_units(plan: Plan, graph: UnitGraph) -> Set[int]:
    """至少有一个邻居在其他选区的单元，即所有切边的端点"""
    _require_complete(plan, graph)
    labels = plan.assignment
    out: Set[int] = set()
    for a, b in graph.edge_list:
        if labels[a] != labels[b]:
            out.add(a)
            out.add(b)
    return out


def county_splits(plan: Plan, graph: UnitGraph) -> int:
    """Σ_县 (与该县相交的选区数 − 1)；没有县标签时为 0"""
    _require_complete(plan, graph)
    if not graph.has_counties:
        return 0
    touched: Dict[str, Set[int]] = {}
    for uid, county in enumerate(graph.counties):
        if county is None:
            continue
        touched.setdefault(county, set()).add(plan.assignment[uid])
    return sum(len(labels) - 1 for labels in touched.values())


def validate(plan: Plan, graph: UnitGraph, constraints: Constraints) -> ScoreReport:
    """汇总所有检查；不合法是数据而不是异常"""
    _check_sized(plan, graph)
    if plan.k != constraints.k:
        raise InvalidPlanError(f"方案的 k={plan.k} 与约束的 k={constraints.k} 不一致")

    reasons: List[str] = []
    complete = plan.is_complete
    pops = _populations(plan, graph)
    parts = plan.districts()

    contiguous = [bool(units) and graph.is_connected_set(units) for units in parts]
    try:
        deviation = _deviation_of(pops, graph.total_population, constraints.k)
    except DegenerateInstanceError:
        deviation = float("inf")
        reasons.append("degenerate instance")

    cuts: Optional[int] = None
    if complete:
        cuts = sum(1 for a, b in graph.edge_list if plan.assignment[a] != plan.assignment[b])
    else:
        reasons.append("incomplete plan")

    if any(not units for units in parts):
        reasons.append("empty district")
    if constraints.require_contiguity and not all(contiguous):
        reasons.append("discontiguous district")
    if deviation > constraints.deviation + 1e-9:
        reasons.append("population deviation")

    return ScoreReport(
        cut_edges=cuts,
        district_populations=pops,
        max_deviation=deviation,
        contiguous=contiguous,
        valid=not reasons,
        complete=complete,
        reasons=reasons,
    )


def is_valid(plan: Plan, graph: UnitGraph, constraints: Constraints) -> bool:
    return validate(plan, graph, constraints).valid
