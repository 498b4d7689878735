import random
from typing import Dict, List, Optional, Set, Tuple

from src.common.logger import get_module_logger, LogConfig, SAMPLER_STYLE_CONFIG
from ..core import UNASSIGNED, Constraints, Plan, UnitGraph, validate
from .policy import (
    DISTRICT_BY_DISTRICT,
    SEED_BOUNDARY,
    SEED_ZONES,
    SPREAD_BOUNDING_BOX,
    SPREAD_COUNTY,
    FloodFillPolicy,
)

logger = get_module_logger("samplers", config=LogConfig.from_style(SAMPLER_STYLE_CONFIG))


class _Stuck(Exception):
    pass


class _Growth:
    """一次洪水填充尝试的可变状态"""

    def __init__(self, graph: UnitGraph, constraints: Constraints, policy: FloodFillPolicy, rng: random.Random):
        self.graph = graph
        self.policy = policy
        self.rng = rng
        self.k = constraints.k
        self.lo, self.hi = constraints.population_bounds(graph.total_population)
        self.labels = [UNASSIGNED] * graph.n_units
        self.unassigned: Set[int] = set(range(graph.n_units))
        self.pops = [0] * self.k
        self.members: List[List[int]] = [[] for _ in range(self.k)]
        self.frontier: List[Set[int]] = [set() for _ in range(self.k)]
        self.history: List[Tuple[int, int]] = []
        self.counties: List[Dict[str, int]] = [{} for _ in range(self.k)]
        self._zones = policy.zone_members() if policy.seed_rule == SEED_ZONES else None
        self._boundary: Optional[List[int]] = None
        if policy.seed_rule == SEED_BOUNDARY:
            max_degree = max((graph.degree(u) for u in range(graph.n_units)), default=0)
            self._boundary = [u for u in range(graph.n_units) if graph.degree(u) < max_degree]

    # ---- 赋值与撤销 ----

    def assign(self, unit: int, district: int) -> None:
        self.labels[unit] = district
        self.unassigned.discard(unit)
        self.pops[district] += self.graph.populations[unit]
        self.members[district].append(unit)
        self.history.append((unit, district))
        for f in self.frontier:
            f.discard(unit)
        for v in self.graph.neighbors(unit):
            if self.labels[v] == UNASSIGNED:
                self.frontier[district].add(v)
        if self.graph.counties is not None:
            county = self.graph.counties[unit]
            self.counties[district][county] = self.counties[district].get(county, 0) + 1

    def undo(self) -> Tuple[int, int]:
        unit, district = self.history.pop()
        self.labels[unit] = UNASSIGNED
        self.unassigned.add(unit)
        self.pops[district] -= self.graph.populations[unit]
        self.members[district].remove(unit)
        if self.graph.counties is not None:
            county = self.graph.counties[unit]
            self.counties[district][county] -= 1
            if self.counties[district][county] == 0:
                del self.counties[district][county]
        for v in self.graph.neighbors(unit):
            label = self.labels[v]
            if label != UNASSIGNED:
                self.frontier[label].add(unit)
        self.frontier[district] = {
            v for u in self.members[district] for v in self.graph.neighbors(u) if self.labels[v] == UNASSIGNED
        }
        return unit, district

    # ---- 选择规则 ----

    def annexable(self, district: int) -> List[int]:
        room = self.hi - self.pops[district]
        return sorted(v for v in self.frontier[district] if self.graph.populations[v] <= room)

    def spread(self, district: int, candidates: List[int]) -> int:
        rule = self.policy.spread_rule
        preferred = candidates
        if rule == SPREAD_BOUNDING_BOX:
            pts = self.graph.centroids[self.members[district]]
            xmin, ymin = pts.min(axis=0)
            xmax, ymax = pts.max(axis=0)
            preferred = [
                v
                for v in candidates
                if xmin <= self.graph.centroids[v, 0] <= xmax and ymin <= self.graph.centroids[v, 1] <= ymax
            ]
        elif rule == SPREAD_COUNTY:
            preferred = [v for v in candidates if self.graph.counties[v] in self.counties[district]]
        # 偏好集合为空时退回均匀选择
        return self.rng.choice(preferred or candidates)

    def seed_for(self, district: int) -> Optional[int]:
        pool: List[int] = []
        if self._zones is not None:
            pool = [u for u in self._zones[district] if u in self.unassigned]
        elif self._boundary is not None:
            pool = [u for u in self._boundary if u in self.unassigned]
        if not pool:
            pool = sorted(self.unassigned)
        return self.rng.choice(pool) if pool else None

    # ---- 回退 ----

    def backtrack(self, district: Optional[int] = None) -> bool:
        """撤销最近一半的并入操作（不撤销种子）；district 给出时只撤销该选区的"""
        seeds = {members[0] for members in self.members if members}
        undoable = [
            i for i, (u, d) in enumerate(self.history) if u not in seeds and (district is None or d == district)
        ]
        if not undoable:
            return False
        count = max(1, len(undoable) // 2)
        for _ in range(count):
            idx = undoable.pop()
            # history 尾部之后的操作必须先撤销
            while len(self.history) > idx:
                self.undo()
        return True

    def plan(self) -> Plan:
        return Plan(tuple(self.labels), self.k)


def _district_by_district(state: _Growth) -> None:
    backtracks = 0
    for district in range(state.k):
        if district == state.k - 1 and state.policy.fill_last:
            for unit in sorted(state.unassigned):
                state.assign(unit, district)
            return
        seed = state.seed_for(district)
        if seed is None:
            raise _Stuck("没有可用的种子单元")
        state.assign(seed, district)
        while True:
            candidates = state.annexable(district)
            while candidates:
                state.assign(state.spread(district, candidates), district)
                candidates = state.annexable(district)
            if state.pops[district] >= state.lo:
                break
            if backtracks < state.policy.backtrack_limit and state.backtrack(district):
                backtracks += 1
                continue
            raise _Stuck(f"选区 {district} 卡在人口 {state.pops[district]}")
    if state.unassigned:
        raise _Stuck(f"剩余 {len(state.unassigned)} 个单元无法归入任何选区")


def _whole_plan(state: _Growth) -> None:
    for district in range(state.k):
        seed = state.seed_for(district)
        if seed is None:
            raise _Stuck("单元数少于选区数")
        state.assign(seed, district)

    backtracks = 0
    while True:
        under = [d for d in range(state.k) if state.pops[d] < state.lo]
        if under:
            district = state.rng.choice(under)
            candidates = state.annexable(district)
            if not candidates:
                if backtracks < state.policy.backtrack_limit and state.backtrack():
                    backtracks += 1
                    continue
                raise _Stuck(f"选区 {district} 没有可并入的邻居")
            state.assign(state.spread(district, candidates), district)
            continue
        if not state.unassigned:
            return
        # 所有选区都已达到下限，剩余单元并入仍有余量的选区
        growable = [d for d in range(state.k) if state.annexable(d)]
        if not growable:
            raise _Stuck(f"剩余 {len(state.unassigned)} 个单元无法归入任何选区")
        district = state.rng.choice(growable)
        state.assign(state.spread(district, state.annexable(district)), district)


def flood_fill(
    graph: UnitGraph, constraints: Constraints, policy: FloodFillPolicy, rng: random.Random
) -> Optional[Plan]:
    """从种子单元生长选区，返回通过 validate 的方案，卡住则返回 None（拒绝）"""
    policy.check(graph, constraints.k)
    grow = _district_by_district if policy.mode == DISTRICT_BY_DISTRICT else _whole_plan
    for attempt in range(policy.max_restarts):
        state = _Growth(graph, constraints, policy, rng)
        try:
            grow(state)
        except _Stuck as reason:
            logger.trace(f"洪水填充第 {attempt + 1} 次尝试被拒绝: {reason}")
            continue
        plan = state.plan()
        if validate(plan, graph, constraints).valid:
            return plan
        logger.trace(f"洪水填充第 {attempt + 1} 次尝试得到的方案不合法")
    return None
