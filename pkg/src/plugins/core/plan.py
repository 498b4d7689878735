from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Set, Tuple

from src.common.errors import DegenerateInstanceError, InvalidPlanError

UNASSIGNED = -1

# 浮点比较的相对容差
_POP_EPS = 1e-9


@dataclass(frozen=True)
class Plan:
    """选区方案：每个单元的选区标签（0..k-1 或 UNASSIGNED）

    值类型，不可变；修改用 with_labels 生成新方案。
    """

    assignment: Tuple[int, ...]
    k: int

    def __post_init__(self):
        labels = tuple(int(x) for x in self.assignment)
        object.__setattr__(self, "assignment", labels)
        if self.k < 1:
            raise InvalidPlanError(f"选区数 k 必须 >= 1，实际为 {self.k}")
        for uid, label in enumerate(labels):
            if label != UNASSIGNED and not (0 <= label < self.k):
                raise InvalidPlanError(f"label out of range: 单元 {uid} 的标签 {label} 不在 0..{self.k - 1} 内")

    @classmethod
    def unassigned(cls, n_units: int, k: int) -> "Plan":
        return cls((UNASSIGNED,) * n_units, k)

    @property
    def n_units(self) -> int:
        return len(self.assignment)

    @property
    def is_complete(self) -> bool:
        return UNASSIGNED not in self.assignment

    def __getitem__(self, unit: int) -> int:
        return self.assignment[unit]

    def with_labels(self, changes: Mapping[int, int]) -> "Plan":
        labels = list(self.assignment)
        for unit, label in changes.items():
            labels[unit] = label
        return Plan(tuple(labels), self.k)

    def districts(self) -> List[Set[int]]:
        """每个选区包含的单元集合（下标即标签）"""
        parts: List[Set[int]] = [set() for _ in range(self.k)]
        for uid, label in enumerate(self.assignment):
            if label != UNASSIGNED:
                parts[label].add(uid)
        return parts

    def canonical_form(self) -> Tuple[int, ...]:
        """按首次出现顺序重新编号，忽略选区标签的排列"""
        mapping: Dict[int, int] = {}
        out = []
        for label in self.assignment:
            if label == UNASSIGNED:
                out.append(UNASSIGNED)
                continue
            if label not in mapping:
                mapping[label] = len(mapping)
            out.append(mapping[label])
        return tuple(out)

    def canonical(self) -> "Plan":
        return Plan(self.canonical_form(), self.k)

    def __repr__(self) -> str:
        return f"Plan(k={self.k}, assignment={list(self.assignment)})"


def plan_from_districts(districts: Sequence[Iterable[int]], n_units: int) -> Plan:
    labels = [UNASSIGNED] * n_units
    for label, units in enumerate(districts):
        for u in units:
            labels[u] = label
    return Plan(tuple(labels), len(districts))


@dataclass(frozen=True)
class Constraints:
    """选区约束

    Attributes:
        k: 选区数量
        deviation: 相对理想人口允许的最大偏差比例（0.05 表示 5%）
        require_contiguity: 是否要求每个选区连通
    """

    k: int
    deviation: float = 0.0
    require_contiguity: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise InvalidPlanError(f"选区数 k 必须 >= 1，实际为 {self.k}")
        if self.deviation < 0:
            raise InvalidPlanError(f"人口偏差 deviation 必须 >= 0，实际为 {self.deviation}")

    def ideal(self, total_population: int) -> float:
        if total_population <= 0:
            raise DegenerateInstanceError("degenerate instance: 总人口为 0，无法定义理想选区人口")
        return total_population / self.k

    def population_bounds(self, total_population: int) -> Tuple[float, float]:
        """(ℓ, u) = ((1-deviation)·ideal, (1+deviation)·ideal)，已计入浮点容差"""
        ideal = self.ideal(total_population)
        slack = self.deviation * ideal + _POP_EPS * ideal
        return ideal - slack, ideal + slack

    def is_feasible_population(self, population: float, total_population: int) -> bool:
        lo, hi = self.population_bounds(total_population)
        return lo <= population <= hi

    def with_deviation(self, deviation: float) -> "Constraints":
        return Constraints(self.k, deviation, self.require_contiguity)
