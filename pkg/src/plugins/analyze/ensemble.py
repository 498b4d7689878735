from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List, Optional

from src.common.errors import InvalidPlanError
from ..core import Constraints, Plan, UnitGraph, cut_edges, max_deviation
from ..instances import instance_hash


@dataclass
class Ensemble:
    """一组方案及其分数

    所有方案必须对应同一个实例（单元数相同）。scores 是每个方案的切边数，
    deviations 是人口偏差；随机游走产生的集成还带有每条记录的步数 steps。
    """

    plans: List[Plan] = field(default_factory=list)
    instance: str = ""
    instance_hash: str = ""
    algorithm: str = ""
    seed: Optional[int] = None
    scores: List[int] = field(default_factory=list)
    deviations: List[float] = field(default_factory=list)
    steps: Optional[List[int]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        sizes = {p.n_units for p in self.plans}
        if len(sizes) > 1:
            raise InvalidPlanError(f"size mismatch: 集成中的方案大小不一致 {sorted(sizes)}")
        if self.scores and len(self.scores) != len(self.plans):
            raise InvalidPlanError("scores 与 plans 长度不一致")
        if self.steps is not None and len(self.steps) != len(self.plans):
            raise InvalidPlanError("steps 与 plans 长度不一致")

    @classmethod
    def from_plans(
        cls,
        plans: Iterable[Plan],
        graph: UnitGraph,
        algorithm: str = "",
        seed: Optional[int] = None,
        steps: Optional[List[int]] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> "Ensemble":
        plans = list(plans)
        for plan in plans:
            if plan.n_units != graph.n_units:
                raise InvalidPlanError(f"size mismatch: 方案有 {plan.n_units} 个单元，实例 {graph.name} 有 {graph.n_units} 个")
        return cls(
            plans=plans,
            instance=graph.name,
            instance_hash=instance_hash(graph),
            algorithm=algorithm,
            seed=seed,
            scores=[cut_edges(p, graph) for p in plans],
            deviations=[max_deviation(p, graph, Constraints(p.k)) for p in plans],
            steps=list(steps) if steps is not None else None,
            metadata=dict(metadata or {}),
        )

    def __len__(self) -> int:
        return len(self.plans)

    def __iter__(self) -> Iterator[Plan]:
        return iter(self.plans)

    @property
    def empty(self) -> bool:
        return not self.plans

    def records(self) -> Iterator[Dict[str, Any]]:
        """逐条输出 (step, plan, cut_edges, deviation)"""
        for i, plan in enumerate(self.plans):
            yield {
                "step": self.steps[i] if self.steps is not None else i,
                "plan": list(plan.assignment),
                "k": plan.k,
                "cut_edges": self.scores[i] if self.scores else None,
                "deviation": self.deviations[i] if self.deviations else None,
            }

    def merged_with(self, other: "Ensemble") -> "Ensemble":
        if self.plans and other.plans and self.plans[0].n_units != other.plans[0].n_units:
            raise InvalidPlanError("size mismatch: 两个集成来自不同大小的实例")
        if self.instance_hash and other.instance_hash and self.instance_hash != other.instance_hash:
            raise InvalidPlanError(f"instance mismatch: {self.instance} 与 {other.instance}")
        return Ensemble(
            plans=self.plans + other.plans,
            instance=self.instance or other.instance,
            instance_hash=self.instance_hash or other.instance_hash,
            algorithm=self.algorithm if self.algorithm == other.algorithm else f"{self.algorithm}+{other.algorithm}",
            seed=self.seed,
            scores=self.scores + other.scores if self.scores and other.scores else [],
            deviations=self.deviations + other.deviations if self.deviations and other.deviations else [],
            steps=None,
            metadata={**other.metadata, **self.metadata},
        )
