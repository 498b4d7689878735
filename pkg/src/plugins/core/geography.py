from collections import deque
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from src.common.errors import InstanceFormatError
from src.common.logger import get_module_logger, LogConfig, CORE_STYLE_CONFIG

logger = get_module_logger("core", config=LogConfig.from_style(CORE_STYLE_CONFIG))

Edge = Tuple[int, int]


class UnitGraph:
    """地理结构：单元、人口、邻接关系，以及可选的质心坐标与县标签。

    构造后不可变，可在线程间共享。单元编号为 0..n-1 的稠密整数，
    边以 (a, b)（a < b）的形式保存，按字典序排列。

    Attributes:
        name: 实例名称
        n_units: 单元数量 n
        populations: 每个单元的人口（非负整数）
        edge_list: 排好序的边列表，长度 m
        centroids: (n, 2) 的坐标数组，没有坐标时为 None
        counties: 每个单元的县标签，没有时为 None
        G: networkx 图（已冻结），供需要图算法的地方使用
    """

    def __init__(
        self,
        name: str,
        populations: Sequence[int],
        edges: Iterable[Sequence[int]],
        centroids: Optional[Sequence[Optional[Sequence[float]]]] = None,
        counties: Optional[Sequence[Optional[str]]] = None,
        unit_names: Optional[Sequence[Optional[str]]] = None,
    ):
        self.name = name
        self.n_units = len(populations)

        pops = []
        for uid, p in enumerate(populations):
            if int(p) != p or p < 0:
                raise InstanceFormatError(f"单元 {uid} 的人口必须是非负整数，实际为 {p}", field=f"units[{uid}].population")
            pops.append(int(p))
        self.populations: Tuple[int, ...] = tuple(pops)
        self.population_array = np.asarray(pops, dtype=np.int64)
        self.total_population = int(sum(pops))

        seen: Set[Edge] = set()
        for raw in edges:
            a, b = int(raw[0]), int(raw[1])
            if a == b:
                raise InstanceFormatError(f"边 ({a}, {b}) 是自环", field="edges")
            if not (0 <= a < self.n_units and 0 <= b < self.n_units):
                raise InstanceFormatError(f"边 ({a}, {b}) 引用了不存在的单元 (dangling edge id)", field="edges")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise InstanceFormatError(f"重复的边 ({a}, {b})", field="edges")
            seen.add(key)
        self.edge_list: Tuple[Edge, ...] = tuple(sorted(seen))
        self.edge_index: Dict[Edge, int] = {e: i for i, e in enumerate(self.edge_list)}

        adjacency: List[List[int]] = [[] for _ in range(self.n_units)]
        for a, b in self.edge_list:
            adjacency[a].append(b)
            adjacency[b].append(a)
        self._adj: Tuple[Tuple[int, ...], ...] = tuple(tuple(sorted(nbrs)) for nbrs in adjacency)
        # 位掩码形式的邻接，用于枚举
        self.neighbor_masks: Tuple[int, ...] = tuple(sum(1 << v for v in nbrs) for nbrs in self._adj)

        self.centroids: Optional[np.ndarray] = None
        if centroids is not None:
            present = [c is not None for c in centroids]
            if any(present) and not all(present):
                raise InstanceFormatError("质心坐标必须全部提供或全部缺省", field="units[].centroid")
            if all(present) and len(centroids) > 0:
                if len(centroids) != self.n_units:
                    raise InstanceFormatError("质心数量与单元数量不一致", field="units[].centroid")
                arr = np.asarray(centroids, dtype=float).reshape(self.n_units, 2)
                if not np.all(np.isfinite(arr)):
                    raise InstanceFormatError("质心坐标必须是有限实数", field="units[].centroid")
                self.centroids = arr

        self.counties: Optional[Tuple[Optional[str], ...]] = None
        if counties is not None and any(c is not None for c in counties):
            if len(counties) != self.n_units:
                raise InstanceFormatError("县标签数量与单元数量不一致", field="units[].county")
            self.counties = tuple(None if c is None else str(c) for c in counties)

        self.unit_names: Optional[Tuple[Optional[str], ...]] = tuple(unit_names) if unit_names is not None else None

        self.G = nx.Graph(name=name)
        for uid in range(self.n_units):
            self.G.add_node(uid, population=self.populations[uid])
            if self.centroids is not None:
                self.G.nodes[uid]["pos"] = (float(self.centroids[uid, 0]), float(self.centroids[uid, 1]))
            if self.counties is not None:
                self.G.nodes[uid]["county"] = self.counties[uid]
        self.G.add_edges_from(self.edge_list)
        nx.freeze(self.G)

        logger.debug(f"构建实例 {name}: {self.n_units} 个单元, {self.n_edges} 条边, 总人口 {self.total_population}")

    @property
    def n_edges(self) -> int:
        return len(self.edge_list)

    @property
    def has_centroids(self) -> bool:
        return self.centroids is not None

    @property
    def has_counties(self) -> bool:
        return self.counties is not None

    def neighbors(self, unit: int) -> Tuple[int, ...]:
        return self._adj[unit]

    def degree(self, unit: int) -> int:
        return len(self._adj[unit])

    def population_of(self, units: Iterable[int]) -> int:
        return sum(self.populations[u] for u in units)

    def components(self, units: Iterable[int]) -> List[Set[int]]:
        """给定单元集合诱导子图的连通分量（按最小单元编号排序）"""
        remaining = set(units)
        comps: List[Set[int]] = []
        for start in sorted(remaining):
            if start not in remaining:
                continue
            comp = {start}
            remaining.discard(start)
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v in self._adj[u]:
                    if v in remaining:
                        remaining.discard(v)
                        comp.add(v)
                        queue.append(v)
            comps.append(comp)
        return comps

    def is_connected_set(self, units: Iterable[int]) -> bool:
        """单元集合的诱导子图是否连通（空集视为不连通）"""
        unit_set = set(units)
        if not unit_set:
            return False
        start = next(iter(unit_set))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in self._adj[u]:
                if v in unit_set and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(unit_set)

    def is_connected(self) -> bool:
        return self.n_units > 0 and self.is_connected_set(range(self.n_units))

    def __repr__(self) -> str:
        return f"<UnitGraph {self.name} n={self.n_units} m={self.n_edges}>"
