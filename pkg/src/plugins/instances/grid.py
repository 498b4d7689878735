from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from src.common.errors import InstanceFormatError, InvalidPlanError
from src.common.logger import get_module_logger, LogConfig, INSTANCE_STYLE_CONFIG
from ..core import Plan, UnitGraph

logger = get_module_logger("instances", config=LogConfig.from_style(INSTANCE_STYLE_CONFIG))

ROOK = "rook"
QUEEN = "queen"


@dataclass(frozen=True)
class GridSpec:
    """网格实例描述

    populations 为 None 时每个格子人口为 1，否则是 rows×cols 的矩阵（按行）。
    """

    rows: int
    cols: int
    adjacency: str = ROOK
    populations: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InstanceFormatError(f"网格尺寸必须为正，实际为 {self.rows}x{self.cols}", field="grid")
        if self.adjacency not in (ROOK, QUEEN):
            raise InstanceFormatError(f"未知的邻接方式 {self.adjacency}，可选 rook / queen", field="adjacency")
        if self.populations is not None:
            matrix = tuple(tuple(int(p) for p in row) for row in self.populations)
            if len(matrix) != self.rows or any(len(row) != self.cols for row in matrix):
                raise InstanceFormatError(f"人口矩阵尺寸与网格 {self.rows}x{self.cols} 不一致", field="populations")
            object.__setattr__(self, "populations", matrix)

    @classmethod
    def parse(cls, text: str, adjacency: str = ROOK) -> "GridSpec":
        """解析 "6x6" 形式的网格描述"""
        parts = text.lower().replace("×", "x").split("x")
        if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
            raise InstanceFormatError(f"无法解析网格描述 {text!r}，应形如 6x6", field="grid")
        return cls(int(parts[0]), int(parts[1]), adjacency)

    @property
    def name(self) -> str:
        suffix = "" if self.adjacency == ROOK else f"_{self.adjacency}"
        return f"grid{self.rows}x{self.cols}{suffix}"

    def unit_id(self, row: int, col: int) -> int:
        return row * self.cols + col


def make_grid(spec: GridSpec) -> UnitGraph:
    """按行优先编号生成网格图，质心取整数格点 (col, row)"""
    rows, cols = spec.rows, spec.cols
    edges: List[Tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            u = spec.unit_id(r, c)
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
            if spec.adjacency == QUEEN and r + 1 < rows:
                if c + 1 < cols:
                    edges.append((u, u + cols + 1))
                if c > 0:
                    edges.append((u, u + cols - 1))

    if spec.populations is None:
        populations = [1] * (rows * cols)
    else:
        populations = [p for row in spec.populations for p in row]

    centroids = [(float(c), float(r)) for r in range(rows) for c in range(cols)]
    graph = UnitGraph(spec.name, populations, edges, centroids=centroids)
    logger.debug(f"生成网格 {spec.name}: {graph.n_units} 个单元, {graph.n_edges} 条边")
    return graph


def grid(rows: int, cols: Optional[int] = None, queen: bool = False) -> UnitGraph:
    """make_grid 的快捷方式，cols 缺省时为方形网格"""
    return make_grid(GridSpec(rows, rows if cols is None else cols, QUEEN if queen else ROOK))


def make_path(populations: Sequence[int], name: Optional[str] = None) -> UnitGraph:
    """1×n 路径实例"""
    n = len(populations)
    edges = [(i, i + 1) for i in range(n - 1)]
    centroids = [(float(i), 0.0) for i in range(n)]
    return UnitGraph(name or f"path{n}", list(populations), edges, centroids=centroids)


def quadrant_zones(rows: int, cols: int) -> List[int]:
    """把网格分成四个象限的区域标签（左上 0，右上 1，左下 2，右下 3）"""
    if rows < 2 or cols < 2:
        raise InstanceFormatError(f"{rows}x{cols} 的网格无法分成四个象限", field="grid")
    zones = []
    for r in range(rows):
        for c in range(cols):
            zones.append(2 * int(2 * r >= rows) + int(2 * c >= cols))
    return zones


def quadrant_plan(rows: int, cols: Optional[int] = None) -> Plan:
    """四象限方案；6x6 上即四个 3x3 方块"""
    cols = rows if cols is None else cols
    return Plan(tuple(quadrant_zones(rows, cols)), 4)


def stripe_plan(rows: int, cols: int, k: int, vertical: bool = True) -> Plan:
    """条带方案：按列（vertical）或按行等分成 k 条"""
    length = cols if vertical else rows
    if k < 1 or length % k != 0:
        raise InvalidPlanError(f"无法把长度 {length} 等分为 {k} 条")
    width = length // k
    labels = []
    for r in range(rows):
        for c in range(cols):
            labels.append((c if vertical else r) // width)
    return Plan(tuple(labels), k)
