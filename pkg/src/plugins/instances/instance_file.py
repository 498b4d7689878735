"""实例文件（TOML）的读写

格式示例::

    [inner]
    version = "1.0.0"

    [instance]
    name = "iowa_counties"
    description = "..."
    districts = 4

    [[units]]
    id = 0
    population = 7682
    x = -94.47
    y = 41.33
    county = "Adair"
    name = "Adair"

    [edges]
    pairs = [[0, 1], [0, 5]]

    [plans]
    enacted = [1, 1, 3, ...]

单元编号从 0 开始；方案中的选区标签从 1 开始，0 表示未分配。
"""

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import tomli
import tomlkit
from packaging import version
from packaging.specifiers import SpecifierSet
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.common.errors import InstanceFormatError
from src.common.logger import get_module_logger, LogConfig, INSTANCE_STYLE_CONFIG
from ..config.config import ROOT_DIR
from ..core import UNASSIGNED, Plan, UnitGraph

logger = get_module_logger("instances", config=LogConfig.from_style(INSTANCE_STYLE_CONFIG))

INSTANCE_FORMAT_VERSION = "1.0.0"
SUPPORTED_VERSIONS = SpecifierSet(">=1.0.0,<2.0.0")
DATA_DIR = ROOT_DIR / "data" / "instances"

PathLike = Union[str, Path]


class InnerSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str


class InstanceSection(BaseModel):
    model_config = ConfigDict(extra="allow")

    name: str = Field(min_length=1)
    description: str = ""
    districts: Optional[int] = Field(default=None, ge=1)


class UnitRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int = Field(ge=0)
    population: int = Field(ge=0)
    x: Optional[float] = None
    y: Optional[float] = None
    county: Optional[str] = None
    name: Optional[str] = None


class EdgesSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pairs: List[Tuple[int, int]] = Field(default_factory=list)


class InstanceDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    inner: InnerSection
    instance: InstanceSection
    units: List[UnitRecord] = Field(min_length=1)
    edges: EdgesSection = Field(default_factory=EdgesSection)
    plans: Dict[str, List[int]] = Field(default_factory=dict)


@dataclass
class LoadedInstance:
    graph: UnitGraph
    plans: Dict[str, Plan] = field(default_factory=dict)
    districts: Optional[int] = None
    description: str = ""
    version: str = INSTANCE_FORMAT_VERSION
    path: Optional[Path] = None


def _find_line(text: str, loc: Sequence[Any]) -> Optional[int]:
    """根据 pydantic 的错误路径在原文中粗略定位行号（从 1 开始）"""
    lines = text.splitlines()
    if not loc:
        return None
    head = str(loc[0])
    start = 0
    if head == "units" and len(loc) > 1 and isinstance(loc[1], int):
        seen = -1
        for i, line in enumerate(lines):
            if line.strip() == "[[units]]":
                seen += 1
                if seen == loc[1]:
                    start = i
                    break
        else:
            return None
        if len(loc) > 2:
            key = re.compile(rf"^\s*{re.escape(str(loc[2]))}\s*=")
            for i in range(start + 1, len(lines)):
                if lines[i].strip().startswith("["):
                    break
                if key.match(lines[i]):
                    return i + 1
        return start + 1
    section = re.compile(rf"^\s*\[\s*{re.escape(head)}\s*\]")
    for i, line in enumerate(lines):
        if section.match(line):
            start = i
            if len(loc) > 1:
                key = re.compile(rf"^\s*{re.escape(str(loc[1]))}\s*=")
                for j in range(i + 1, len(lines)):
                    if lines[j].strip().startswith("["):
                        break
                    if key.match(lines[j]):
                        return j + 1
            return start + 1
    return None


def _format_loc(loc: Sequence[Any]) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def _line_of_key(text: str, section: str, key: str) -> Optional[int]:
    return _find_line(text, (section, key))


def _build_plan(name: str, raw: List[int], n_units: int, k: int, path: Path, text: str) -> Plan:
    line = _line_of_key(text, "plans", name)
    if len(raw) != n_units:
        raise InstanceFormatError(
            f"方案 {name} 有 {len(raw)} 个标签，实例有 {n_units} 个单元", path=str(path), line=line, field=f"plans.{name}"
        )
    labels = []
    for uid, label in enumerate(raw):
        if not (0 <= label <= k):
            raise InstanceFormatError(
                f"方案 {name} 中单元 {uid} 的选区标签 {label} 超出 1..{k}（0 表示未分配）",
                path=str(path),
                line=line,
                field=f"plans.{name}",
            )
        labels.append(UNASSIGNED if label == 0 else label - 1)
    return Plan(tuple(labels), k)


def load_instance(path: PathLike) -> LoadedInstance:
    """读取实例文件；任何格式问题都带着文件 / 行号 / 字段抛出 InstanceFormatError"""
    path = Path(path)
    if not path.exists():
        raise InstanceFormatError("实例文件不存在", path=str(path))
    text = path.read_text(encoding="utf-8")

    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        lineno = getattr(e, "lineno", None)
        logger.error(f"实例文件 {path} 解析失败: {e}")
        raise InstanceFormatError(f"TOML 解析失败: {e}", path=str(path), line=lineno) from e

    try:
        doc = InstanceDocument.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first.get("loc", ())
        raise InstanceFormatError(
            first.get("msg", str(e)), path=str(path), line=_find_line(text, loc), field=_format_loc(loc)
        ) from e

    try:
        file_version = version.parse(doc.inner.version)
    except version.InvalidVersion as e:
        raise InstanceFormatError(
            f"inner.version 不是合法的版本号: {doc.inner.version}",
            path=str(path),
            line=_line_of_key(text, "inner", "version"),
            field="inner.version",
        ) from e
    if file_version not in SUPPORTED_VERSIONS:
        raise InstanceFormatError(
            f"实例格式版本 {file_version} 不在支持范围 {SUPPORTED_VERSIONS} 内",
            path=str(path),
            line=_line_of_key(text, "inner", "version"),
            field="inner.version",
        )

    units = sorted(doc.units, key=lambda u: u.id)
    ids = [u.id for u in units]
    if ids != list(range(len(units))):
        raise InstanceFormatError(
            "单元编号必须是不重复的 0..n-1", path=str(path), line=_find_line(text, ("units",)), field="units[].id"
        )
    n_units = len(units)

    edges_line = _line_of_key(text, "edges", "pairs")
    for a, b in doc.edges.pairs:
        if not (0 <= a < n_units and 0 <= b < n_units):
            raise InstanceFormatError(
                f"边 ({a}, {b}) 引用了不存在的单元 (dangling edge id)", path=str(path), line=edges_line, field="edges.pairs"
            )

    has_xy = [u.x is not None and u.y is not None for u in units]
    centroids = [(u.x, u.y) if ok else None for u, ok in zip(units, has_xy)] if any(has_xy) else None
    counties = [u.county for u in units]
    names = [u.name for u in units]

    try:
        graph = UnitGraph(
            doc.instance.name,
            [u.population for u in units],
            doc.edges.pairs,
            centroids=centroids,
            counties=counties if any(c is not None for c in counties) else None,
            unit_names=names if any(nm is not None for nm in names) else None,
        )
    except InstanceFormatError as e:
        line = edges_line if e.field == "edges" else None
        raise InstanceFormatError(str(e), path=str(path), line=line, field=e.field) from e

    plans: Dict[str, Plan] = {}
    for name, labels in doc.plans.items():
        k = doc.instance.districts or max([label for label in labels] + [1])
        plans[name] = _build_plan(name, labels, n_units, k, path, text)

    logger.info(f"加载实例 {graph.name}: {graph.n_units} 个单元, {graph.n_edges} 条边, 参考方案 {list(plans)}")
    return LoadedInstance(
        graph=graph,
        plans=plans,
        districts=doc.instance.districts,
        description=doc.instance.description,
        version=str(file_version),
        path=path,
    )


def save_instance(
    graph: UnitGraph,
    path: PathLike,
    plans: Optional[Dict[str, Plan]] = None,
    districts: Optional[int] = None,
    description: str = "",
) -> Path:
    """写出实例文件，与 load_instance 互逆"""
    path = Path(path)
    doc = tomlkit.document()

    inner = tomlkit.table()
    inner.add("version", INSTANCE_FORMAT_VERSION)
    doc.add("inner", inner)

    header = tomlkit.table()
    header.add("name", graph.name)
    header.add("description", description)
    if districts is not None:
        header.add("districts", districts)
    doc.add("instance", header)

    units = tomlkit.aot()
    for uid in range(graph.n_units):
        unit = tomlkit.table()
        unit.add("id", uid)
        unit.add("population", graph.populations[uid])
        if graph.centroids is not None:
            unit.add("x", float(graph.centroids[uid, 0]))
            unit.add("y", float(graph.centroids[uid, 1]))
        if graph.counties is not None and graph.counties[uid] is not None:
            unit.add("county", graph.counties[uid])
        if graph.unit_names is not None and graph.unit_names[uid] is not None:
            unit.add("name", graph.unit_names[uid])
        units.append(unit)
    doc.add("units", units)

    edges = tomlkit.table()
    pairs = tomlkit.array()
    for a, b in graph.edge_list:
        pairs.append([a, b])
    pairs.multiline(True)
    edges.add("pairs", pairs)
    doc.add("edges", edges)

    if plans:
        plan_table = tomlkit.table()
        for name, plan in plans.items():
            if districts is not None and plan.k != districts:
                raise InstanceFormatError(f"方案 {name} 的选区数 {plan.k} 与 districts={districts} 不一致")
            plan_table.add(name, [0 if label == UNASSIGNED else label + 1 for label in plan.assignment])
        doc.add("plans", plan_table)

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(tomlkit.dumps(doc), encoding="utf-8")
    logger.debug(f"已写出实例文件 {path}")
    return path


def instance_hash(graph: UnitGraph) -> str:
    """实例内容的 SHA-256（不含名称），用于输出文件头部"""
    payload = {
        "populations": list(graph.populations),
        "edges": [list(e) for e in graph.edge_list],
        "centroids": None if graph.centroids is None else [[round(float(v), 9) for v in row] for row in graph.centroids],
        "counties": None if graph.counties is None else list(graph.counties),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def resolve_instance_path(name_or_path: str) -> Path:
    """命令行里的 --instance 可以是路径，也可以是 data/instances 下的实例名"""
    candidate = Path(name_or_path)
    if candidate.exists():
        return candidate
    bundled = DATA_DIR / f"{name_or_path}.toml"
    if bundled.exists():
        return bundled
    raise InstanceFormatError(f"找不到实例 {name_or_path}（既不是文件，也不在 {DATA_DIR} 中）", path=name_or_path)
