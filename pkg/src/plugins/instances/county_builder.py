"""从人口普查局的公开文件构建县级实例（iowa.toml、arkansas.toml 这类）

需要三份输入：

- 县邻接文件 county_adjacency.txt。2010 版是制表符分隔、无表头，每个县一段，
  第一行写县名和 FIPS，后续行前两列留空；新版是 ``|`` 分隔、带表头，两种都能读
- 2010 年地名录县文件 Gaz_counties_national.txt（制表符分隔），取其中的
  GEOID、NAME、POP10、INTPTLAT、INTPTLONG
- 可选的现行方案 CSV，两列 ``fips,district``，选区从 1 开始

邻接的取舍：普查局的邻接文件不区分共用一段边界和只在一点相接的县，这里全部当作邻居。
需要严格共边邻接时用 ``--drop-edge`` 去掉只在一点相接的县对。自环和州外邻居总是丢掉。

用法::

    python -m src.plugins.instances.county_builder --state IA --name iowa --districts 4 \\
        --adjacency county_adjacency.txt --gazetteer Gaz_counties_national.txt \\
        --enacted iowa_2012.csv --out data/instances/iowa.toml
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import pandas as pd

from src.common.errors import DistrictLabError, InstanceFormatError
from src.common.logger import get_module_logger, LogConfig, INSTANCE_STYLE_CONFIG
from ..core import Plan, UnitGraph
from .instance_file import save_instance

logger = get_module_logger("instances", config=LogConfig.from_style(INSTANCE_STYLE_CONFIG))

PathLike = Union[str, Path]
FipsPair = Tuple[str, str]

GAZETTEER_COLUMNS = ("USPS", "GEOID", "NAME", "POP10", "INTPTLAT", "INTPTLONG")
# 普查局文件里有非 ASCII 县名（如 Doña Ana）
CENSUS_ENCODING = "latin-1"


def _fips(value) -> str:
    return str(value).strip().zfill(5)


def read_county_adjacency(path: PathLike) -> Set[FipsPair]:
    """读取县邻接文件，返回无序 FIPS 对（小的在前），不含自环"""
    path = Path(path)
    if not path.exists():
        raise InstanceFormatError("县邻接文件不存在", path=str(path))
    with open(path, "r", encoding=CENSUS_ENCODING) as f:
        first = f.readline()

    sep = "|" if "|" in first else "\t"
    # 新版可能多一列边界长度，各行列数也不一定相同
    frame = pd.read_csv(path, sep=sep, header=None, names=list(range(6)), dtype=str, encoding=CENSUS_ENCODING)
    frame = frame.iloc[:, :4]
    frame.columns = ["county", "fips", "neighbor", "neighbor_fips"]
    # 2010 版只在每段第一行写本县 FIPS
    frame["fips"] = frame["fips"].ffill()
    frame = frame.dropna(subset=["fips", "neighbor_fips"])

    pairs: Set[FipsPair] = set()
    for a, b in zip(frame["fips"], frame["neighbor_fips"]):
        a, b = _fips(a), _fips(b)
        if not (a.isdigit() and b.isdigit()):
            # 表头
            continue
        if a != b:
            pairs.add((a, b) if a < b else (b, a))
    logger.debug(f"{path}: 读到 {len(pairs)} 对相邻的县")
    return pairs


def read_gazetteer(path: PathLike, state: str) -> pd.DataFrame:
    """读取地名录中一个州的县，state 可以是邮政缩写（IA）或两位州 FIPS（19）；按 GEOID 排序"""
    path = Path(path)
    if not path.exists():
        raise InstanceFormatError("地名录文件不存在", path=str(path))
    frame = pd.read_csv(path, sep="\t", dtype=str, encoding=CENSUS_ENCODING)
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in GAZETTEER_COLUMNS if c not in frame.columns]
    if missing:
        raise InstanceFormatError(f"地名录缺少列 {missing}", path=str(path))

    frame["GEOID"] = frame["GEOID"].map(_fips)
    state = state.strip()
    if state.isdigit():
        rows = frame[frame["GEOID"].str.startswith(state.zfill(2))]
    else:
        rows = frame[frame["USPS"].str.strip() == state.upper()]
    if rows.empty:
        raise InstanceFormatError(f"地名录里没有州 {state} 的县", path=str(path))

    rows = rows.sort_values("GEOID").reset_index(drop=True)
    try:
        rows["POP10"] = rows["POP10"].astype("int64")
        rows["INTPTLAT"] = rows["INTPTLAT"].astype(float)
        rows["INTPTLONG"] = rows["INTPTLONG"].astype(float)
    except ValueError as e:
        raise InstanceFormatError(f"地名录的人口或坐标不是数字: {e}", path=str(path)) from e
    return rows


def read_plan_csv(path: PathLike) -> Dict[str, int]:
    """读取 fips,district 两列的方案 CSV，返回 FIPS → 选区（从 1 开始）"""
    path = Path(path)
    if not path.exists():
        raise InstanceFormatError("方案文件不存在", path=str(path))
    frame = pd.read_csv(path, dtype=str, comment="#")
    frame.columns = [c.strip().lower() for c in frame.columns]
    if list(frame.columns) != ["fips", "district"]:
        raise InstanceFormatError(f"方案 CSV 的列应为 fips,district，实际为 {list(frame.columns)}", path=str(path))
    assignment: Dict[str, int] = {}
    for fips, district in zip(frame["fips"], frame["district"]):
        fips = _fips(fips)
        if fips in assignment:
            raise InstanceFormatError(f"县 {fips} 在方案中出现了两次", path=str(path), field="fips")
        if not str(district).strip().isdigit() or int(district) < 1:
            raise InstanceFormatError(f"县 {fips} 的选区 {district!r} 不是正整数", path=str(path), field="district")
        assignment[fips] = int(district)
    return assignment


def _county_label(name: str) -> str:
    name = name.strip()
    return name[: -len(" County")] if name.endswith(" County") else name


def build_county_graph(
    name: str,
    counties: pd.DataFrame,
    adjacency: Iterable[FipsPair],
    drop_edges: Sequence[FipsPair] = (),
) -> Tuple[UnitGraph, List[str]]:
    """按 GEOID 顺序给县编号，建图；返回图和编号对应的 FIPS 列表

    只保留两端都在 counties 里的邻接对（州外邻居被丢掉）。
    """
    order = list(counties["GEOID"])
    index = {fips: uid for uid, fips in enumerate(order)}

    dropped = {tuple(sorted((_fips(a), _fips(b)))) for a, b in drop_edges}
    edges: Set[Tuple[int, int]] = set()
    seen_drops: Set[FipsPair] = set()
    for a, b in adjacency:
        if a not in index or b not in index:
            continue
        if (a, b) in dropped:
            seen_drops.add((a, b))
            continue
        u, v = index[a], index[b]
        edges.add((u, v) if u < v else (v, u))
    for pair in sorted(dropped - seen_drops):
        logger.warning(f"要去掉的邻接 {pair[0]}-{pair[1]} 不在邻接文件里")

    labels = [_county_label(n) for n in counties["NAME"]]
    graph = UnitGraph(
        name,
        populations=list(counties["POP10"]),
        edges=sorted(edges),
        centroids=list(zip(counties["INTPTLONG"], counties["INTPTLAT"])),
        counties=labels,
        unit_names=labels,
    )
    if not graph.is_connected():
        logger.warning(f"{name}: 县邻接图不连通，检查邻接文件和 --drop-edge")
    return graph, order


def plan_from_assignment(assignment: Dict[str, int], order: Sequence[str], districts: int) -> Plan:
    """把 FIPS → 选区 的映射按县编号排成方案；每个县都必须有选区"""
    missing = [fips for fips in order if fips not in assignment]
    if missing:
        raise InstanceFormatError(f"方案缺少 {len(missing)} 个县，例如 {missing[:3]}", field="fips")
    extra = sorted(set(assignment) - set(order))
    if extra:
        raise InstanceFormatError(f"方案里有不属于该州的县，例如 {extra[:3]}", field="fips")
    labels = []
    for fips in order:
        district = assignment[fips]
        if district > districts:
            raise InstanceFormatError(f"县 {fips} 的选区 {district} 超过 districts={districts}", field="district")
        labels.append(district - 1)
    return Plan(tuple(labels), districts)


def build_county_instance(
    adjacency_path: PathLike,
    gazetteer_path: PathLike,
    state: str,
    name: str,
    out: PathLike,
    districts: Optional[int] = None,
    enacted_path: Optional[PathLike] = None,
    drop_edges: Sequence[FipsPair] = (),
) -> Path:
    counties = read_gazetteer(gazetteer_path, state)
    graph, order = build_county_graph(name, counties, read_county_adjacency(adjacency_path), drop_edges)

    plans: Dict[str, Plan] = {}
    if enacted_path is not None:
        if districts is None:
            raise DistrictLabError("附带现行方案时必须给出 --districts")
        plans["enacted"] = plan_from_assignment(read_plan_csv(enacted_path), order, districts)

    adjacency_note = "普查局县邻接（只在一点相接的县也算相邻）"
    if drop_edges:
        adjacency_note += f"，另去掉 {len(drop_edges)} 对只在一点相接的县"
    description = f"{state.upper()} 的 {graph.n_units} 个县，2010 年人口；{adjacency_note}"
    path = save_instance(graph, out, plans=plans or None, districts=districts, description=description)
    logger.success(f"{name}: {graph.n_units} 个县，{graph.n_edges} 条邻接，总人口 {graph.total_population}，已写出 {path}")
    return path


def _parse_pair(text: str) -> FipsPair:
    parts = text.replace("-", ":").split(":")
    if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
        raise argparse.ArgumentTypeError(f"应为 FIPS:FIPS，实际为 {text!r}")
    a, b = _fips(parts[0]), _fips(parts[1])
    return (a, b) if a < b else (b, a)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="county_builder", description="从人口普查局文件构建县级实例")
    parser.add_argument("--adjacency", required=True, help="county_adjacency.txt")
    parser.add_argument("--gazetteer", required=True, help="2010 地名录县文件")
    parser.add_argument("--state", required=True, help="州的邮政缩写或两位 FIPS")
    parser.add_argument("--name", required=True, help="实例名称")
    parser.add_argument("--out", required=True, help="输出的实例 TOML")
    parser.add_argument("--districts", type=int, default=None)
    parser.add_argument("--enacted", default=None, help="现行方案 CSV（fips,district）")
    parser.add_argument("--drop-edge", type=_parse_pair, action="append", default=[], help="去掉一对邻接，如 19001:19003")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        build_county_instance(
            args.adjacency,
            args.gazetteer,
            args.state,
            args.name,
            args.out,
            districts=args.districts,
            enacted_path=args.enacted,
            drop_edges=args.drop_edge,
        )
    except DistrictLabError as e:
        logger.error(str(e))
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
