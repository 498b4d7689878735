from dataclasses import replace
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import pandas as pd

from src.common.errors import InstanceFormatError, InvalidPlanError
from src.common.logger import get_module_logger, LogConfig, INSTANCE_STYLE_CONFIG
from ..core import UNASSIGNED, Plan
from .metadata import RunMetadata, parse_header_lines

logger = get_module_logger("instances", config=LogConfig.from_style(INSTANCE_STYLE_CONFIG))

PathLike = Union[str, Path]


def save_plan(path: PathLike, plan: Plan, metadata: Optional[RunMetadata] = None) -> Path:
    """写出方案 CSV（unit,district），选区从 1 开始，0 表示未分配"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = replace(metadata, extra=dict(metadata.extra)) if metadata is not None else RunMetadata(algorithm="manual")
    meta.extra.setdefault("districts", plan.k)

    frame = pd.DataFrame(
        {
            "unit": range(plan.n_units),
            "district": [0 if label == UNASSIGNED else label + 1 for label in plan.assignment],
        }
    )
    with open(path, "w", encoding="utf-8", newline="") as f:
        for line in meta.header_lines():
            f.write(line + "\n")
        frame.to_csv(f, index=False, lineterminator="\n")
    logger.debug(f"已写出方案 {path}")
    return path


def read_plan_metadata(path: PathLike) -> Dict[str, str]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_header_lines(f)


def load_plan_with_metadata(
    path: PathLike, n_units: Optional[int] = None, k: Optional[int] = None
) -> Tuple[Plan, Dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise InstanceFormatError("方案文件不存在", path=str(path))
    meta = read_plan_metadata(path)

    try:
        frame = pd.read_csv(path, comment="#", dtype="int64")
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InstanceFormatError(f"方案 CSV 解析失败: {e}", path=str(path)) from e
    if list(frame.columns) != ["unit", "district"]:
        raise InstanceFormatError(f"方案 CSV 的列应为 unit,district，实际为 {list(frame.columns)}", path=str(path))

    frame = frame.sort_values("unit")
    units = frame["unit"].tolist()
    if units != list(range(len(units))):
        raise InstanceFormatError("方案 CSV 中的单元编号必须是不重复的 0..n-1", path=str(path), field="unit")
    if n_units is not None and len(units) != n_units:
        raise InvalidPlanError(f"size mismatch: 方案文件有 {len(units)} 个单元，实例有 {n_units} 个")

    if k is None:
        k = int(meta["districts"]) if meta.get("districts", "").isdigit() else int(max(frame["district"].max(), 1))
    labels = []
    for uid, label in zip(units, frame["district"].tolist()):
        if not (0 <= label <= k):
            raise InvalidPlanError(f"label out of range: 单元 {uid} 的选区 {label} 不在 1..{k} 内")
        labels.append(UNASSIGNED if label == 0 else int(label) - 1)
    return Plan(tuple(labels), k), meta


def load_plan(path: PathLike, n_units: Optional[int] = None, k: Optional[int] = None) -> Plan:
    """读取方案 CSV；n_units 给出时检查与实例大小一致"""
    plan, _ = load_plan_with_metadata(path, n_units=n_units, k=k)
    return plan
