import json
from pathlib import Path
from typing import Dict, Optional, Union

import pandas as pd

from src.common.errors import InstanceFormatError
from src.common.logger import get_module_logger, LogConfig, ANALYZE_STYLE_CONFIG
from ..core import Plan
from ..instances import RunMetadata
from .ensemble import Ensemble
from .stats import EdgeFrequency

logger = get_module_logger("analyze", config=LogConfig.from_style(ANALYZE_STYLE_CONFIG))

PathLike = Union[str, Path]

METADATA_RECORD = "metadata"


def histogram_to_frame(histogram: Dict[int, int]) -> pd.DataFrame:
    """列为 score,count，按 score 升序"""
    items = sorted(histogram.items())
    return pd.DataFrame({"score": [s for s, _ in items], "count": [c for _, c in items]})


def edge_frequency_to_frame(frequency: EdgeFrequency) -> pd.DataFrame:
    """列为 unit_a,unit_b,frequency"""
    return pd.DataFrame(
        {
            "unit_a": [a for a, _ in frequency.edges],
            "unit_b": [b for _, b in frequency.edges],
            "frequency": list(frequency.values),
        }
    )


def save_frame(path: PathLike, frame: pd.DataFrame, metadata: Optional[RunMetadata] = None) -> Path:
    """写出带 `# key: value` 头部的 CSV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        if metadata is not None:
            for line in metadata.header_lines():
                f.write(line + "\n")
        frame.to_csv(f, index=False, lineterminator="\n")
    logger.debug(f"已写出 {path}（{len(frame)} 行）")
    return path


def save_ensemble(path: PathLike, ensemble: Ensemble, metadata: Optional[RunMetadata] = None) -> Path:
    """JSON Lines：第一行是元数据记录，之后每行一个方案"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "record": METADATA_RECORD,
        "instance": ensemble.instance,
        "instance_hash": ensemble.instance_hash,
        "algorithm": ensemble.algorithm,
        "seed": ensemble.seed,
        "size": len(ensemble),
        "metadata": ensemble.metadata,
    }
    if metadata is not None:
        header["run"] = metadata.to_dict()
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header, ensure_ascii=False, default=str) + "\n")
        for record in ensemble.records():
            f.write(json.dumps(record) + "\n")
    logger.info(f"已保存 {len(ensemble)} 个方案到 {path}")
    return path


def load_ensemble(path: PathLike) -> Ensemble:
    path = Path(path)
    if not path.exists():
        raise InstanceFormatError("集成文件不存在", path=str(path))
    header: Optional[dict] = None
    plans, steps, scores, deviations = [], [], [], []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise InstanceFormatError(f"JSON 解析失败: {e.msg}", path=str(path), line=line_no) from e
            if header is None:
                if record.get("record") != METADATA_RECORD:
                    raise InstanceFormatError("第一行必须是元数据记录", path=str(path), line=1)
                header = record
                continue
            try:
                plans.append(Plan(tuple(record["plan"]), int(record["k"])))
            except KeyError as e:
                raise InstanceFormatError(f"缺少字段 {e}", path=str(path), line=line_no, field=str(e)) from e
            steps.append(int(record.get("step", len(steps))))
            scores.append(record.get("cut_edges"))
            deviations.append(record.get("deviation"))
    if header is None:
        raise InstanceFormatError("集成文件为空", path=str(path))
    return Ensemble(
        plans=plans,
        instance=header.get("instance", ""),
        instance_hash=header.get("instance_hash", ""),
        algorithm=header.get("algorithm", ""),
        seed=header.get("seed"),
        scores=scores if None not in scores else [],
        deviations=deviations if None not in deviations else [],
        steps=steps,
        metadata=header.get("metadata", {}),
    )
