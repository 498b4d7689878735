from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional

from ..config.config import lab_version

GENERATED_AT = "generated_at"


@dataclass
class RunMetadata:
    """每个输出文件头部的自描述信息

    除 generated_at 外所有字段都由输入决定，相同参数 + 种子输出相同。
    """

    algorithm: str
    seed: Optional[int] = None
    instance: str = ""
    instance_hash: str = ""
    config_hash: str = ""
    version: str = lab_version
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, with_timestamp: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "version": self.version,
            "instance": self.instance,
            "instance_hash": self.instance_hash,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "config_hash": self.config_hash,
        }
        for key in sorted(self.extra):
            data[key] = self.extra[key]
        if with_timestamp:
            data[GENERATED_AT] = datetime.now().isoformat(timespec="seconds")
        return data

    def header_lines(self, with_timestamp: bool = True) -> List[str]:
        return [f"# {key}: {'' if value is None else value}" for key, value in self.to_dict(with_timestamp).items()]


def parse_header_lines(lines: Iterable[str]) -> Dict[str, str]:
    """读取 `# key: value` 形式的头部，遇到第一行非注释即停止"""
    meta: Dict[str, str] = {}
    for line in lines:
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if ":" not in body:
            continue
        key, value = body.split(":", 1)
        meta[key.strip()] = value.strip()
    return meta
