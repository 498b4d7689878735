from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from src.common.errors import PolicyConfigError
from ..core import UnitGraph

DISTRICT_BY_DISTRICT = "district_by_district"
WHOLE_PLAN = "whole_plan"

SPREAD_UNIFORM = "uniform"
SPREAD_BOUNDING_BOX = "bounding_box"
SPREAD_COUNTY = "county_preserving"

SEED_UNIFORM = "uniform"
SEED_BOUNDARY = "boundary"
SEED_ZONES = "zones"

MODES = (DISTRICT_BY_DISTRICT, WHOLE_PLAN)
SPREAD_RULES = (SPREAD_UNIFORM, SPREAD_BOUNDING_BOX, SPREAD_COUNTY)
SEED_RULES = (SEED_UNIFORM, SEED_BOUNDARY, SEED_ZONES)


@dataclass(frozen=True)
class FloodFillPolicy:
    """洪水填充的策略

    Attributes:
        mode: 逐个选区生长 / 所有选区同时生长
        spread_rule: 选择下一个并入单元的规则
        seed_rule: 选择种子单元的规则
        zones: seed_rule 为 zones 时每个单元的区域标签，恰好 k 个不同的值
        max_restarts: 一次 flood_fill 调用内最多尝试几次
        backtrack_limit: 卡住时最多回退几次（0 表示不回退，直接拒绝）
        fill_last: 逐个生长时最后一个选区直接吃掉剩余单元，而不是从种子生长
    """

    mode: str = DISTRICT_BY_DISTRICT
    spread_rule: str = SPREAD_UNIFORM
    seed_rule: str = SEED_UNIFORM
    zones: Optional[Tuple[int, ...]] = None
    max_restarts: int = 1
    backtrack_limit: int = 0
    fill_last: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise PolicyConfigError(f"未知的生长方式 {self.mode}，可选 {MODES}")
        if self.spread_rule not in SPREAD_RULES:
            raise PolicyConfigError(f"未知的扩张规则 {self.spread_rule}，可选 {SPREAD_RULES}")
        if self.seed_rule not in SEED_RULES:
            raise PolicyConfigError(f"未知的种子规则 {self.seed_rule}，可选 {SEED_RULES}")
        if self.max_restarts < 1:
            raise PolicyConfigError("max_restarts 必须 >= 1")
        if self.backtrack_limit < 0:
            raise PolicyConfigError("backtrack_limit 不能为负")
        if self.zones is not None:
            object.__setattr__(self, "zones", tuple(int(z) for z in self.zones))

    def check(self, graph: UnitGraph, k: int) -> None:
        """检查策略与数据是否匹配"""
        if self.spread_rule == SPREAD_BOUNDING_BOX and not graph.has_centroids:
            raise PolicyConfigError(f"bounding_box 规则需要质心坐标，实例 {graph.name} 没有")
        if self.spread_rule == SPREAD_COUNTY and not graph.has_counties:
            raise PolicyConfigError(f"county_preserving 规则需要县标签，实例 {graph.name} 没有")
        if self.seed_rule == SEED_ZONES:
            if self.zones is None or len(self.zones) != graph.n_units:
                raise PolicyConfigError("zones 种子规则需要为每个单元提供区域标签")
            if len(set(self.zones)) != k:
                raise PolicyConfigError(f"zones 必须恰好有 k={k} 个非空区域，实际为 {len(set(self.zones))}")

    def zone_members(self) -> List[List[int]]:
        """按区域标签排序后的各区域单元列表"""
        members: Dict[int, List[int]] = {}
        for uid, zone in enumerate(self.zones or ()):
            members.setdefault(zone, []).append(uid)
        return [members[z] for z in sorted(members)]

    @classmethod
    def named(cls, name: str, zones: Optional[Sequence[int]] = None, **kwargs) -> "FloodFillPolicy":
        """命令行 / 集成采样使用的预设名称"""
        presets = {
            "standard": dict(),
            "bounding_box": dict(spread_rule=SPREAD_BOUNDING_BOX),
            "county": dict(spread_rule=SPREAD_COUNTY),
            "whole_plan": dict(mode=WHOLE_PLAN),
            "whole_plan_boundary": dict(mode=WHOLE_PLAN, seed_rule=SEED_BOUNDARY),
            "whole_plan_zones": dict(mode=WHOLE_PLAN, seed_rule=SEED_ZONES),
        }
        if name not in presets:
            raise PolicyConfigError(f"未知的洪水填充预设 {name}，可选 {sorted(presets)}")
        params = dict(presets[name])
        params.update(kwargs)
        if params.get("seed_rule") == SEED_ZONES:
            params["zones"] = tuple(zones) if zones is not None else None
        return cls(**params)
