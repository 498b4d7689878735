import importlib
import random
from abc import ABC, abstractmethod
from typing import Optional

from src.common.errors import InvalidStartError, PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, OPTIMIZE_STYLE_CONFIG
from ..chains import StepKind
from ..config.config import LabConfig
from ..core import Constraints, Plan, UnitGraph, validate
from .objective import Objective, OptimizeResult

logger = get_module_logger("optimize", config=LogConfig.from_style(OPTIMIZE_STYLE_CONFIG))

"""
优化器概览：
每种方法放在 mode_<方法名>.py 中，类名为 <方法名驼峰>Optimizer，例如
mode_hill_climb.py 中的 HillClimbOptimizer。子类只需实现 optimize()，
参数从 LabConfig 读取。
"""

METHODS = ("hill_climb", "anneal", "tabu", "evolution")


def check_start(start: Plan, graph: UnitGraph, constraints: Constraints) -> None:
    report = validate(start, graph, constraints)
    if not report.valid:
        raise InvalidStartError(f"起点方案不合法: {', '.join(report.reasons)}")


class BaseOptimizer(ABC):
    """优化方法基类"""

    method = ""

    @classmethod
    def create(
        cls,
        method: str,
        objective: Optional[Objective] = None,
        neighborhood: StepKind = StepKind.FLIP,
        config: Optional[LabConfig] = None,
    ) -> "BaseOptimizer":
        class_name = "".join(part.capitalize() for part in method.split("_")) + "Optimizer"
        try:
            module = importlib.import_module(f".mode_{method}", __package__)
            optimizer_class = getattr(module, class_name)
        except (ImportError, AttributeError) as e:
            logger.debug(f"加载优化方法 {method} 失败，原因: {e}")
            raise PolicyConfigError(f"未知的优化方法 {method}，可选 {METHODS}") from e
        if not issubclass(optimizer_class, cls):
            raise PolicyConfigError(f"{class_name} 不是 {cls.__name__} 的子类")
        logger.info(f"载入优化方法：{method}")
        return optimizer_class(objective, neighborhood, config)

    def __init__(
        self,
        objective: Optional[Objective] = None,
        neighborhood: StepKind = StepKind.FLIP,
        config: Optional[LabConfig] = None,
    ):
        self.objective = objective or Objective()
        self.neighborhood = StepKind.parse(neighborhood)
        self.config = config or LabConfig()

    @abstractmethod
    def optimize(self, start: Plan, graph: UnitGraph, constraints: Constraints, rng: random.Random) -> OptimizeResult:
        """从 start 出发优化，返回见过的最好方案"""
