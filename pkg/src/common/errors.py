"""全局异常定义

方案本身不合法（不连通、人口越界等）属于数据，用 ScoreReport / 拒绝值表示；
这里的异常只用于调用契约被破坏的情况。
"""

from typing import Any, Optional


class DistrictLabError(Exception):
    """所有自定义异常的基类"""

    exit_code = 2


class InvalidPlanError(DistrictLabError):
    """方案与实例不匹配、未完成或标签越界"""


class DegenerateInstanceError(DistrictLabError):
    """总人口为 0 等无法定义理想人口的实例"""


class EmptyDistrictError(DistrictLabError):
    """查询了一个没有任何单元的选区"""


class PolicyConfigError(DistrictLabError):
    """算法策略与数据不匹配，例如 bounding_box 但实例没有坐标"""

    exit_code = 1


class InvalidStartError(DistrictLabError):
    """随机游走 / 优化器的起点方案不合法"""


class InstanceFormatError(DistrictLabError):
    """实例文件或方案文件格式错误，带上文件、行号和字段信息"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None, field: Optional[str] = None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path:
            where.append(str(path))
        if line is not None:
            where.append(f"第{line}行")
        if field:
            where.append(f"字段 {field}")
        prefix = f"[{' '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")


class BudgetExceededError(DistrictLabError):
    """超出节点/时间预算，partial 中保存已得到的部分结果"""

    exit_code = 3

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class EmptyEnsembleError(DistrictLabError):
    """对空集成做统计"""
