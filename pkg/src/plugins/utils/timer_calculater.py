from time import perf_counter
from functools import wraps
from typing import Optional, Dict, Callable

"""
# 计时器 / 时间预算

使用形式：
- 上下文
- 装饰器
- 直接实例化（带预算）

【装饰器】
time_dict = {}
@Timer("枚举", time_dict)
def func():
    pass

【上下文】
with Timer("分支定界", budget=300) as t:
    while not t.expired:
        ...
print(t.human_readable)

参数：
- name：计时器的名字
- storage：计时结果存储字典
- budget：时间预算（秒），None 表示不限
- auto_unit：自动选择单位（毫秒或秒）

属性：human_readable, expired, remaining
"""


class TimerTypeError(TypeError):
    """自定义类型错误"""

    __slots__ = ()

    def __init__(self, param, expected_type, actual_type):
        super().__init__(f"参数 '{param}' 类型错误，期望 {expected_type}，实际得到 {actual_type.__name__}")


class Timer:
    """
    Timer 支持三种模式：
      1. 装饰器模式：测量函数运行时间
      2. 上下文管理器模式：with 语句块内部计时
      3. 直接实例化后调用 start_now()，用作时间预算
    """

    __slots__ = ("name", "storage", "elapsed", "auto_unit", "start", "budget")

    def __init__(
        self,
        name: Optional[str] = None,
        storage: Optional[Dict[str, float]] = None,
        budget: Optional[float] = None,
        auto_unit: bool = True,
    ):
        if name is not None and not isinstance(name, str):
            raise TimerTypeError("name", "Optional[str]", type(name))
        if storage is not None and not isinstance(storage, dict):
            raise TimerTypeError("storage", "Optional[dict]", type(storage))
        if budget is not None and not isinstance(budget, (int, float)):
            raise TimerTypeError("budget", "Optional[float]", type(budget))

        self.name = name
        self.storage = storage
        self.budget = budget
        self.elapsed = None
        self.auto_unit = auto_unit
        self.start = None

    def __call__(self, func: Callable) -> Callable:
        """装饰器模式"""

        @wraps(func)
        def wrapper(*args, **kwargs):
            with self:
                return func(*args, **kwargs)

        wrapper.__timer__ = self
        return wrapper

    def start_now(self) -> "Timer":
        self.start = perf_counter()
        self.elapsed = None
        return self

    def __enter__(self):
        return self.start_now()

    def __exit__(self, *args):
        self.elapsed = perf_counter() - self.start
        if self.storage is not None and self.name:
            self.storage[self.name] = self.elapsed
        return False

    @property
    def running(self) -> float:
        """已经过的秒数（计时中也可读取）"""
        if self.start is None:
            return 0.0
        if self.elapsed is not None:
            return self.elapsed
        return perf_counter() - self.start

    @property
    def expired(self) -> bool:
        return self.budget is not None and self.running >= self.budget

    @property
    def remaining(self) -> Optional[float]:
        if self.budget is None:
            return None
        return max(0.0, self.budget - self.running)

    @property
    def human_readable(self) -> str:
        """人类可读时间格式"""
        if self.start is None:
            return "未计时"
        seconds = self.running
        if self.auto_unit:
            return f"{seconds * 1000:.2f}毫秒" if seconds < 1 else f"{seconds:.2f}秒"
        return f"{seconds:.4f}秒"

    def __str__(self):
        if self.start is None:
            return f"<Timer {self.name or '匿名'} [未开始]>"
        if self.elapsed is None:
            return f"<Timer {self.name or '匿名'} [计时中: {self.running:.4f}秒]>"
        return f"<Timer {self.name or '匿名'} [{self.human_readable}]>"
