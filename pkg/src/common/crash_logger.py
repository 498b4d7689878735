import sys
import traceback
import logging
from pathlib import Path
from logging.handlers import RotatingFileHandler


def setup_crash_logger(log_root: str = "logs") -> logging.Logger:
    """设置崩溃日志记录器，未捕获的异常写入 logs/crash/crash.log"""
    crash_log_dir = Path(log_root) / "crash"
    crash_log_dir.mkdir(parents=True, exist_ok=True)

    crash_logger = logging.getLogger("districtlab_crash")
    crash_logger.setLevel(logging.ERROR)
    if crash_logger.handlers:
        return crash_logger

    formatter = logging.Formatter("%(asctime)s - %(levelname)s\n命令行: %(argv)s\n详细信息:\n%(message)s\n-------------------\n")

    # 按大小轮转（最大10MB，保留5个备份）
    file_handler = RotatingFileHandler(
        crash_log_dir / "crash.log",
        maxBytes=10 * 1024 * 1024,
        backupCount=5,
        encoding="utf-8",
    )
    file_handler.setFormatter(formatter)
    crash_logger.addHandler(file_handler)
    return crash_logger


def log_crash(exc_type, exc_value, exc_traceback) -> None:
    """记录崩溃信息到日志文件"""
    if exc_type is None:
        return
    stack_trace = "".join(traceback.format_exception(exc_type, exc_value, exc_traceback))
    logging.getLogger("districtlab_crash").error(stack_trace, extra={"argv": " ".join(sys.argv)})


def install_crash_handler(log_root: str = "logs") -> None:
    """安装全局异常处理器，KeyboardInterrupt 不记录"""
    setup_crash_logger(log_root)
    original_hook = sys.excepthook

    def exception_handler(exc_type, exc_value, exc_traceback):
        if not issubclass(exc_type, KeyboardInterrupt):
            log_crash(exc_type, exc_value, exc_traceback)
        original_hook(exc_type, exc_value, exc_traceback)

    sys.excepthook = exception_handler
