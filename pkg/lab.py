import os
import sys
from pathlib import Path

from dotenv import load_dotenv

ROOT_DIR = Path(__file__).resolve().parent


def load_env(env_path: Path = ROOT_DIR / ".env") -> bool:
    # .env 可选，只用来覆盖日志级别和目录；日志模块导入时就读取这些变量，所以要先加载
    if env_path.exists():
        return load_dotenv(env_path, override=True)
    return False


env_loaded = load_env()

from src.common.crash_logger import install_crash_handler  # noqa: E402
from src.common.logger import get_module_logger, LogConfig, CLI_STYLE_CONFIG  # noqa: E402
from src.plugins.config.config import DEFAULT_CONFIG_PATH, update_config  # noqa: E402

logger = get_module_logger("lab", config=LogConfig.from_style(CLI_STYLE_CONFIG))


def init_config():
    # 首次运行从模板创建配置；模板升级后合并旧值
    if os.getenv("DISTRICTLAB_NO_CONFIG_UPDATE", "").strip().lower() in ("1", "true", "yes"):
        return
    update_config(Path(DEFAULT_CONFIG_PATH))


def raw_main() -> int:
    if env_loaded:
        logger.debug("已加载 .env")
    install_crash_handler(os.getenv("DISTRICTLAB_LOG_DIR", "logs"))
    init_config()

    from src.main import main

    return main(sys.argv[1:])


if __name__ == "__main__":
    try:
        sys.exit(raw_main())
    except KeyboardInterrupt:
        logger.warning("收到中断信号，退出")
        sys.exit(130)
