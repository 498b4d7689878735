import hashlib
import json
import shutil
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import tomli
import tomlkit
from packaging import version
from packaging.specifiers import InvalidSpecifier, SpecifierSet
from packaging.version import InvalidVersion, Version

from src.common.errors import DistrictLabError
from src.common.logger import get_module_logger, CONFIG_STYLE_CONFIG, LogConfig

logger = get_module_logger("config", config=LogConfig.from_style(CONFIG_STYLE_CONFIG))

# 程序版本硬编码，配置文件里的 inner.version 只描述配置格式
is_test = False
lab_version_main = "1.2.0"
lab_version = f"test-{lab_version_main}" if is_test else lab_version_main

ROOT_DIR = Path(__file__).resolve().parent.parent.parent.parent
TEMPLATE_PATH = ROOT_DIR / "template" / "lab_config_template.toml"
DEFAULT_CONFIG_PATH = ROOT_DIR / "config" / "lab_config.toml"


class ConfigError(DistrictLabError):
    """配置文件错误"""

    exit_code = 1


def update_config(config_path: Path = DEFAULT_CONFIG_PATH, template_path: Path = TEMPLATE_PATH) -> Path:
    """用模板创建或升级用户配置

    配置文件不存在时直接从模板复制；版本号不同时把旧文件备份到 config/old/，
    然后把旧配置中的值合并进新模板（保留模板的注释和格式）。
    """
    config_path = Path(config_path)
    old_config_dir = config_path.parent / "old"

    if not config_path.exists():
        logger.info("配置文件不存在，从模板创建新配置")
        config_path.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(template_path, config_path)
        logger.info(f"已创建新配置文件: {config_path}")
        return config_path

    with open(config_path, "r", encoding="utf-8") as f:
        old_config = tomlkit.load(f)
    with open(template_path, "r", encoding="utf-8") as f:
        new_config = tomlkit.load(f)

    old_version = old_config.get("inner", {}).get("version")
    new_version = new_config.get("inner", {}).get("version")
    if old_version and new_version and old_version == new_version:
        logger.debug(f"配置文件版本号相同 (v{old_version})，跳过更新")
        return config_path
    logger.info(f"检测到配置版本号不同: 旧版本 v{old_version} -> 新版本 v{new_version}")

    old_config_dir.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    backup_path = old_config_dir / f"lab_config_{timestamp}.toml"
    shutil.move(str(config_path), backup_path)
    logger.info(f"已备份旧配置文件到: {backup_path}")

    def update_dict(target, source):
        for key, value in source.items():
            # version 字段以模板为准
            if key == "version":
                continue
            if key in target:
                if isinstance(value, dict) and isinstance(target[key], (dict, tomlkit.items.Table)):
                    update_dict(target[key], value)
                else:
                    try:
                        if isinstance(value, list):
                            target[key] = tomlkit.array(value) if value else tomlkit.array()
                        else:
                            target[key] = tomlkit.item(value)
                    except (TypeError, ValueError):
                        target[key] = value

    update_dict(new_config, old_config)
    with open(config_path, "w", encoding="utf-8") as f:
        f.write(tomlkit.dumps(new_config))
    logger.success("配置文件合并完成")
    return config_path


@dataclass
class LabConfig:
    """实验室配置类，所有可调参数的默认值都在这里"""

    INNER_VERSION: Optional[Version] = None
    LAB_VERSION: str = lab_version

    # run
    seed: int = 20240601
    threads: int = 1
    output_dir: str = "output"
    budget_seconds: float = 300.0  # 精确优化的默认时间预算

    # constraints
    deviation: float = 0.0
    require_contiguity: bool = True

    # enumerate
    enumerate_node_budget: int = 50_000_000  # 能跑完 6x6/k=4（约 3300 万节点），拒绝 10x10

    # samplers
    max_restarts: int = 1
    rebalance_budget: int = 2000
    chunk_size: int = 500  # 并行采样的分块大小，保证结果与线程数无关

    # chains
    recom_retries: int = 100
    record_every: int = 1

    # geometric
    splitline_angles: int = 180
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-6
    power_max_iters: int = 500
    power_step: float = 0.5

    # optimize
    initial_temperature: float = 2.0
    cooling: float = 0.99
    steps_per_temperature: int = 100
    min_temperature: float = 1e-3
    tabu_tenure: int = 50
    tabu_samples: int = 20
    population_size: int = 10
    generations: int = 200
    max_steps: int = 10_000
    optimize_time_budget: float = 60.0

    # logging
    progress_every: int = 10_000

    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def convert_to_specifierset(cls, value: str) -> SpecifierSet:
        try:
            return SpecifierSet(value)
        except InvalidSpecifier as e:
            logger.error(f"{value} 使用了错误的版本约束表达式")
            raise ConfigError(f"错误的版本约束表达式: {value}") from e

    @classmethod
    def get_config_version(cls, toml: dict) -> Version:
        """提取配置文件的 inner.version，缺省视为 0.0.0"""
        config_version = toml.get("inner", {}).get("version", "0.0.0")
        try:
            return version.parse(config_version)
        except InvalidVersion as e:
            logger.error("配置文件中 inner 段的 version 键是错误的版本描述，请参考模板修改")
            raise ConfigError(f"配置文件中 inner 段的 version 不合法: {config_version}") from e

    @classmethod
    def load_config(cls, config_path: Optional[str] = None) -> "LabConfig":
        """从 TOML 配置文件加载配置，文件不存在时返回默认配置"""
        config = cls()

        def run(parent: dict):
            run_config = parent["run"]
            config.seed = int(run_config.get("seed", config.seed))
            config.threads = int(run_config.get("threads", config.threads))
            config.output_dir = run_config.get("output_dir", config.output_dir)
            config.budget_seconds = float(run_config.get("budget_seconds", config.budget_seconds))

        def constraints(parent: dict):
            constraints_config = parent["constraints"]
            config.deviation = float(constraints_config.get("deviation", config.deviation))
            config.require_contiguity = bool(constraints_config.get("require_contiguity", config.require_contiguity))

        def enumerate_(parent: dict):
            config.enumerate_node_budget = int(parent["enumerate"].get("node_budget", config.enumerate_node_budget))

        def samplers(parent: dict):
            sampler_config = parent["samplers"]
            config.max_restarts = int(sampler_config.get("max_restarts", config.max_restarts))
            config.rebalance_budget = int(sampler_config.get("rebalance_budget", config.rebalance_budget))
            if config.INNER_VERSION in SpecifierSet(">=1.1.0"):
                config.chunk_size = int(sampler_config.get("chunk_size", config.chunk_size))

        def chains(parent: dict):
            chain_config = parent["chains"]
            config.recom_retries = int(chain_config.get("recom_retries", config.recom_retries))
            config.record_every = int(chain_config.get("record_every", config.record_every))

        def geometric(parent: dict):
            geo_config = parent["geometric"]
            config.splitline_angles = int(geo_config.get("angles", config.splitline_angles))
            config.kmeans_max_iters = int(geo_config.get("max_iters", config.kmeans_max_iters))
            config.kmeans_tol = float(geo_config.get("tol", config.kmeans_tol))
            config.power_max_iters = int(geo_config.get("power_max_iters", config.power_max_iters))
            config.power_step = float(geo_config.get("power_step", config.power_step))

        def optimize(parent: dict):
            opt_config = parent["optimize"]
            config.initial_temperature = float(opt_config.get("initial_temperature", config.initial_temperature))
            config.cooling = float(opt_config.get("cooling", config.cooling))
            config.steps_per_temperature = int(opt_config.get("steps_per_temperature", config.steps_per_temperature))
            config.tabu_tenure = int(opt_config.get("tabu_tenure", config.tabu_tenure))
            config.population_size = int(opt_config.get("population_size", config.population_size))
            config.generations = int(opt_config.get("generations", config.generations))
            config.max_steps = int(opt_config.get("max_steps", config.max_steps))
            config.optimize_time_budget = float(opt_config.get("time_budget", config.optimize_time_budget))
            if config.INNER_VERSION in SpecifierSet(">=1.2.0"):
                config.min_temperature = float(opt_config.get("min_temperature", config.min_temperature))
                config.tabu_samples = int(opt_config.get("tabu_samples", config.tabu_samples))

        def logging_(parent: dict):
            config.progress_every = int(parent["logging"].get("progress_every", config.progress_every))

        # 允许字段：func, support, necessary
        include_configs = {
            "run": {"func": run, "support": ">=1.0.0"},
            "constraints": {"func": constraints, "support": ">=1.0.0", "necessary": False},
            "enumerate": {"func": enumerate_, "support": ">=1.0.0", "necessary": False},
            "samplers": {"func": samplers, "support": ">=1.0.0", "necessary": False},
            "chains": {"func": chains, "support": ">=1.0.0", "necessary": False},
            "geometric": {"func": geometric, "support": ">=1.0.0", "necessary": False},
            "optimize": {"func": optimize, "support": ">=1.0.0", "necessary": False},
            "logging": {"func": logging_, "support": ">=1.1.0", "necessary": False},
        }

        if config_path is None or not Path(config_path).exists():
            if config_path is not None:
                logger.warning(f"配置文件 {config_path} 不存在，使用默认配置")
            config.INNER_VERSION = version.parse("0.0.0")
            return config

        with open(config_path, "rb") as f:
            try:
                toml_dict = tomli.load(f)
            except tomli.TOMLDecodeError as e:
                lineno = getattr(e, "lineno", "?")
                colno = getattr(e, "colno", "?")
                logger.critical(f"配置文件 {config_path} 填写有误，请检查第{lineno}行第{colno}处：{e}")
                raise ConfigError(f"配置文件解析失败: {e}") from e

        config.INNER_VERSION = cls.get_config_version(toml_dict)

        for key, item in include_configs.items():
            group_specifierset = cls.convert_to_specifierset(item["support"])
            if key in toml_dict:
                if config.INNER_VERSION in group_specifierset:
                    item["func"](toml_dict)
                else:
                    logger.error(
                        f"配置文件中的 '{key}' 字段的版本 ({config.INNER_VERSION}) 不在支持范围内: {group_specifierset}"
                    )
                    raise ConfigError(f"'{key}' 仅支持以下版本范围: {group_specifierset}")
            elif item.get("necessary", True) is False:
                pass
            else:
                logger.error(f"配置文件中缺少必需的字段: '{key}'")
                raise ConfigError(f"配置文件中缺少必需的字段: '{key}'")

        logger.success(f"成功加载配置文件: {config_path}")
        return config

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["INNER_VERSION"] = str(self.INNER_VERSION) if self.INNER_VERSION is not None else None
        return data

    def config_hash(self, overrides: Optional[Dict[str, Any]] = None) -> str:
        """配置 + 本次运行参数的哈希，写入每个输出文件的头部"""
        payload = self.to_dict()
        payload.pop("output_dir", None)
        if overrides:
            payload["overrides"] = overrides
        blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]
