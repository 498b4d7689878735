from .config import LabConfig, ConfigError, lab_version, update_config

__all__ = ["LabConfig", "ConfigError", "lab_version", "update_config"]
