"""Configuration management for the torus observability laboratory."""

import copy
import os
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import yaml
from dotenv import load_dotenv

from .error_handlers import ConfigurationError


def _flag(raw: str) -> bool:
    return raw.strip().lower() in ("1", "true", "yes")


# environment variable -> (config key, parser)
ENV_OVERRIDES: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "OUTPUT_DIR": ("output.reports_dir", str),
    "LOG_DIR": ("output.logs_dir", str),
    "LOG_LEVEL": ("logging.level", str),
    "LOG_FILE_ENABLED": ("logging.file_enabled", _flag),
    "TORUSOBS_WORKERS": ("processing.workers", int),
    "TORUSOBS_SEED": ("processing.seed", int),
}


class Config:
    """Configuration manager that loads settings from YAML and environment variables."""

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration.

        Args:
            config_path: Path to custom config file. If None, uses default config.
        """
        # Load environment variables
        load_dotenv()

        # Determine project root
        self.project_root = Path(__file__).parent.parent.parent

        if config_path is None:
            config_path = self.project_root / "config" / "default.yaml"
        else:
            config_path = Path(config_path)

        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        try:
            with open(config_path, "r") as f:
                self._config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Cannot parse {config_path}: {e}")
        if not isinstance(self._config, dict):
            raise ConfigurationError(f"{config_path} must contain a mapping of sections")

        self.config_path = config_path
        self._apply_env_overrides()

    def _apply_env_overrides(self):
        """Override config values with environment variables."""
        for variable, (key_path, cast) in ENV_OVERRIDES.items():
            raw = os.getenv(variable)
            if not raw:
                continue
            try:
                self._set(key_path, cast(raw))
            except ValueError:
                raise ConfigurationError(f"{variable}={raw!r} is not a valid {key_path}")

    def _set(self, key_path: str, value: Any):
        """Set a value at a dot-separated path, creating sections as needed."""
        keys = key_path.split(".")
        node = self._config
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                node[key] = {}
            node = node[key]
        node[keys[-1]] = value

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key_path: Dot-separated path to config value (e.g., "geodesics.C")
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        keys = key_path.split(".")
        value = self._config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def get_output_dir(self, dir_type: str = "reports_dir") -> Path:
        """Get output directory path and ensure it exists."""
        configured = Path(self.get(f"output.{dir_type}", "outputs/reports"))
        dir_path = configured if configured.is_absolute() else self.project_root / configured
        dir_path.mkdir(parents=True, exist_ok=True)
        return dir_path

    def to_dict(self) -> Dict[str, Any]:
        """Return configuration as dictionary."""
        return copy.deepcopy(self._config)


# Global config instance
_config_instance: Optional[Config] = None


def get_config(config_path: Optional[str] = None) -> Config:
    """
    Get or create global configuration instance.

    Args:
        config_path: Path to config file. Only used on first call.

    Returns:
        Config instance
    """
    global _config_instance
    if _config_instance is None:
        _config_instance = Config(config_path)
    return _config_instance


def reset_config():
    """Reset global config instance (mainly for testing)."""
    global _config_instance
    _config_instance = None
