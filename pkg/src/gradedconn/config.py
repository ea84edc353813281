"""Engine configuration loader."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

logger = logging.getLogger(__name__)

THREADS_ENV = "GCONN_THREADS"


def get_project_root() -> Path:
    """Repository root: three levels up from this file."""
    return Path(__file__).parent.parent.parent


class EngineConfig:
    """
    Engine configuration.

    Loads tolerances, limits, logging and sampling defaults from YAML. Missing or unreadable
    files fall back to built-in defaults.
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None) -> None:
        """
        Initialize engine configuration.

        Args:
            config_path: Path to YAML config file. If None, uses ``config.yml`` at the project root.
        """
        if config_path is None:
            config_path = get_project_root() / "config.yml"

        self.config_path = Path(config_path)
        self.config: Dict[str, Any] = {}
        self.load()

    def load(self) -> None:
        """Load configuration from YAML file."""
        if not self.config_path.exists():
            logger.warning(f"Config file not found: {self.config_path}, using defaults")
            self._use_defaults()
            return

        try:
            with open(self.config_path) as f:
                loaded = yaml.safe_load(f) or {}
            self._use_defaults()
            for section, values in loaded.items():
                if isinstance(values, dict):
                    self.config.setdefault(section, {}).update(values)
                else:
                    self.config[section] = values
            logger.info(f"Loaded engine config from {self.config_path}")
        except Exception as e:
            logger.error(f"Failed to load config: {e}, using defaults")
            self._use_defaults()

    def _use_defaults(self) -> None:
        """Use default configuration."""
        self.config = {
            "tolerance": {"relative": 1e-8, "absolute": 1e-12},
            "limits": {"max_expression_ops": 20000, "threads": None},
            "logging": {"level": "INFO"},
            "sampling": {"default_count": 20, "default_seed": 0},
        }

    def _section(self, name: str) -> Dict[str, Any]:
        section = self.config.get(name) or {}
        return section if isinstance(section, dict) else {}

    def get_relative_tolerance(self) -> float:
        return float(self._section("tolerance").get("relative", 1e-8))

    def get_absolute_tolerance(self) -> float:
        return float(self._section("tolerance").get("absolute", 1e-12))

    def get_max_expression_ops(self) -> int:
        return int(self._section("limits").get("max_expression_ops", 20000))

    def get_threads(self) -> int:
        """Worker count: ``GCONN_THREADS`` wins over the config file, then the CPU count."""
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                logger.warning(f"Ignoring non-integer {THREADS_ENV}={env!r}")
        configured = self._section("limits").get("threads")
        if configured:
            return max(1, int(configured))
        return os.cpu_count() or 1

    def get_log_level(self) -> str:
        return str(self._section("logging").get("level", "INFO")).upper()

    def get_default_count(self) -> int:
        return int(self._section("sampling").get("default_count", 20))

    def get_default_seed(self) -> int:
        return int(self._section("sampling").get("default_seed", 0))
