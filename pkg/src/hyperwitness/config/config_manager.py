"""
Configuration Manager for hyperwitness
======================================

Numerical tolerances, noise-threshold search settings, fringe model defaults
and the location of the bundled stabilizer tables. Values come from built-in
defaults, optionally overridden by a YAML or JSON file and by environment
variables.
"""

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from ..utils.error_handling import ConfigurationError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# src/hyperwitness/config/config_manager.py -> repository root
PROJECT_ROOT = Path(__file__).resolve().parents[3]
DEFAULT_TABLE_DIR = PROJECT_ROOT / "tables"

ENV_OVERRIDES = {
    "HYPERWITNESS_TABLE_DIR": ("tables", "directory"),
    "HYPERWITNESS_LOG_LEVEL": ("logging", "level"),
}


class ConfigManager:
    """Layered configuration: defaults, then file, then environment."""

    def __init__(self, config_path: Optional[str] = None, strict: bool = False):
        """
        Initialize configuration manager.

        Args:
            config_path: Optional path to a YAML or JSON configuration file
            strict: Raise ConfigurationError on a missing or unreadable file
                instead of falling back to the defaults
        """
        self.config_path = config_path
        self.strict = strict
        self.default_configs = self._get_default_configs()

        if config_path and os.path.exists(config_path):
            self._load_config_file(config_path)
        else:
            if config_path:
                if strict:
                    raise ConfigurationError(
                        f"Config file not found: {config_path}", config_component="file"
                    )
                logger.warning(f"Config file not found: {config_path}")
            logger.debug("Using default configuration settings")
            self.config_data = copy.deepcopy(self.default_configs)

        self._apply_env_overrides()

    def _get_default_configs(self) -> Dict[str, Any]:
        return {
            "numerics": {
                "hermitian_tolerance": 1e-12,
                "trace_tolerance": 1e-12,
                "positivity_tolerance": 1e-10,
                "jacobi_tolerance": 1e-12,
                "jacobi_max_sweeps": 100,
            },
            "noise": {
                "threshold_tolerance": 1e-6,
                "monotonicity_grid": 21,
                "sweep_workers": 4,
            },
            "fringe": {
                "wavelength_um": 0.728,
                "bandwidth_um": 0.006,
                "baseline": 1000.0,
                "span_um": 300.0,
                "points": 121,
            },
            "tables": {
                "directory": str(DEFAULT_TABLE_DIR),
                "default_file": "vallone2009_table1.json",
            },
            "logging": {
                "level": "INFO",
                "file": None,
            },
        }

    def _load_config_file(self, config_path: str) -> None:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                if config_path.endswith((".yaml", ".yml")):
                    file_config = yaml.safe_load(f) or {}
                elif config_path.endswith(".json"):
                    file_config = json.load(f)
                else:
                    raise ValueError(f"Unsupported config format: {config_path}")

            if not isinstance(file_config, dict):
                raise ValueError("Top level of a config file must be a mapping")

            self.config_data = self._merge_configs(self.default_configs, file_config)
            logger.info(f"Configuration loaded from: {config_path}")

        except Exception as e:
            if self.strict:
                raise ConfigurationError(
                    f"Failed to load config from {config_path}: {e}", config_component="file"
                ) from e
            logger.error(f"Failed to load config from {config_path}: {e}")
            logger.info("Using default configuration")
            self.config_data = copy.deepcopy(self.default_configs)

    def _merge_configs(
        self, default: Dict[str, Any], override: Dict[str, Any]
    ) -> Dict[str, Any]:
        merged = copy.deepcopy(default)

        for key, value in override.items():
            if (
                key in merged
                and isinstance(merged[key], dict)
                and isinstance(value, dict)
            ):
                merged[key] = self._merge_configs(merged[key], value)
            else:
                merged[key] = value

        return merged

    def _apply_env_overrides(self) -> None:
        for env_var, (section, key) in ENV_OVERRIDES.items():
            value = os.getenv(env_var)
            if value:
                self.config_data.setdefault(section, {})[key] = value
                logger.debug(f"{section}.{key} overridden by {env_var}")

    def get_config(self, section: str, default: Any = None) -> Any:
        """
        Get configuration for a specific section.

        Args:
            section: Configuration section name
            default: Default value if section not found

        Returns:
            Configuration value or default
        """
        return self.config_data.get(section, default)

    def get_value(self, section: str, key: str, default: Any = None) -> Any:
        return self.get_config(section, {}).get(key, default)

    def table_directory(self) -> Path:
        return Path(self.get_value("tables", "directory", DEFAULT_TABLE_DIR))

    def default_table_path(self) -> Path:
        return self.table_directory() / self.get_value(
            "tables", "default_file", "vallone2009_table1.json"
        )

    def save_config(self, output_path: str) -> bool:
        """
        Save current configuration to file.

        Returns:
            True if successful, False otherwise
        """
        try:
            with open(output_path, "w", encoding="utf-8") as f:
                if output_path.endswith((".yaml", ".yml")):
                    yaml.dump(self.config_data, f, default_flow_style=False, indent=2)
                elif output_path.endswith(".json"):
                    json.dump(self.config_data, f, indent=2)
                else:
                    raise ValueError(f"Unsupported output format: {output_path}")

            logger.info(f"Configuration saved to: {output_path}")
            return True

        except Exception as e:
            logger.error(f"Failed to save configuration: {e}")
            return False

    def get_all_config(self) -> Dict[str, Any]:
        return copy.deepcopy(self.config_data)

    def validate_config(self) -> Dict[str, Any]:
        """
        Validate the current configuration.

        Returns:
            Validation result with status and any issues
        """
        issues = []

        for section in ("numerics", "noise", "fringe", "tables"):
            if section not in self.config_data:
                issues.append(f"Missing required section: {section}")

        for key, value in self.get_config("numerics", {}).items():
            if not isinstance(value, (int, float)) or value <= 0:
                issues.append(f"numerics.{key} must be a positive number")

        noise = self.get_config("noise", {})
        tol = noise.get("threshold_tolerance")
        if not isinstance(tol, (int, float)) or not 0 < tol < 1:
            issues.append("noise.threshold_tolerance must lie in (0, 1)")
        if not isinstance(noise.get("sweep_workers"), int) or noise.get("sweep_workers", 0) < 1:
            issues.append("noise.sweep_workers must be a positive integer")
        if not isinstance(noise.get("monotonicity_grid"), int) or noise.get("monotonicity_grid", 0) < 3:
            issues.append("noise.monotonicity_grid must be an integer >= 3")

        fringe = self.get_config("fringe", {})
        for key in ("wavelength_um", "bandwidth_um", "span_um"):
            value = fringe.get(key)
            if not isinstance(value, (int, float)) or value <= 0:
                issues.append(f"fringe.{key} must be positive")
        baseline = fringe.get("baseline")
        if not isinstance(baseline, (int, float)) or baseline < 0:
            issues.append("fringe.baseline must be non-negative")

        if not self.table_directory().is_dir():
            issues.append(f"Table directory does not exist: {self.table_directory()}")

        return {
            "valid": len(issues) == 0,
            "issues": issues,
            "sections_count": len(self.config_data),
            "table_directory": str(self.table_directory()),
        }
