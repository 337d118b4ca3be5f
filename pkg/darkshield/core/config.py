"""
Configuration management for DarkShield

Settings live in a YAML file layered over DEFAULT_CONFIG. Scenario files
override the numeric defaults per run; this file only holds what is shared
by every run on a machine.
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "DARKSHIELD_OUTPUT_DIR"

# scipy.integrate.solve_ivp methods
INTEGRATORS = ("RK45", "RK23", "DOP853", "Radau", "BDF", "LSODA")


def deep_merge(base: Mapping[str, Any], overlay: Mapping[str, Any]) -> Dict[str, Any]:
    """Return base updated by overlay, descending into sections present in both"""
    merged = dict(base)
    for key, value in overlay.items():
        current = merged.get(key)
        if isinstance(current, Mapping) and isinstance(value, Mapping):
            merged[key] = deep_merge(current, value)
        else:
            merged[key] = value
    return merged


class Config:
    """Machine-wide settings for DarkShield runs"""

    DEFAULT_CONFIG_PATHS = [
        Path.home() / ".config" / "darkshield" / "config.yml",
        Path("/etc/darkshield/config.yml"),
    ]

    DEFAULT_CONFIG = {
        "general": {
            "max_concurrent_jobs": 2,
            "log_level": "INFO",
            "log_file": "~/.local/share/darkshield/darkshield.log",
        },
        "output": {
            "directory": "~/darkshield-runs",
            "float_format": "%.10e",
        },
        "numerics": {
            "method": "DOP853",
            "rtol": 1e-10,
            "atol": 1e-12,
            "condition_limit": 1e12,
            "degeneracy_tolerance": 1e-10,
        },
        "field": {
            "terms": 20,
        },
        "spectrum": {
            "cutoff": 40.0,
            "samples": 2001,
        },
        "sse": {
            "trajectories": 1000,
            "dephasing_noise": "mean-square",
        },
    }

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = Path(config_path) if config_path else None
        self.config: Dict[str, Any] = copy.deepcopy(self.DEFAULT_CONFIG)

        source = self._locate()
        if source is None:
            logger.info("No configuration file found, using defaults")
        else:
            self.config_path = source
            self.config = deep_merge(self.config, self._read(source))

    def _locate(self) -> Optional[Path]:
        """First existing file among the explicit path and the default locations"""
        candidates = ([self.config_path] if self.config_path else []) + list(self.DEFAULT_CONFIG_PATHS)
        return next((path for path in candidates if path.exists()), None)

    @staticmethod
    def _read(path: Path) -> Dict[str, Any]:
        """
        Parse a configuration file

        A file that cannot be read or parsed, or whose top level is not a
        mapping, contributes nothing; the defaults stay in force.
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                overlay = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Error loading configuration from {path}: {e}")
            return {}

        if overlay is None:
            return {}
        if not isinstance(overlay, dict):
            logger.warning(f"Ignoring {path}: top level is {type(overlay).__name__}, expected a mapping")
            return {}

        logger.info(f"Configuration loaded from {path}")
        return overlay

    def get(self, key: str, default: Any = None) -> Any:
        """
        Look up a dotted key such as "numerics.rtol"

        Returns default when any segment is missing.
        """
        node: Any = self.config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        """Assign a dotted key, creating intermediate sections"""
        *sections, leaf = key.split(".")
        node = self.config
        for part in sections:
            node = node.setdefault(part, {})
        node[leaf] = value

    def save(self, path: Optional[Path] = None) -> Path:
        """
        Write the current settings as YAML

        Args:
            path: Destination (defaults to the loaded file, else the user config path)

        Returns:
            The path written
        """
        target = Path(path or self.config_path or self.DEFAULT_CONFIG_PATHS[0])
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(yaml.safe_dump(self.config, default_flow_style=False, sort_keys=False), encoding="utf-8")
        logger.info(f"Configuration saved to {target}")
        return target

    @staticmethod
    def expand_path(path: str) -> Path:
        """Absolute form of path, with ~ expanded"""
        return Path(path).expanduser().resolve()

    def get_output_dir(self) -> Path:
        """Run output root; DARKSHIELD_OUTPUT_DIR takes precedence over the file"""
        return self.expand_path(os.environ.get(OUTPUT_DIR_ENV) or self.get("output.directory", "~/darkshield-runs"))

    def get_log_file(self) -> Path:
        log_file = self.expand_path(self.get("general.log_file"))
        log_file.parent.mkdir(parents=True, exist_ok=True)
        return log_file

    def numerics(self) -> Dict[str, Any]:
        """
        solve_ivp keyword arguments from the numerics section

        Raises:
            ConfigurationError: Unknown method or non-positive tolerance
        """
        method = self.get("numerics.method", "DOP853")
        if method not in INTEGRATORS:
            raise ConfigurationError(
                f"Unknown integrator '{method}'",
                details={"field": "numerics.method", "allowed": list(INTEGRATORS)},
            )

        tolerances = {}
        for name, fallback in (("rtol", 1e-10), ("atol", 1e-12)):
            raw = self.get(f"numerics.{name}", fallback)
            try:
                value = float(raw)
            except (TypeError, ValueError):
                value = float("nan")
            if not value > 0:
                raise ConfigurationError(
                    f"numerics.{name} must be a positive number, got {raw!r}",
                    details={"field": f"numerics.{name}"},
                )
            tolerances[name] = value

        return {"method": method, **tolerances}
