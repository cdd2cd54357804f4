"""
Configuration Loader Module

This module handles loading the YAML configuration files and validating
the numeric settings shared by every engine.
"""

import logging
import os
import re
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

SETTINGS_FILE = "pairwords_config.yaml"
_PLACEHOLDER = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


class ConfigLoader:
    """Load and manage configuration from YAML files."""

    def __init__(self, config_dir: Union[str, Path] = "configs"):
        """
        Initialize the configuration loader.

        Args:
            config_dir: Directory containing configuration files
        """
        self.config_dir = Path(config_dir)
        self.configs: Dict[str, Dict[str, Any]] = {}

        logger.debug(f"ConfigLoader initialized with directory: {self.config_dir}")

    def load_config(self, config_file: str) -> Dict[str, Any]:
        """
        Load a configuration file.

        Args:
            config_file: Name of the configuration file (e.g., 'pairwords_config.yaml')

        Returns:
            Dictionary containing configuration
        """
        config_path = self.config_dir / config_file

        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        try:
            with open(config_path, "r", encoding="utf-8") as f:
                config = yaml.safe_load(f) or {}

            config = self._replace_env_vars(config)

            self.configs[config_file] = config
            logger.info(f"Loaded configuration from {config_path}")

            return config

        except Exception as e:
            logger.error(f"Error loading configuration from {config_file}: {str(e)}")
            raise

    def _replace_env_vars(self, config: Any) -> Any:
        """
        Recursively replace ${VAR} placeholders with environment values.

        Unset variables leave the placeholder untouched so that the
        settings model can tell "unset" from an empty string.
        """
        if isinstance(config, dict):
            return {k: self._replace_env_vars(v) for k, v in config.items()}
        elif isinstance(config, list):
            return [self._replace_env_vars(item) for item in config]
        elif isinstance(config, str):
            return _PLACEHOLDER.sub(lambda m: os.getenv(m.group(1), m.group(0)), config)
        else:
            return config

    def get_config(self, config_file: str) -> Dict[str, Any]:
        """Get a loaded configuration or load it if not already loaded."""
        if config_file not in self.configs:
            return self.load_config(config_file)
        return self.configs[config_file]

    def reload_config(self, config_file: str) -> Dict[str, Any]:
        """Reload a configuration file from disk."""
        return self.load_config(config_file)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NumericsSettings(_Section):
    eigen_tolerance: float = Field(1e-14, gt=0)
    eigen_max_iterations: int = Field(100_000, gt=0)
    fixed_point_tolerance: float = Field(1e-15, gt=0)
    fixed_point_max_iterations: int = Field(10_000, gt=0)
    newton_polish_steps: int = Field(3, ge=0)


class OracleSettings(_Section):
    enumeration_budget: int = Field(100_000_000, gt=0)
    exact_max_length: int = Field(10, ge=0)
    exact_max_letters: int = Field(3, ge=1)
    pattern_max_length: int = Field(8, ge=0)


class ExactSettings(_Section):
    default_tolerance: float = Field(1e-10, gt=0)
    fast_path_threshold: int = Field(10_000, gt=0)
    max_quadruples: int = Field(5_000_000, gt=0)
    root_gap: float = Field(1e-6, gt=0)


class AsymptoticsSettings(_Section):
    fourier_tolerance: float = Field(1e-12, gt=0)
    fourier_max_terms: int = Field(200, gt=0)
    density_tolerance: float = Field(1e-9, ge=1e-9)
    series_tolerance: float = Field(1e-14, gt=0)


class SimulationSettings(_Section):
    max_letter: int = Field(2**15, gt=1, le=2**15)
    default_words: List[int] = Field(default_factory=lambda: [50_000, 200_000])
    max_total_letters: float = Field(1e11, gt=0)
    workers: Optional[int] = Field(None, ge=1)

    @field_validator("workers", mode="before")
    @classmethod
    def _unset_placeholder(cls, value: Any) -> Any:
        if isinstance(value, str) and (value.strip() == "" or _PLACEHOLDER.fullmatch(value)):
            return None
        return value


class Settings(_Section):
    """Validated view of ``pairwords_config.yaml``."""

    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    exact: ExactSettings = Field(default_factory=ExactSettings)
    asymptotics: AsymptoticsSettings = Field(default_factory=AsymptoticsSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)


_selected_dir: Optional[Path] = None


def resolve_config_dir(config_dir: Optional[Union[str, Path]] = None) -> Path:
    """
    Locate the configuration directory.

    Order: explicit argument, the directory chosen with select_config_dir,
    PAIRWORDS_CONFIG_DIR, ./configs, then the repository configs/ next to src/.
    """
    if config_dir is not None:
        return Path(config_dir)
    if _selected_dir is not None:
        return _selected_dir
    env_dir = os.getenv("PAIRWORDS_CONFIG_DIR")
    if env_dir:
        return Path(env_dir)
    local = Path("configs")
    if local.is_dir():
        return local
    return Path(__file__).resolve().parents[3] / "configs"


def load_settings(config_dir: Optional[Union[str, Path]] = None) -> Settings:
    """
    Load and validate the numeric settings.

    Args:
        config_dir: Directory holding pairwords_config.yaml

    Returns:
        Settings model; defaults when the file is absent
    """
    loader = ConfigLoader(resolve_config_dir(config_dir))
    try:
        raw = loader.load_config(SETTINGS_FILE)
    except FileNotFoundError:
        logger.warning(f"{SETTINGS_FILE} not found in {loader.config_dir}; using defaults")
        return Settings()
    return Settings.model_validate(raw)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Process-wide cached settings."""
    return load_settings()


def select_config_dir(config_dir: Optional[Union[str, Path]]) -> None:
    """Read settings from config_dir from now on; None restores the default lookup."""
    global _selected_dir
    _selected_dir = Path(config_dir) if config_dir is not None else None
    get_settings.cache_clear()


def reset_settings() -> None:
    """Drop the cached settings and any selected directory."""
    select_config_dir(None)
