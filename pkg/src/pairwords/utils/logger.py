"""
Logging Utilities Module

This module configures logging from configs/logging_config.yaml.
"""

import logging
import logging.config
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from pairwords.utils.config_loader import resolve_config_dir

LOGGING_FILE = "logging_config.yaml"

logger = logging.getLogger(__name__)


def _ensure_log_dirs(config: Dict[str, Any]) -> None:
    for handler in config.get("handlers", {}).values():
        filename = handler.get("filename")
        if filename:
            Path(filename).parent.mkdir(parents=True, exist_ok=True)


def setup_logging(
    config_dir: Optional[Union[str, Path]] = None,
    level: Optional[str] = None,
) -> None:
    """
    Configure logging with dictConfig.

    Args:
        config_dir: Directory containing logging_config.yaml
        level: Optional override for the console handler and package logger
    """
    path = resolve_config_dir(config_dir) / LOGGING_FILE

    if not path.exists():
        logging.basicConfig(level=level or "WARNING")
        logger.debug(f"No logging config at {path}; basicConfig applied")
        return

    with open(path, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f)

    if level:
        config.setdefault("handlers", {}).setdefault("console", {})["level"] = level
        config.setdefault("loggers", {}).setdefault("pairwords", {})["level"] = level

    _ensure_log_dirs(config)
    logging.config.dictConfig(config)
    logger.debug(f"Logging configured from {path}")
