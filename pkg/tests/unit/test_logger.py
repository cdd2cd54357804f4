"""Tests for logging setup."""

import logging

from pairwords.utils.logger import LOGGING_FILE, setup_logging

CONSOLE_ONLY = """
version: 1
disable_existing_loggers: false
handlers:
  console:
    class: logging.StreamHandler
    level: WARNING
    stream: ext://sys.stderr
loggers:
  pairwords:
    level: INFO
    handlers: [console]
    propagate: false
"""


class TestSetupLogging:
    def test_falls_back_without_config(self, tmp_path):
        setup_logging(tmp_path)
        logging.getLogger("pairwords.test").warning("still works")

    def test_level_override(self, tmp_path):
        (tmp_path / LOGGING_FILE).write_text(CONSOLE_ONLY, encoding="utf-8")
        setup_logging(tmp_path, "DEBUG")
        package = logging.getLogger("pairwords")
        assert package.level == logging.DEBUG
        assert package.handlers[0].level == logging.DEBUG

    def test_creates_log_directories(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = CONSOLE_ONLY.replace(
            "handlers:\n  console:",
            "handlers:\n  file:\n    class: logging.FileHandler\n"
            "    filename: logs/run.log\n    delay: true\n  console:",
            1,
        )
        (tmp_path / LOGGING_FILE).write_text(config, encoding="utf-8")
        setup_logging(tmp_path)
        assert (tmp_path / "logs").is_dir()
