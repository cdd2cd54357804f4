"""Tests for YAML configuration loading and settings validation."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from pairwords.utils.config_loader import (
    SETTINGS_FILE,
    ConfigLoader,
    Settings,
    get_settings,
    load_settings,
    reset_settings,
    resolve_config_dir,
    select_config_dir,
)


def write_settings(directory: Path, text: str) -> None:
    (directory / SETTINGS_FILE).write_text(text, encoding="utf-8")


class TestConfigLoader:
    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ConfigLoader(tmp_path).load_config("absent.yaml")

    def test_environment_placeholders(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PAIRWORDS_TEST_VALUE", "42")
        (tmp_path / "x.yaml").write_text("a: ${PAIRWORDS_TEST_VALUE}\nb: ${UNSET_VAR_XYZ}\n")
        config = ConfigLoader(tmp_path).load_config("x.yaml")
        assert config == {"a": "42", "b": "${UNSET_VAR_XYZ}"}

    def test_caches_until_reload(self, tmp_path):
        path = tmp_path / "x.yaml"
        path.write_text("a: 1\n")
        loader = ConfigLoader(tmp_path)
        assert loader.get_config("x.yaml") == {"a": 1}
        path.write_text("a: 2\n")
        assert loader.get_config("x.yaml") == {"a": 1}
        assert loader.reload_config("x.yaml") == {"a": 2}


class TestSettings:
    def test_defaults_without_file(self, tmp_path):
        assert load_settings(tmp_path) == Settings()

    def test_partial_sections(self, tmp_path):
        write_settings(tmp_path, "exact:\n  max_quadruples: 12\n")
        settings = load_settings(tmp_path)
        assert settings.exact.max_quadruples == 12
        assert settings.exact.fast_path_threshold == 10_000
        assert settings.oracle.exact_max_length == 10

    def test_unknown_key_rejected(self, tmp_path):
        write_settings(tmp_path, "exact:\n  max_quads: 12\n")
        with pytest.raises(ValidationError):
            load_settings(tmp_path)

    def test_density_tolerance_floor(self, tmp_path):
        write_settings(tmp_path, "asymptotics:\n  density_tolerance: 1.0e-12\n")
        with pytest.raises(ValidationError):
            load_settings(tmp_path)

    def test_threads_from_environment(self, tmp_path, monkeypatch):
        write_settings(tmp_path, "simulation:\n  workers: ${PAIRWORDS_THREADS}\n")
        assert load_settings(tmp_path).simulation.workers is None
        monkeypatch.setenv("PAIRWORDS_THREADS", "3")
        assert load_settings(tmp_path).simulation.workers == 3

    def test_repository_config_is_valid(self):
        repo_configs = Path(__file__).resolve().parents[2] / "configs"
        settings = load_settings(repo_configs)
        assert settings.simulation.max_letter == 2**15


class TestResolution:
    def test_argument_wins(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PAIRWORDS_CONFIG_DIR", "/elsewhere")
        assert resolve_config_dir(tmp_path) == tmp_path

    def test_environment_next(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PAIRWORDS_CONFIG_DIR", str(tmp_path))
        assert resolve_config_dir() == tmp_path

    def test_cached_settings(self, config_dir):
        write_settings(config_dir, "oracle:\n  enumeration_budget: 99\n")
        first = get_settings()
        assert first.oracle.enumeration_budget == 99
        assert get_settings() is first
        write_settings(config_dir, "oracle:\n  enumeration_budget: 98\n")
        reset_settings()
        assert get_settings().oracle.enumeration_budget == 98

    def test_selected_directory_beats_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PAIRWORDS_CONFIG_DIR", "/elsewhere")
        write_settings(tmp_path, "oracle:\n  enumeration_budget: 7\n")
        select_config_dir(tmp_path)
        assert resolve_config_dir() == tmp_path
        assert get_settings().oracle.enumeration_budget == 7

    def test_reset_forgets_selection(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PAIRWORDS_CONFIG_DIR", str(tmp_path / "env"))
        select_config_dir(tmp_path)
        reset_settings()
        assert resolve_config_dir() == tmp_path / "env"
