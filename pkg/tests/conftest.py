"""Shared fixtures for the pairwords test suite."""

import logging
from pathlib import Path

import pytest

from pairwords.core.geometric import GeomParams
from pairwords.utils.config_loader import reset_settings


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch: pytest.MonkeyPatch):
    """Every test starts from the repository config with no thread cap."""
    monkeypatch.delenv("PAIRWORDS_THREADS", raising=False)
    monkeypatch.delenv("PAIRWORDS_CONFIG_DIR", raising=False)
    reset_settings()
    yield
    reset_settings()
    # the CLI installs a non-propagating package logger with its own handlers
    package = logging.getLogger("pairwords")
    for handler in list(package.handlers):
        package.removeHandler(handler)
    package.setLevel(logging.NOTSET)
    package.propagate = True


@pytest.fixture
def quarter() -> GeomParams:
    return GeomParams(p=0.25)


@pytest.fixture
def half() -> GeomParams:
    return GeomParams(p=0.5)


@pytest.fixture
def two_thirds() -> GeomParams:
    return GeomParams(p=2 / 3)


@pytest.fixture(params=[0.25, 0.5, 2 / 3], ids=["p=1/4", "p=1/2", "p=2/3"])
def params(request: pytest.FixtureRequest) -> GeomParams:
    return GeomParams(p=request.param)


@pytest.fixture
def config_dir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Empty config directory selected through PAIRWORDS_CONFIG_DIR."""
    directory = tmp_path / "configs"
    directory.mkdir()
    monkeypatch.setenv("PAIRWORDS_CONFIG_DIR", str(directory))
    monkeypatch.chdir(tmp_path)
    reset_settings()
    return directory
