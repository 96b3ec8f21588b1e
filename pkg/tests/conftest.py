"""Shared fixtures: every test gets a fresh configuration and a private output tree."""

import numpy as np
import pytest

from src.utils.config import reset_config
from src.utils.logger import reset_logger


@pytest.fixture(autouse=True)
def isolated_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LOG_FILE_ENABLED", "false")
    monkeypatch.setenv("LOG_LEVEL", "WARNING")
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "reports"))
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("TORUSOBS_WORKERS", raising=False)
    monkeypatch.delenv("TORUSOBS_SEED", raising=False)
    reset_config()
    reset_logger()
    yield
    reset_config()
    reset_logger()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / "reports"
    path.mkdir(parents=True, exist_ok=True)
    return path
