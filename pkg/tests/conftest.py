"""
Pytest configuration and shared fixtures.
"""

import json
import subprocess
import sys
from collections.abc import Callable
from pathlib import Path

import pytest

from project.data_accessors.params import C2Params, GenOnParams, OnParams, c2_params, gen_on_params, on_params

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def on_point() -> OnParams:
    """
    O(n) parameter point used throughout the unit tests.

    Returns:
        OnParams at lambda = 0.3, lambda1 = 0.2, x = 0.4, n2 = 1
    """
    return on_params(0.3, 0.2, 0.4, n2=1.0)


@pytest.fixture
def c2_point() -> C2Params:
    """
    C2(1) parameter point used throughout the unit tests.

    Returns:
        C2Params at lambda = 0.3, lambda1 = 0.2, x = 0.4, n1 = 1
    """
    return c2_params(0.3, 0.2, 0.4, n1=1.0)


@pytest.fixture
def gen_point() -> GenOnParams:
    """Asymmetric O(n) family at lambda = 0.3, x = 0.4, k = 0.5, n1 = 0.7."""
    return gen_on_params(0.3, 0.4, 0.5, 0.7)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[dict], Path]:
    """
    Return a helper writing a sweep configuration to a temporary JSON file.

    Args:
        tmp_path: Pytest temporary directory fixture

    Returns:
        Function mapping a config dict to the written file path
    """

    def _write(data: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture(scope="session")
def run_cli() -> Callable[..., subprocess.CompletedProcess[str]]:
    """
    Return a helper that runs the command-line driver in a subprocess.

    The driver is started as `python app.py <args>` from the repository root, the way the e2e tests
    exercise it.

    Returns:
        Function taking CLI arguments and returning the completed process
    """

    def _run(*args: str) -> subprocess.CompletedProcess[str]:
        return subprocess.run(  # noqa: S603
            [sys.executable, str(REPO_ROOT / "app.py"), *args],
            cwd=REPO_ROOT,
            capture_output=True,
            text=True,
            timeout=600,
            check=False,
        )

    return _run
