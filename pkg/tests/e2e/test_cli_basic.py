"""
Basic E2E tests for the command-line driver.

These tests run `python app.py` in a subprocess against the sample configurations and check exit codes,
stdout and the written report.
"""

import json
from collections.abc import Callable
from pathlib import Path
from subprocess import CompletedProcess

import pytest

from project.application_services.sweep_service import VerificationReport
from project.settings import settings
from tests.conftest import REPO_ROOT

CONFIGS = REPO_ROOT / "usages" / "configs"

RunCli = Callable[..., CompletedProcess[str]]


def _report(path: Path) -> VerificationReport:
    return VerificationReport.model_validate(json.loads(path.read_text(encoding="utf-8")))


@pytest.mark.e2e
def test_verify_defaults(run_cli: RunCli, tmp_path: Path) -> None:
    """
    Test that verify without a configuration passes on the default O(n) grid.

    Args:
        run_cli: Driver fixture
        tmp_path: Pytest temporary directory fixture
    """
    out = tmp_path / "report.json"

    result = run_cli("verify", "--out", str(out))

    assert result.returncode == 0, result.stderr
    assert result.stdout.rstrip().endswith("verify: ALL PASSED")
    report = _report(out)
    assert report.all_passed
    assert report.config["model"] == "on"
    assert {row.check for row in report.summary} >= {"dh-bulk", "dh-boundary", "reflection"}


@pytest.mark.e2e
def test_verify_sample_on(run_cli: RunCli, tmp_path: Path) -> None:
    """
    Test the full O(n) sample configuration, solves included.

    Args:
        run_cli: Driver fixture
        tmp_path: Pytest temporary directory fixture
    """
    out = tmp_path / "report.json"

    result = run_cli("verify", "--config", str(CONFIGS / "on_verify.json"), "--out", str(out))

    assert result.returncode == 0, result.stderr
    report = _report(out)
    ranks = {record.rank for record in report.records if record.check == "boundary-rank"}
    assert ranks == {2}
    assert all(record.passed for record in report.records if record.check == "spin-scan")


@pytest.mark.e2e
def test_verify_sample_c2(run_cli: RunCli, tmp_path: Path) -> None:
    """
    Test the C2(1) sample configuration on both branches.

    Args:
        run_cli: Driver fixture
        tmp_path: Pytest temporary directory fixture
    """
    out = tmp_path / "report.json"

    result = run_cli("verify", "--config", str(CONFIGS / "c2_verify.json"), "--out", str(out))

    assert result.returncode == 0, result.stderr
    report = _report(out)
    reflection = [record for record in report.records if record.check == "reflection"]
    assert {record.branch for record in reflection} == {"real", "imaginary"}
    assert {record.rank for record in report.records if record.check == "boundary-rank"} == {3}


@pytest.mark.e2e
def test_perturbed_sample_fails(run_cli: RunCli, tmp_path: Path) -> None:
    """
    Test that the perturbed sample is rejected with exit code 1.

    Args:
        run_cli: Driver fixture
        tmp_path: Pytest temporary directory fixture
    """
    out = tmp_path / "report.json"

    result = run_cli("verify", "--config", str(CONFIGS / "on_perturbed.json"), "--out", str(out))

    assert result.returncode == 1
    assert result.stdout.rstrip().endswith("verify: FAILED")
    assert not _report(out).all_passed


@pytest.mark.e2e
def test_limits_sample(run_cli: RunCli, tmp_path: Path) -> None:
    """
    Test the asymmetric family sample, which skips one singular grid point.

    Args:
        run_cli: Driver fixture
        tmp_path: Pytest temporary directory fixture
    """
    out = tmp_path / "report.json"

    result = run_cli("limits", "--config", str(CONFIGS / "gen_on_limits.json"), "--out", str(out))

    assert result.returncode == 0, result.stderr
    assert "skipped singular points: 1" in result.stdout
    report = _report(out)
    assert [point.params for point in report.skipped] == [{"lambda": 0.3, "x": 0.15}]
    assert {"limit-k0", "limit-large-k", "reflection", "gen-diagonal-reduction"} <= {
        row.check for row in report.summary
    }


@pytest.mark.e2e
def test_limits_tight_tolerance(run_cli: RunCli, write_config: Callable[..., Path], tmp_path: Path) -> None:
    """
    Test that a large-k tolerance below the O(1/k) correction fails.

    Args:
        run_cli: Driver fixture
        write_config: Config file fixture
        tmp_path: Pytest temporary directory fixture
    """
    config = write_config({"limit_tol": 1e-9})

    result = run_cli("limits", "--config", str(config), "--out", str(tmp_path / "report.json"))

    assert result.returncode == 1


@pytest.mark.e2e
def test_derive_prints_tables(run_cli: RunCli, write_config: Callable[..., Path], tmp_path: Path) -> None:
    """
    Test that derive prints a solved weight table per grid point.

    Args:
        run_cli: Driver fixture
        write_config: Config file fixture
        tmp_path: Pytest temporary directory fixture
    """
    config = write_config({"lambda": [0.3], "lambda1": [0.2], "x": [0.4]})

    result = run_cli("derive", "--config", str(config), "--out", str(tmp_path / "report.json"), "--branch", "real")

    assert result.returncode == 0, result.stderr
    assert "solve-boundary" in result.stdout
    assert "closed_form" in result.stdout
    assert result.stdout.rstrip().endswith("derive: ALL PASSED")


@pytest.mark.e2e
def test_invalid_configuration(run_cli: RunCli, write_config: Callable[..., Path], tmp_path: Path) -> None:
    """
    Test that an empty grid exits with code 2 and writes no report.

    Args:
        run_cli: Driver fixture
        write_config: Config file fixture
        tmp_path: Pytest temporary directory fixture
    """
    out = tmp_path / "report.json"

    result = run_cli("verify", "--config", str(write_config({"lambda": []})), "--out", str(out))

    assert result.returncode == 2
    assert "Invalid configuration" in result.stderr
    assert not out.exists()


@pytest.mark.e2e
def test_version(run_cli: RunCli) -> None:
    """
    Test the version flag.

    Args:
        run_cli: Driver fixture
    """
    result = run_cli("--version")

    assert result.returncode == 0
    assert settings.app_version in result.stdout
