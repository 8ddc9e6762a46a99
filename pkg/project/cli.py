"""
Command-line driver for sweeps.

Subcommands derive, verify and limits load a sweep configuration, run it and write a JSON report.
Exit codes: 0 when every check passes, 1 when a check fails, 2 for invalid configuration or IO errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from loguru import logger

from project.application_services.sweep_service import DEFAULT_MODEL, Command, run_sweep
from project.data_accessors.config_loader import ConfigLoadError, load_config
from project.data_accessors.params import DegenerateParameterError
from project.settings import settings
from project.views.report_view import ReportView, ReportWriteError

if TYPE_CHECKING:
    from collections.abc import Sequence

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

_COMMAND_HELP = {
    Command.DERIVE: "solve the linear systems and compare with the closed-form weights",
    Command.VERIFY: "evaluate DH and reflection-equation residuals over the grids",
    Command.LIMITS: "check the k -> 0 and large-k limits of the asymmetric O(n) family",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loop-dh", description=settings.app_name)
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, help_text in _COMMAND_HELP.items():
        sub = subparsers.add_parser(command.value, help=help_text)
        sub.add_argument("--config", type=Path, default=None, help="JSON sweep configuration (defaults if omitted)")
        sub.add_argument("--out", type=Path, default=None, help="report path (overrides the config's out)")
        sub.add_argument("--model", choices=["on", "c2", "gen-on"], default=None)
        sub.add_argument("--branch", choices=["real", "imaginary", "both"], default=None)
        sub.add_argument("--tol", type=float, default=None, help="overrides residual_tol")
        sub.add_argument("--seed-free", action="store_true", help="reserved; the engine uses no randomness")
        sub.add_argument("--verbose", "-v", action="store_true", help="log per-point residuals")
    return parser


def configure_logging(verbose: bool = False) -> None:
    """Send log output to stderr so that stdout carries only tables and summaries."""
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.log_level)


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the command-line driver.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Process exit code

    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    command = Command(args.command)

    try:
        config = load_config(
            args.config,
            DEFAULT_MODEL[command],
            model=args.model,
            branch=args.branch,
            residual_tol=args.tol,
        )
        report = run_sweep(config, command)
        if command is Command.DERIVE and report.weight_tables:
            sys.stdout.write(ReportView.render_weight_tables(report) + "\n\n")
        sys.stdout.write(ReportView.render_summary(report) + "\n")
        out = args.out or Path(config.out or settings.default_report_path)
        ReportView.write_report(report, out)
    except (ConfigLoadError, ReportWriteError, DegenerateParameterError) as e:
        logger.error(str(e))
        return EXIT_INVALID

    return EXIT_OK if report.all_passed else EXIT_FAILED
