"""
Report view module for rendering weight tables and writing verification reports.

This module turns a VerificationReport into polars tables for the terminal and into a UTF-8 JSON file.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import polars as pl
from loguru import logger

from project.settings import settings

if TYPE_CHECKING:
    from pathlib import Path

    from project.application_services.sweep_service import VerificationReport, WeightComparison


class ReportWriteError(Exception):
    """Exception raised when a report file cannot be written."""


class ReportView:
    """Class for rendering verification reports."""

    @staticmethod
    def weight_table(comparison: WeightComparison) -> pl.DataFrame:
        """
        Build the table of one solved weight set.

        Args:
            comparison: Solved and closed-form weights of one grid point

        Returns:
            DataFrame with columns: symbol, solved, closed_form

        """
        return pl.DataFrame(
            {
                "symbol": comparison.symbols,
                "solved": comparison.solved,
                "closed_form": comparison.closed_form,
            },
            schema={"symbol": pl.String, "solved": pl.Float64, "closed_form": pl.Float64},
        )

    @staticmethod
    def summary_table(report: VerificationReport) -> pl.DataFrame:
        """Return the per-check summary as a DataFrame (columns: check, records, passed, failed, max_residual)."""
        return pl.DataFrame(
            {
                "check": [row.check for row in report.summary],
                "records": [row.records for row in report.summary],
                "passed": [row.passed for row in report.summary],
                "failed": [row.failed for row in report.summary],
                "max_residual": [row.max_residual for row in report.summary],
            },
            schema={
                "check": pl.String,
                "records": pl.Int64,
                "passed": pl.Int64,
                "failed": pl.Int64,
                "max_residual": pl.Float64,
            },
        )

    @staticmethod
    def failed_records(report: VerificationReport) -> pl.DataFrame:
        rows = [record for record in report.records if not record.passed]
        return pl.DataFrame(
            {
                "check": [record.check for record in rows],
                "params": [str(record.params) for record in rows],
                "branch": [record.branch for record in rows],
                "residual": [record.residual for record in rows],
                "rank": [record.rank for record in rows],
            },
            schema={
                "check": pl.String,
                "params": pl.String,
                "branch": pl.String,
                "residual": pl.Float64,
                "rank": pl.Int64,
            },
        )

    @staticmethod
    def render_weight_tables(report: VerificationReport) -> str:
        """
        Render every solved weight table with its projective deviation.

        Args:
            report: Report of a derive run

        Returns:
            Text block, one titled table per grid point

        """
        blocks = []
        with pl.Config(tbl_rows=-1, float_precision=12, tbl_hide_dataframe_shape=True):
            for comparison in report.weight_tables:
                title = f"{comparison.check} {comparison.params}"
                if comparison.branch is not None:
                    title += f" [{comparison.branch}]"
                title += f"  deviation = {comparison.deviation:.3e}"
                blocks.append(f"{title}\n{ReportView.weight_table(comparison)}")
        return "\n\n".join(blocks)

    @staticmethod
    def render_summary(report: VerificationReport) -> str:
        verdict = "ALL PASSED" if report.all_passed else "FAILED"
        with pl.Config(tbl_rows=-1, tbl_hide_dataframe_shape=True):
            text = f"{ReportView.summary_table(report)}"
            if not report.all_passed:
                text += f"\n{ReportView.failed_records(report)}"
        skipped = f"\nskipped singular points: {len(report.skipped)}" if report.skipped else ""
        return f"{text}{skipped}\n{report.command}: {verdict}"

    @staticmethod
    def write_report(report: VerificationReport, path: Path) -> None:
        """
        Write a report as UTF-8 JSON.

        Args:
            report: Report to serialize
            path: Destination file (parent directories are created)

        Raises:
            ReportWriteError: If the file cannot be written

        """
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(report.model_dump_json(indent=settings.report_indent) + "\n", encoding="utf-8")
        except OSError as e:
            msg = f"Error writing report to {path}: {e!s}"
            raise ReportWriteError(msg) from e
        logger.info(f"Report written to {path}")
