"""
Sweep service module that runs derivations and verifications across parameter grids.

This module serves as the main interface between a sweep configuration and the verification engine:
it expands the grids in input order, runs the requested checks at every regular point, records the
skipped singular points and assembles the report.
"""

import itertools
from collections import Counter
from collections.abc import Sequence
from datetime import UTC, datetime
from enum import StrEnum
from typing import Any

import numpy as np
import polars as pl
from loguru import logger
from pydantic import BaseModel, Field

from project.application_services.dhsys import (
    RankDeficiencyError,
    boundary_branch,
    boundary_rank,
    c2_boundary_diagonal_forms,
    c2_boundary_forms,
    c2_bulk_systems,
    n3_condition,
    on_boundary_diagonal_forms,
    on_boundary_forms,
    on_bulk_blob_systems,
    on_bulk_system,
    projective_deviation,
    solve_c2_boundary,
    solve_c2_diagonal,
    solve_on_boundary,
    solve_on_bulk,
    solve_on_diagonal,
    spin_scan,
)
from project.application_services.reflect import (
    ReflectionWeights,
    c2_catalog,
    c2_reflection_weights,
    gen_reflection_weights,
    on_catalog,
    on_reflection_weights,
    re_residuals,
)
from project.data_accessors.config_loader import CheckName, ConfigLoadError, ModelName, SingularPoint, SweepConfig
from project.data_accessors.params import (
    C2Params,
    LoopParams,
    OnParams,
    c2_params,
    c2_singularity,
    gen_on_params,
    gen_on_singularity,
    on_bulk_params,
    on_params,
    on_singularity,
)
from project.data_accessors.weights import (
    Branch,
    WeightSet,
    blob_rescaling,
    c2_boundary,
    c2_boundary_diagonal,
    c2_bulk,
    generalized_large_k_limit,
    generalized_limit_reference,
    on_blobbed,
    on_boundary,
    on_boundary_diagonal,
    on_bulk,
    on_generalized_boundary,
)
from project.settings import settings


class Command(StrEnum):
    """Subcommand of the command-line driver."""

    DERIVE = "derive"
    VERIFY = "verify"
    LIMITS = "limits"


DEFAULT_MODEL: dict[Command, ModelName] = {
    Command.DERIVE: "on",
    Command.VERIFY: "on",
    Command.LIMITS: "gen-on",
}

DEFAULT_CHECKS: dict[Command, tuple[CheckName, ...]] = {
    Command.DERIVE: ("solve",),
    Command.VERIFY: ("dh-bulk", "dh-boundary", "reflection"),
    Command.LIMITS: ("limits",),
}

MODEL_CHECKS: dict[ModelName, frozenset[CheckName]] = {
    "on": frozenset({"dh-bulk", "dh-boundary", "solve", "reflection"}),
    "c2": frozenset({"dh-bulk", "dh-boundary", "solve", "reflection"}),
    "gen-on": frozenset({"dh-bulk", "solve", "reflection", "limits"}),
}

EXPECTED_BOUNDARY_RANK: dict[ModelName, int] = {"on": 2, "c2": 3}
SPIN_OFFSETS = (-0.01, 0.0, 0.01)
SPIN_DIMENSIONS = [0, 1, 0]
PERTURBED_SYMBOLS = ("beta1", "u1")


class VerificationRecord(BaseModel):
    """Outcome of one check at one grid point."""

    check: str
    grid_index: int  # Position of the point among the records of the same check
    params: dict[str, float]
    branch: str | None = None
    residual: float | None = None
    rank: int | None = None
    expected_rank: int | None = None
    tolerance: float | None = None
    passed: bool
    detail: str | None = None


class WeightComparison(BaseModel):
    """Solved weights next to the closed-form weights they must match projectively."""

    check: str
    params: dict[str, float]
    branch: str | None = None
    symbols: list[str]
    solved: list[float]
    closed_form: list[float]
    deviation: float


class CheckSummary(BaseModel):
    check: str
    records: int
    passed: int
    failed: int
    max_residual: float | None = None


class VerificationReport(BaseModel):
    """Machine-readable result of one sweep."""

    engine_version: str
    command: Command
    config: dict[str, Any]
    records: list[VerificationRecord]
    skipped: list[SingularPoint]
    summary: list[CheckSummary]
    weight_tables: list[WeightComparison] = Field(default_factory=list)
    all_passed: bool
    generated_at: str


def summarize(records: Sequence[VerificationRecord]) -> list[CheckSummary]:
    """
    Aggregate records per check.

    Args:
        records: Records of one sweep

    Returns:
        One CheckSummary per check, sorted by check name

    """
    frame = pl.DataFrame(
        {
            "check": [record.check for record in records],
            "passed": [record.passed for record in records],
            "residual": [record.residual for record in records],
        },
        schema={"check": pl.String, "passed": pl.Boolean, "residual": pl.Float64},
    )
    grouped = (
        frame.group_by("check", maintain_order=True)
        .agg(
            pl.len().alias("records"),
            pl.col("passed").sum().alias("passed"),
            pl.col("residual").max().alias("max_residual"),
        )
        .sort("check")
    )
    return [
        CheckSummary(
            check=row["check"],
            records=row["records"],
            passed=row["passed"],
            failed=row["records"] - row["passed"],
            max_residual=row["max_residual"],
        )
        for row in grouped.iter_rows(named=True)
    ]


class SweepService:
    """Service class running one command over the grids of a sweep configuration."""

    def __init__(self, config: SweepConfig, command: Command) -> None:
        """
        Initialize the sweep service.

        Args:
            config: Validated sweep configuration (a missing model is resolved from the command)
            command: Subcommand being run

        Raises:
            ConfigLoadError: If the command or a requested check does not apply to the model

        """
        model: ModelName = config.model or DEFAULT_MODEL[command]
        self._config = config.model_copy(update={"model": model})
        self._model = model
        self._command = command
        self._checks = self._resolve_checks()
        self._records: list[VerificationRecord] = []
        self._tables: list[WeightComparison] = []
        self._counters: Counter[str] = Counter()

    @property
    def config(self) -> SweepConfig:
        return self._config

    @property
    def checks(self) -> tuple[CheckName, ...]:
        return self._checks

    def _resolve_checks(self) -> tuple[CheckName, ...]:
        if self._command is Command.LIMITS and self._model != "gen-on":
            msg = f"The limits command requires model gen-on, got {self._model}"
            raise ConfigLoadError(msg)
        available = MODEL_CHECKS[self._model]
        if self._config.checks:
            unsupported = [check for check in self._config.checks if check not in available]
            if unsupported:
                msg = f"Checks {unsupported} are not available for model {self._model}"
                raise ConfigLoadError(msg)
            return tuple(self._config.checks)
        return tuple(check for check in DEFAULT_CHECKS[self._command] if check in available)

    def run(self) -> VerificationReport:
        """
        Run every requested check over the configured grids.

        Returns:
            VerificationReport with records sorted by (check, grid order)

        """
        self._records = []
        self._tables = []
        self._counters = Counter()
        skipped = self._config.singular_points()
        logger.info(f"Running {self._command} for model {self._model}: checks {', '.join(self._checks)}")
        if skipped:
            logger.warning(f"Skipping {len(skipped)} singular grid point(s)")

        if self._model == "c2":
            self._run_c2()
        elif self._model == "gen-on":
            self._run_gen_on()
        else:
            self._run_on()

        records = sorted(self._records, key=lambda record: (record.check, record.grid_index))
        failed = [record for record in records if not record.passed]
        for record in failed:
            logger.warning(
                f"Check {record.check} failed at {record.params} {record.branch or ''}: "
                f"residual {record.residual}, rank {record.rank} {record.detail or ''}"
            )
        logger.info(f"Completed {len(records)} checks, {len(failed)} failed")
        if not records:
            logger.warning("No checks ran for this configuration")

        return VerificationReport(
            engine_version=settings.app_version,
            command=self._command,
            config=self._config.model_dump(mode="json", by_alias=True),
            records=records,
            skipped=skipped,
            summary=summarize(records),
            weight_tables=list(self._tables),
            all_passed=not failed,
            generated_at=datetime.now(tz=UTC).isoformat(),
        )

    # Record helpers

    def _record(
        self,
        check: str,
        params: dict[str, float],
        *,
        branch: Branch | None = None,
        residual: float | None = None,
        tolerance: float | None = None,
        rank: int | None = None,
        expected_rank: int | None = None,
        passed: bool | None = None,
        detail: str | None = None,
    ) -> None:
        if passed is None:
            if residual is not None and tolerance is not None:
                passed = bool(residual <= tolerance)
            else:
                passed = rank is not None and rank == expected_rank
        index = self._counters[check]
        self._counters[check] += 1
        logger.debug(f"{check} #{index} {params} {branch or ''}: residual={residual} rank={rank} passed={passed}")
        self._records.append(
            VerificationRecord(
                check=check,
                grid_index=index,
                params=params,
                branch=None if branch is None else str(branch),
                residual=residual,
                rank=rank,
                expected_rank=expected_rank,
                tolerance=tolerance,
                passed=passed,
                detail=detail,
            )
        )

    def _compare(
        self,
        check: str,
        params: dict[str, float],
        solved: WeightSet,
        closed_form: WeightSet,
        branch: Branch | None = None,
    ) -> None:
        """Record the projective deviation of solved weights from closed-form ones and keep the table."""
        deviation = projective_deviation(solved.vector(), closed_form.vector())
        self._tables.append(
            WeightComparison(
                check=check,
                params=params,
                branch=None if branch is None else str(branch),
                symbols=list(closed_form.symbols),
                solved=solved.vector().tolist(),
                closed_form=closed_form.vector().tolist(),
                deviation=deviation,
            )
        )
        self._record(check, params, branch=branch, residual=deviation, tolerance=self._config.projective_tol)

    def _perturb(self, weights: WeightSet) -> WeightSet:
        delta = self._config.perturbation
        if delta == 0.0:
            return weights
        for symbol in PERTURBED_SYMBOLS:
            if symbol in weights.entries:
                weights = weights.perturbed(symbol, delta)
        return weights

    def _perturb_reflection(self, weights: ReflectionWeights) -> ReflectionWeights:
        delta = self._config.perturbation
        if delta == 0.0:
            return weights
        for symbol in PERTURBED_SYMBOLS:
            weights = weights.perturbed(symbol, delta)
        return weights

    def _branches(self) -> list[Branch]:
        return [Branch(branch) for branch in self._config.branches()]

    def _solve_failed(self, check: str, params: dict[str, float], error: Exception, branch: Branch | None) -> None:
        self._record(check, params, branch=branch, passed=False, detail=str(error))

    # Shared checks

    def _bulk_dh(self, lam: float, x: float) -> None:
        p = on_bulk_params(lam, x)
        residual = on_bulk_system(p).max_residual(self._perturb(on_bulk(p)))
        self._record("dh-bulk", {"lambda": lam, "x": x}, residual=residual, tolerance=self._config.residual_tol)

    def _fugacity_identity(self, p: LoopParams, params: dict[str, float]) -> None:
        scale = max(1.0, p.n1**2 + p.n2**2 + p.n3**2)
        residual = abs(p.fugacity_identity_residual()) / scale
        self._record("fugacity-identity", params, residual=residual, tolerance=settings.exact_tol)

    def _reflection(self, weights: ReflectionWeights, params: dict[str, float], branch: Branch | None) -> None:
        catalog = c2_catalog() if self._model == "c2" else on_catalog(generalized=self._model == "gen-on")
        residuals = re_residuals(self._perturb_reflection(weights), catalog, typed_anchors=self._model != "gen-on")
        worst = max(residuals, key=residuals.__getitem__)
        self._record(
            "reflection",
            params,
            branch=branch,
            residual=residuals[worst],
            tolerance=self._config.residual_tol,
            detail=f"{len(residuals)} classes, worst {worst}",
        )

    # O(n) model

    def _run_on(self) -> None:
        cfg = self._config
        checks = self._checks
        branches = self._branches()

        for lam, x in itertools.product(cfg.lambda_, cfg.x):
            params = {"lambda": lam, "x": x}
            if "dh-bulk" in checks:
                self._bulk_dh(lam, x)
            if "solve" in checks:
                self._on_solve_bulk(lam, x)
            for branch in branches:
                bulk_point = on_bulk_params(lam, x)
                if "dh-boundary" in checks:
                    residual = boundary_branch(on_boundary_diagonal_forms(bulk_point), branch).max_residual(
                        self._perturb(on_boundary_diagonal(lam, x, branch))
                    )
                    self._record(
                        "dh-diagonal", params, branch=branch, residual=residual, tolerance=cfg.residual_tol
                    )
                if "solve" in checks:
                    try:
                        solved = solve_on_diagonal(bulk_point, branch, cfg.rank_tol)
                    except RankDeficiencyError as e:
                        self._solve_failed("solve-diagonal", params, e, branch)
                    else:
                        closed = self._perturb(on_boundary_diagonal(lam, x, branch))
                        self._compare("solve-diagonal", params, solved, closed, branch)

        for lam, lam1 in itertools.product(cfg.lambda_, cfg.lambda1):
            if on_singularity(lam, lam1) is not None:
                continue
            for x in cfg.x:
                p = on_params(lam, lam1, x, n2=cfg.resolved_fugacity())
                params = {"lambda": lam, "lambda1": lam1, "x": x}
                if "dh-bulk" in checks:
                    self._on_blob(p, params)
                for branch in branches:
                    if "dh-boundary" in checks:
                        self._on_boundary_dh(p, params, branch)
                    if "solve" in checks:
                        self._on_solve_boundary(p, params, branch)
                    if "reflection" in checks:
                        for y in cfg.y:
                            self._reflection(on_reflection_weights(p, y, branch), {**params, "y": y}, branch)

    def _on_solve_bulk(self, lam: float, x: float) -> None:
        cfg = self._config
        params = {"lambda": lam, "x": x}
        try:
            solved = solve_on_bulk(lam, x, rank_tol=cfg.rank_tol)
        except RankDeficiencyError as e:
            self._solve_failed("solve-bulk", params, e, None)
        else:
            self._compare("solve-bulk", params, solved, self._perturb(on_bulk(on_bulk_params(lam, x))))

        dimensions = spin_scan(lam, x, SPIN_OFFSETS, cfg.rank_tol)
        self._record(
            "spin-scan",
            params,
            rank=dimensions[1],
            expected_rank=SPIN_DIMENSIONS[1],
            passed=dimensions == SPIN_DIMENSIONS,
            detail=f"nullspace dimensions {dimensions} at spin offsets {list(SPIN_OFFSETS)}",
        )

    def _on_blob(self, p: OnParams, params: dict[str, float]) -> None:
        cfg = self._config
        weights = self._perturb(on_bulk(on_bulk_params(p.lam, p.x)))
        residual = max(system.max_residual(weights) for system in on_bulk_blob_systems(p))
        self._record("dh-blob", params, residual=residual, tolerance=cfg.residual_tol)
        self._fugacity_identity(p, params)
        scale = max(1.0, abs(p.q1) * (abs(p.q1) + abs(p.n2) + abs(p.n3)))
        self._record("n3-condition", params, residual=abs(n3_condition(p)) / scale, tolerance=settings.exact_tol)

    def _on_boundary_dh(self, p: OnParams, params: dict[str, float], branch: Branch) -> None:
        cfg = self._config
        system = boundary_branch(on_boundary_forms(p), branch)
        residual = system.max_residual(self._perturb(on_boundary(p, branch)))
        self._record("dh-boundary", params, branch=branch, residual=residual, tolerance=cfg.residual_tol)

        blob_point = on_params(p.lam, p.lam1, p.x, n2=1.0)
        rescaled = blob_rescaling(blob_point, branch) * on_boundary(blob_point, branch).vector()
        blobbed = self._perturb(on_blobbed(p.lam, p.lam1, p.x, branch)).vector()
        deviation = float(np.max(np.abs(rescaled - blobbed)) / max(np.max(np.abs(blobbed)), settings.singular_eps))
        self._record("blob-specialization", params, branch=branch, residual=deviation, tolerance=settings.exact_tol)

    def _on_solve_boundary(self, p: OnParams, params: dict[str, float], branch: Branch) -> None:
        cfg = self._config
        rank = boundary_rank(p, branch, cfg.rank_tol)
        self._record("boundary-rank", params, branch=branch, rank=rank, expected_rank=EXPECTED_BOUNDARY_RANK["on"])
        try:
            solved = solve_on_boundary(p, branch, cfg.rank_tol)
        except RankDeficiencyError as e:
            self._solve_failed("solve-boundary", params, e, branch)
        else:
            self._compare("solve-boundary", params, solved, self._perturb(on_boundary(p, branch)), branch)

    # C2(1) model

    def _run_c2(self) -> None:
        cfg = self._config
        checks = self._checks
        branches = self._branches()

        for lam, lam1 in itertools.product(cfg.lambda_, cfg.lambda1):
            if c2_singularity(lam1) is not None:
                continue
            for x in cfg.x:
                p = c2_params(lam, lam1, x, n1=cfg.resolved_fugacity())
                params = {"lambda": lam, "lambda1": lam1, "x": x}
                if "dh-bulk" in checks:
                    residual = c2_bulk_systems(p).max_residual(self._perturb(c2_bulk(p)))
                    self._record("dh-bulk", params, residual=residual, tolerance=cfg.residual_tol)
                    self._fugacity_identity(p, params)
                for branch in branches:
                    if "dh-boundary" in checks:
                        self._c2_boundary_dh(p, params, branch)
                    if "solve" in checks:
                        self._c2_solve_boundary(p, params, branch)
                    if "reflection" in checks:
                        for y in cfg.y:
                            self._reflection(c2_reflection_weights(p, y, branch), {**params, "y": y}, branch)

    def _c2_boundary_dh(self, p: C2Params, params: dict[str, float], branch: Branch) -> None:
        cfg = self._config
        system = boundary_branch(c2_boundary_forms(p), branch)
        residual = system.max_residual(self._perturb(c2_boundary(p, branch)))
        self._record("dh-boundary", params, branch=branch, residual=residual, tolerance=cfg.residual_tol)
        diagonal = boundary_branch(c2_boundary_diagonal_forms(p), branch)
        residual = diagonal.max_residual(self._perturb(c2_boundary_diagonal(branch)))
        self._record("dh-diagonal", params, branch=branch, residual=residual, tolerance=cfg.residual_tol)

    def _c2_solve_boundary(self, p: C2Params, params: dict[str, float], branch: Branch) -> None:
        cfg = self._config
        rank = boundary_rank(p, branch, cfg.rank_tol)
        self._record("boundary-rank", params, branch=branch, rank=rank, expected_rank=EXPECTED_BOUNDARY_RANK["c2"])
        try:
            solved = solve_c2_boundary(p, branch, cfg.rank_tol)
        except RankDeficiencyError as e:
            self._solve_failed("solve-boundary", params, e, branch)
        else:
            self._compare("solve-boundary", params, solved, self._perturb(c2_boundary(p, branch)), branch)
        try:
            diagonal = solve_c2_diagonal(p, branch, cfg.rank_tol)
        except RankDeficiencyError as e:
            self._solve_failed("solve-diagonal", params, e, branch)
        else:
            self._compare("solve-diagonal", params, diagonal, self._perturb(c2_boundary_diagonal(branch)), branch)

    # Asymmetric O(n) family

    def _run_gen_on(self) -> None:
        cfg = self._config
        checks = self._checks
        n1 = cfg.resolved_fugacity()

        for lam, x in itertools.product(cfg.lambda_, cfg.x):
            if "dh-bulk" in checks:
                self._bulk_dh(lam, x)
            if gen_on_singularity(lam, x) is not None:
                continue
            params = {"lambda": lam, "x": x}
            if "limits" in checks:
                self._gen_limits(lam, x, n1, params)
            for k in cfg.k:
                g = gen_on_params(lam, x, k, n1)
                if "solve" in checks and k == 0.0:
                    family = on_generalized_boundary(g)
                    diagonal = self._padded_diagonal(lam, x, family)
                    self._compare("gen-diagonal-reduction", {**params, "k": k}, family, diagonal)
                if "reflection" in checks:
                    for y in cfg.y:
                        self._reflection(gen_reflection_weights(g, y), {**params, "k": k, "y": y}, None)

    def _padded_diagonal(self, lam: float, x: float, family: WeightSet) -> WeightSet:
        """Real-branch diagonal weights extended by beta3 = beta4 = 0 onto the family's symbols."""
        diagonal = self._perturb(on_boundary_diagonal(lam, x, Branch.REAL))
        values = [diagonal.get(symbol) for symbol in family.symbols]
        return WeightSet.from_vector(family.symbols, values, family.model)

    def _gen_limits(self, lam: float, x: float, n1: float, params: dict[str, float]) -> None:
        cfg = self._config
        g = gen_on_params(lam, x, 0.0, n1)
        family = on_generalized_boundary(g)
        reduction = projective_deviation(family.vector(), self._padded_diagonal(lam, x, family).vector())
        self._record("limit-k0", params, residual=reduction, tolerance=settings.exact_tol, detail="k = 0")

        rescaled = generalized_large_k_limit(g, settings.limit_k)
        reference = np.append(self._perturb(generalized_limit_reference(g)).vector(), 0.0)
        deviation = projective_deviation(rescaled, reference)
        self._record(
            "limit-large-k",
            params,
            residual=deviation,
            tolerance=cfg.limit_tol,
            detail=f"k = {settings.limit_k:g}",
        )


def run_sweep(config: SweepConfig, command: Command | str) -> VerificationReport:
    """Run one command over a configuration and return its report."""
    return SweepService(config, Command(command)).run()
