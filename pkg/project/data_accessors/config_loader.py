"""
Sweep configuration loader module.

This module parses JSON sweep configurations, validates them with pydantic and reports grid points
that fall on a parameterization singularity.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import TYPE_CHECKING, Any, Literal

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, field_validator

from project.data_accessors.params import c2_singularity, gen_on_singularity, on_singularity
from project.settings import settings

if TYPE_CHECKING:
    from pathlib import Path

ModelName = Literal["on", "c2", "gen-on"]
BranchChoice = Literal["real", "imaginary", "both"]
CheckName = Literal["dh-bulk", "dh-boundary", "solve", "reflection", "limits"]


class ConfigLoadError(Exception):
    """Exception raised when a sweep configuration cannot be read or validated."""


class SingularPoint(BaseModel):
    """A grid point skipped because a parameterization denominator vanishes there."""

    params: dict[str, float]
    reason: str


class SweepConfig(BaseModel):
    """Parameter grids, tolerances and checks of one sweep."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    model: ModelName | None = None
    branch: BranchChoice = "both"
    lambda_: list[float] = Field(default_factory=lambda: list(settings.default_lambda), alias="lambda", min_length=1)
    lambda1: list[float] = Field(default_factory=lambda: list(settings.default_lambda1), min_length=1)
    x: list[float] = Field(default_factory=lambda: list(settings.default_x), min_length=1)
    y: list[float] = Field(default_factory=lambda: list(settings.default_y), min_length=1)
    k: list[float] = Field(default_factory=lambda: list(settings.default_k), min_length=1)
    fugacity_scale: float | None = None  # n2 (O(n)), n1 (C2) or the common n1 (gen-on)
    residual_tol: PositiveFloat = settings.residual_tol
    rank_tol: PositiveFloat = settings.rank_tol
    projective_tol: PositiveFloat = settings.projective_tol
    limit_tol: PositiveFloat = settings.limit_tol
    checks: list[CheckName] = Field(default_factory=list)
    perturbation: float = 0.0  # Added to beta1 and u1 before every check
    out: str | None = None

    @field_validator("lambda_", "lambda1", "x", "y", "k")
    @classmethod
    def _finite_grid(cls, values: list[float]) -> list[float]:
        if not all(math.isfinite(value) for value in values):
            msg = "grid values must be finite"
            raise ValueError(msg)
        return values

    @field_validator("fugacity_scale", "perturbation")
    @classmethod
    def _finite_scalar(cls, value: float | None) -> float | None:
        if value is not None and not math.isfinite(value):
            msg = "value must be finite"
            raise ValueError(msg)
        return value

    @field_validator("checks")
    @classmethod
    def _unique_checks(cls, values: list[CheckName]) -> list[CheckName]:
        return list(dict.fromkeys(values))

    def branches(self) -> list[str]:
        return ["real", "imaginary"] if self.branch == "both" else [self.branch]

    def resolved_fugacity(self) -> float:
        """Return the free fugacity scale of the configured model."""
        if self.fugacity_scale is not None:
            return self.fugacity_scale
        if self.model == "gen-on":
            return settings.default_gen_fugacity
        return settings.default_fugacity_scale

    def singular_points(self) -> list[SingularPoint]:
        """
        Return the grid points on which the configured model is singular.

        O(n) points are keyed by (lambda, lambda1), C2 points by lambda1 and asymmetric-family points by
        (lambda, x).

        Returns:
            SingularPoint list in grid order

        """
        points: list[SingularPoint] = []
        if self.model == "c2":
            for lam1 in self.lambda1:
                if (reason := c2_singularity(lam1)) is not None:
                    points.append(SingularPoint(params={"lambda1": lam1}, reason=reason))
        elif self.model == "gen-on":
            for lam, x in itertools.product(self.lambda_, self.x):
                if (reason := gen_on_singularity(lam, x)) is not None:
                    points.append(SingularPoint(params={"lambda": lam, "x": x}, reason=reason))
        else:
            for lam, lam1 in itertools.product(self.lambda_, self.lambda1):
                if (reason := on_singularity(lam, lam1)) is not None:
                    points.append(SingularPoint(params={"lambda": lam, "lambda1": lam1}, reason=reason))
        return points


class ConfigLoader:
    """Class responsible for loading sweep configurations."""

    @staticmethod
    def load_from_text(text: str, default_model: ModelName | None = None, **overrides: Any) -> SweepConfig:
        """
        Parse and validate a JSON configuration.

        Args:
            text: JSON document (an object)
            default_model: Model used when neither the document nor the overrides name one
            **overrides: Field values replacing the document's (None values are ignored)

        Returns:
            Validated SweepConfig

        Raises:
            ConfigLoadError: If the text is not a JSON object or fails validation

        """
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as e:
            msg = f"Invalid JSON in configuration: {e!s}"
            raise ConfigLoadError(msg) from e
        if not isinstance(data, dict):
            msg = f"Configuration must be a JSON object, got {type(data).__name__}"
            raise ConfigLoadError(msg)

        data.update({key: value for key, value in overrides.items() if value is not None})
        if data.get("model") is None and default_model is not None:
            data["model"] = default_model
        try:
            config = SweepConfig.model_validate(data)
        except ValidationError as e:
            msg = f"Invalid configuration: {e!s}"
            raise ConfigLoadError(msg) from e

        for point in config.singular_points():
            logger.warning(f"Singular grid point {point.params} ({point.reason}) will be skipped")
        return config

    @staticmethod
    def load_from_path(file_path: Path, default_model: ModelName | None = None, **overrides: Any) -> SweepConfig:
        """
        Load a configuration from a local JSON file.

        Args:
            file_path: Path to the configuration file
            default_model: Model used when neither the file nor the overrides name one
            **overrides: Field values replacing the file's

        Returns:
            Validated SweepConfig

        Raises:
            ConfigLoadError: If the file cannot be read, parsed or validated

        """
        try:
            text = file_path.read_text(encoding="utf-8")
        except FileNotFoundError as e:
            msg = f"File not found: {file_path}"
            raise ConfigLoadError(msg) from e
        except (OSError, UnicodeDecodeError) as e:
            msg = f"Error loading configuration: {e!s}"
            raise ConfigLoadError(msg) from e
        logger.info(f"Loaded configuration from {file_path}")
        return ConfigLoader.load_from_text(text, default_model, **overrides)


def load_config(path: Path | None, default_model: ModelName | None = None, **overrides: Any) -> SweepConfig:
    """Load a configuration file, or the defaults when no path is given."""
    if path is None:
        return ConfigLoader.load_from_text("", default_model, **overrides)
    return ConfigLoader.load_from_path(path, default_model, **overrides)
