"""
Application settings module using pydantic-settings.

This module defines the engine defaults (tolerances, default sweep grids, logging) for the
boundary loop-model verification engine.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings class."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="LOOPDH_",
        case_sensitive=False,
        extra="ignore",
    )

    # Application settings
    app_name: str = "Boundary Loop DH"
    app_version: str = "0.1.0"
    log_level: str = "INFO"

    # Numerical tolerances
    residual_tol: float = 1e-10  # Pass threshold for normalized residuals
    rank_tol: float = 1e-9  # Singular values below rank_tol * s_max count as zero
    projective_tol: float = 1e-8  # Cross-product tolerance for projective comparisons
    denominator_tol: float = 1e-12  # Parameterization singularities
    exact_tol: float = 1e-12  # Records that must hold to round-off (k=0 reduction, fugacity identity)
    limit_k: float = 1e6  # Finite k for the large-k limit of the generalized family
    limit_tol: float = 1e-4  # Relative tolerance of the large-k check (absorbs the O(1/k) correction)
    singular_eps: float = 1e-30  # Floor of residual denominators

    # Default sweep grids (radians), chosen away from every parameterization singularity
    default_lambda: tuple[float, ...] = (0.2, 0.3, 0.45)
    default_lambda1: tuple[float, ...] = (0.1, 0.2)
    default_x: tuple[float, ...] = (0.15, 0.4, 0.7)
    default_y: tuple[float, ...] = (0.1, 0.25)
    default_k: tuple[float, ...] = (0.0, 0.5, 2.0)
    default_fugacity_scale: float = 1.0
    default_gen_fugacity: float = 0.7

    # Report settings
    default_report_path: str = "report.json"
    report_indent: int = 2


# Global settings instance
settings = Settings()
