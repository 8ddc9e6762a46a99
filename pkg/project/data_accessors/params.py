"""
Model parameter module for the dilute O(n) and C2(1) loop models.

This module houses every scalar of the two models (crossing parameters, spectral parameter, spin,
loop fugacities, boundary scale and the defect factor q1) and derives the dependent constants from
the free inputs.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from project.settings import settings


class DegenerateParameterError(Exception):
    """Exception raised when a parameterization denominator vanishes."""


def _check_denominator(value: float, label: str) -> None:
    if abs(value) <= settings.denominator_tol:
        msg = f"Degenerate parameterization: {label} = {value:.3e} (tolerance {settings.denominator_tol:.0e})"
        raise DegenerateParameterError(msg)


@dataclass(frozen=True)
class LoopParams:
    """Scalars shared by both loop models at one parameter point."""

    lam: float  # Crossing parameter (radians)
    lam1: float  # Boundary crossing parameter (radians)
    x: float  # Spectral parameter (radians)
    s: float  # Spin of the observable
    xi_angle: float  # Argument of xi; xi = exp(i * xi_angle)
    n: float  # Bulk loop fugacity
    n1: float
    n2: float
    n3: float
    rho: float  # Modulus (with sign) of the defect factor q1
    q1: complex = field(default=0j)

    @property
    def xi(self) -> complex:
        return cmath.exp(1j * self.xi_angle)

    @property
    def zeta(self) -> complex:
        return cmath.exp(-1j * self.x)

    def xi_power(self, a: Fraction | float) -> complex:
        """
        Evaluate xi**a for a half-integer (or any real) exponent.

        The power is taken as exp(i * a * xi_angle), which is single-valued because xi_angle is real.

        Args:
            a: Exponent of xi

        Returns:
            Complex unit-modulus value

        """
        return cmath.exp(1j * float(a) * self.xi_angle)

    def fugacities(self) -> dict[str, float]:
        """Return the loop fugacities keyed by symbol."""
        return {"n": self.n, "n1": self.n1, "n2": self.n2, "n3": self.n3}

    def fugacity_identity_residual(self) -> float:
        """Return n3^2 - (n1^2 + n2^2 - n*n1*n2), which vanishes for every consistent point."""
        return self.n3**2 - (self.n1**2 + self.n2**2 - self.n * self.n1 * self.n2)


@dataclass(frozen=True)
class OnParams(LoopParams):
    """Parameter point of the dilute O(n) model."""

    @property
    def alpha(self) -> float:
        """Rhombus opening angle, x = alpha * (s - 1). Reported only."""
        return self.x / (self.s - 1.0)


@dataclass(frozen=True)
class C2Params(LoopParams):
    """Parameter point of the C2(1) loop model."""

    @property
    def alpha(self) -> float:
        """Rhombus opening angle, x = alpha * (2s - 1). Reported only."""
        return self.x / (2.0 * self.s - 1.0)


@dataclass(frozen=True)
class GenOnParams:
    """Parameter point of the asymmetric O(n) model with a common boundary fugacity n1 = n2 = n3."""

    lam: float
    x: float
    k: float  # Label of the one-parameter solution family
    n1: float

    @property
    def n(self) -> float:
        return float(-2.0 * np.cos(4.0 * self.lam))

    def fugacities(self) -> dict[str, float]:
        return {"n": self.n, "n1": self.n1, "n2": self.n1, "n3": self.n1}


def on_spin(lam: float) -> float:
    """Return the integrable spin s = 3*lambda/pi + 1 of the O(n) observable."""
    return 3.0 * lam / np.pi + 1.0


def c2_spin(lam: float) -> float:
    """Return the spin s = 3*lambda/pi - 1/2 of the C2(1) observable."""
    return 3.0 * lam / np.pi - 0.5


def on_params(lam: float, lam1: float, x: float, n2: float = 1.0, *, spin: float | None = None) -> OnParams:
    """
    Build the O(n) parameter point with n2 as the free boundary scale.

    Args:
        lam: Crossing parameter lambda
        lam1: Boundary crossing parameter lambda1
        x: Spectral parameter
        n2: Free boundary fugacity scale
        spin: Optional spin override (defaults to 3*lambda/pi + 1)

    Returns:
        Fully derived OnParams

    Raises:
        DegenerateParameterError: If sin(4*lambda + 4*lambda1) vanishes

    """
    denominator = float(np.sin(4.0 * lam + 4.0 * lam1))
    _check_denominator(denominator, "sin(4*lambda + 4*lambda1)")

    s = on_spin(lam) if spin is None else spin
    rho = n2 * float(np.sin(2.0 * lam1)) / denominator
    return OnParams(
        lam=lam,
        lam1=lam1,
        x=x,
        s=s,
        xi_angle=s * np.pi,
        n=float(-2.0 * np.cos(4.0 * lam)),
        n1=float(-2.0 * rho * np.cos(2.0 * lam1)),
        n2=n2,
        n3=-n2 * float(np.sin(4.0 * lam)) / denominator,
        rho=rho,
        q1=rho * cmath.exp(1j * (4.0 * lam + 2.0 * lam1)),
    )


def on_bulk_params(lam: float, x: float, *, spin: float | None = None) -> OnParams:
    """
    Build an O(n) point for bulk-only computations.

    The boundary sector is switched off (lambda1 = 0, n1 = n2 = n3 = 0, q1 = 0), so no boundary
    denominator can make the point degenerate.
    """
    s = on_spin(lam) if spin is None else spin
    return OnParams(
        lam=lam,
        lam1=0.0,
        x=x,
        s=s,
        xi_angle=s * np.pi,
        n=float(-2.0 * np.cos(4.0 * lam)),
        n1=0.0,
        n2=0.0,
        n3=0.0,
        rho=0.0,
    )


def c2_params(lam: float, lam1: float, x: float, n1: float = 1.0, *, spin: float | None = None) -> C2Params:
    """
    Build the C2(1) parameter point with n1 as the free boundary scale.

    Args:
        lam: Crossing parameter lambda
        lam1: Boundary crossing parameter lambda1
        x: Spectral parameter
        n1: Free boundary fugacity scale
        spin: Optional spin override (defaults to 3*lambda/pi - 1/2)

    Returns:
        Fully derived C2Params

    Raises:
        DegenerateParameterError: If sin(4*lambda1) or cos(2*lambda1) vanishes

    """
    sin_4l1 = float(np.sin(4.0 * lam1))
    cos_2l1 = float(np.cos(2.0 * lam1))
    _check_denominator(sin_4l1, "sin(4*lambda1)")
    _check_denominator(cos_2l1, "cos(2*lambda1)")

    s = c2_spin(lam) if spin is None else spin
    rho = -n1 / (2.0 * cos_2l1)
    return C2Params(
        lam=lam,
        lam1=lam1,
        x=x,
        s=s,
        xi_angle=2.0 * np.pi * s,
        n=float(-2.0 * np.cos(4.0 * lam)),
        n1=n1,
        n2=-n1 * float(np.sin(4.0 * lam + 4.0 * lam1)) / sin_4l1,
        n3=n1 * float(np.sin(4.0 * lam)) / sin_4l1,
        rho=rho,
        q1=rho * cmath.exp(1j * (4.0 * lam + 2.0 * lam1)),
    )


def gen_on_params(lam: float, x: float, k: float, n1: float) -> GenOnParams:
    return GenOnParams(lam=lam, x=x, k=k, n1=n1)


def phase(s: float, winding: float) -> complex:
    """Return the observable phase exp(-i*s*W) for a defect of winding angle W."""
    return cmath.exp(-1j * s * winding)


def fugacity_ratios(p: OnParams) -> tuple[float, float]:
    """
    Return (n1/n2, n1/n3) of an O(n) point.

    These equal -sin(4*lambda1)/sin(4*lambda + 4*lambda1) and sin(4*lambda1)/sin(4*lambda).
    """
    return p.n1 / p.n2, p.n1 / p.n3


def on_singularity(lam: float, lam1: float) -> str | None:
    """Return a reason string when (lambda, lambda1) is a singular O(n) point, else None."""
    tol = settings.denominator_tol
    if abs(np.sin(4.0 * lam + 4.0 * lam1)) <= tol:
        return "sin(4*lambda + 4*lambda1) = 0"
    if abs(np.sin(4.0 * lam)) <= tol:
        return "sin(4*lambda) = 0"
    return None


def c2_singularity(lam1: float) -> str | None:
    """Return a reason string when lambda1 is a singular C2(1) point, else None."""
    tol = settings.denominator_tol
    if abs(np.sin(4.0 * lam1)) <= tol:
        return "sin(4*lambda1) = 0"
    if abs(np.cos(2.0 * lam1)) <= tol:
        return "cos(2*lambda1) = 0"
    return None


def gen_on_singularity(lam: float, x: float) -> str | None:
    """Return a reason string when the large-k rescaling of the asymmetric family is singular at (lambda, x)."""
    tol = settings.denominator_tol
    if abs(np.sin(2.0 * lam)) <= tol:
        return "sin(2*lambda) = 0"
    if abs(np.sin(0.5 * lam - x)) <= tol:
        return "sin(lambda/2 - x) = 0"
    return None
