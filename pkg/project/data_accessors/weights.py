"""
Closed-form integrable Boltzmann weights of the dilute O(n) and C2(1) loop models.

Every function here evaluates one printed weight family at a parameter point and returns an immutable
WeightSet. Boundary families come in two flux branches: the real branch (vanishing real parts of the
boundary contour sums) and the imaginary branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np

from project.data_accessors.params import on_params

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

    from project.data_accessors.params import C2Params, GenOnParams, OnParams


class WeightModel(StrEnum):
    """Model tag of a weight set."""

    ON_BULK = "on-bulk"
    ON_BOUNDARY = "on-boundary"
    C2_BULK = "c2-bulk"
    C2_BOUNDARY = "c2-boundary"
    GEN_ON_BOUNDARY = "gen-on-boundary"


class Branch(StrEnum):
    """Flux branch of a boundary solution."""

    REAL = "real"
    IMAGINARY = "imaginary"

    @property
    def sign(self) -> int:
        """+1 for the real branch, -1 for the imaginary branch."""
        return 1 if self is Branch.REAL else -1


ON_BULK_SYMBOLS = ("t", "u1", "u2", "v", "w1", "w2")
C2_BULK_SYMBOLS = ("u1", "u2", "v", "w1", "w2")
DIAGONAL_SYMBOLS = ("beta1", "beta2")
ON_BOUNDARY_SYMBOLS = ("beta1", "beta2", "beta3")
FOUR_BOUNDARY_SYMBOLS = ("beta1", "beta2", "beta3", "beta4")

# Admissible symbol sets per model, in canonical order
MODEL_SYMBOLS: dict[WeightModel, tuple[tuple[str, ...], ...]] = {
    WeightModel.ON_BULK: (ON_BULK_SYMBOLS,),
    WeightModel.ON_BOUNDARY: (ON_BOUNDARY_SYMBOLS, DIAGONAL_SYMBOLS),
    WeightModel.C2_BULK: (C2_BULK_SYMBOLS,),
    WeightModel.C2_BOUNDARY: (FOUR_BOUNDARY_SYMBOLS, DIAGONAL_SYMBOLS),
    WeightModel.GEN_ON_BOUNDARY: (FOUR_BOUNDARY_SYMBOLS,),
}


@dataclass(frozen=True)
class WeightSet:
    """Named real Boltzmann weights of one model at one parameter point."""

    entries: Mapping[str, float]
    model: WeightModel
    branch: Branch | None = None
    symbols: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        values = {name: float(value) for name, value in self.entries.items()}
        allowed = MODEL_SYMBOLS[self.model]
        ordered = next((symbols for symbols in allowed if set(symbols) == set(values)), None)
        if ordered is None:
            msg = f"Symbols {sorted(values)} do not match model {self.model} (allowed: {list(allowed)})"
            raise ValueError(msg)
        bad = [name for name, value in values.items() if not math.isfinite(value)]
        if bad:
            msg = f"Non-finite weights in {self.model}: {bad}"
            raise ValueError(msg)

        object.__setattr__(self, "entries", MappingProxyType({name: values[name] for name in ordered}))
        object.__setattr__(self, "symbols", ordered)

    def __getitem__(self, symbol: str) -> float:
        return self.entries[symbol]

    def get(self, symbol: str, default: float = 0.0) -> float:
        return self.entries.get(symbol, default)

    def vector(self, symbols: Sequence[str] | None = None) -> np.ndarray:
        """
        Return the weights as a float vector.

        Args:
            symbols: Symbol order (defaults to the canonical order); absent symbols read as 0

        Returns:
            1-D numpy array

        """
        order = self.symbols if symbols is None else symbols
        return np.array([self.get(name) for name in order], dtype=float)

    def perturbed(self, symbol: str, delta: float) -> WeightSet:
        """Return a copy with delta added to one weight (negative controls)."""
        if symbol not in self.entries:
            msg = f"Unknown weight symbol {symbol!r} for {self.model}"
            raise KeyError(msg)
        entries = dict(self.entries)
        entries[symbol] += delta
        return WeightSet(entries, self.model, self.branch)

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    @classmethod
    def from_vector(
        cls,
        symbols: Iterable[str],
        values: Iterable[float],
        model: WeightModel,
        branch: Branch | None = None,
    ) -> WeightSet:
        names = list(symbols)
        numbers = [float(value) for value in values]
        if len(names) != len(numbers):
            msg = f"Got {len(numbers)} values for {len(names)} symbols"
            raise ValueError(msg)
        return cls(dict(zip(names, numbers, strict=True)), model, branch)


def on_bulk_weights(lam: float, x: float) -> WeightSet:
    """
    Evaluate the integrable dilute O(n) bulk weights.

    Args:
        lam: Crossing parameter
        x: Spectral parameter (any real, including the x+y and y-x arguments of the reflection diagram)

    Returns:
        WeightSet over (t, u1, u2, v, w1, w2)

    """
    sin = math.sin
    entries = {
        "t": sin(x) * sin(3 * lam - x) + sin(2 * lam) * sin(3 * lam),
        "u1": sin(2 * lam) * sin(3 * lam - x),
        "u2": sin(2 * lam) * sin(x),
        "v": sin(x) * sin(3 * lam - x),
        "w1": sin(2 * lam - x) * sin(3 * lam - x),
        "w2": -sin(x) * sin(lam - x),
    }
    return WeightSet(entries, WeightModel.ON_BULK)


def on_bulk(p: OnParams) -> WeightSet:
    return on_bulk_weights(p.lam, p.x)


def on_boundary(p: OnParams, branch: Branch) -> WeightSet:
    """
    Evaluate the non-diagonal O(n) boundary weights.

    beta1 = n1 + n2*cos(4l) +/- n3*cos(2x - l), beta2 = n1*cos(2x) + n2*cos(2x - 4l) +/- n3*cos(l),
    beta3 = -2*sin(4l)*sin(2x); the upper sign is the real branch.
    """
    lam, x, sg = p.lam, p.x, branch.sign
    entries = {
        "beta1": p.n1 + p.n2 * math.cos(4 * lam) + sg * p.n3 * math.cos(2 * x - lam),
        "beta2": p.n1 * math.cos(2 * x) + p.n2 * math.cos(2 * x - 4 * lam) + sg * p.n3 * math.cos(lam),
        "beta3": -2 * math.sin(4 * lam) * math.sin(2 * x),
    }
    return WeightSet(entries, WeightModel.ON_BOUNDARY, branch)


def on_boundary_n3_form(p: OnParams, branch: Branch) -> WeightSet:
    """Evaluate the same boundary solution in the form with n3 factored out of beta1 and beta2."""
    lam, lam1, x, sg = p.lam, p.lam1, p.x, branch.sign
    entries = {
        "beta1": p.n3 * (sg * math.cos(2 * x - lam) - math.cos(4 * lam + 4 * lam1)),
        "beta2": p.n3 * (sg * math.cos(lam) - math.cos(2 * x - 4 * lam - 4 * lam1)),
        "beta3": -2 * math.sin(4 * lam) * math.sin(2 * x),
    }
    return WeightSet(entries, WeightModel.ON_BOUNDARY, branch)


def on_boundary_diagonal(lam: float, x: float, branch: Branch) -> WeightSet:
    """Diagonal O(n) boundary (beta3 = 0): the sine pair on the real branch, the cosine pair otherwise."""
    trig = math.sin if branch is Branch.REAL else math.cos
    entries = {"beta1": trig(1.5 * lam + x), "beta2": trig(1.5 * lam - x)}
    return WeightSet(entries, WeightModel.ON_BOUNDARY, branch)


def on_blobbed(lam: float, lam1: float, x: float, branch: Branch) -> WeightSet:
    """
    Evaluate the boundary weights of the blobbed O(n) model.

    Args:
        lam: Crossing parameter
        lam1: Boundary crossing parameter
        x: Spectral parameter
        branch: Flux branch

    Returns:
        WeightSet over (beta1, beta2, beta3)

    """
    sg = branch.sign
    shift = 4 * lam + 4 * lam1
    entries = {
        "beta1": 0.5 * (math.cos(2 * x - lam) - sg * math.cos(shift)),
        "beta2": 0.5 * (math.cos(lam) - sg * math.cos(2 * x - shift)),
        "beta3": sg * math.sin(shift) * math.sin(2 * x),
    }
    return WeightSet(entries, WeightModel.ON_BOUNDARY, branch)


def blob_rescaling(p: OnParams, branch: Branch) -> float:
    """
    Return the factor mapping on_boundary onto on_blobbed at the blob specialization.

    At n2 = 1 (hence n1 = -sin(4l1)/sin(4l + 4l1)) the blobbed weights are
    -/+ sin(4l + 4l1) / (2 sin(4l)) times the general boundary weights.
    """
    return -branch.sign * math.sin(4 * p.lam + 4 * p.lam1) / (2 * math.sin(4 * p.lam))


def on_generalized_boundary(g: GenOnParams) -> WeightSet:
    """Evaluate the one-parameter family of asymmetric O(n) boundary weights labelled by k."""
    lam, x, k, n1 = g.lam, g.x, g.k, g.n1
    sin = math.sin
    k2 = k * k
    entries = {
        "beta1": 2 * math.cos(lam) * sin(1.5 * lam + x)
        - k2 * n1 * sin(0.5 * lam + x) * sin(0.5 * lam - x) * sin(1.5 * lam - x),
        "beta2": sin(1.5 * lam - x) * (2 * math.cos(lam) - k2 * n1 * sin(0.5 * lam - x) ** 2),
        "beta3": -k2 * sin(2 * lam) * sin(2 * x) * sin(0.5 * lam - x),
        "beta4": k * sin(2 * lam) * sin(2 * x),
    }
    return WeightSet(entries, WeightModel.GEN_ON_BOUNDARY)


def generalized_large_k_limit(g: GenOnParams, k: float) -> np.ndarray:
    """
    Rescale the family at a finite large k.

    Args:
        g: Parameter point (its own k is ignored)
        k: Finite value of k

    Returns:
        Vector -beta_j / (k^2 sin(lam/2 - x)) for beta1..beta4

    """
    finite = on_generalized_boundary(type(g)(lam=g.lam, x=g.x, k=k, n1=g.n1))
    return -finite.vector() / (k * k * math.sin(0.5 * g.lam - g.x))


def generalized_limit_reference(g: GenOnParams) -> WeightSet:
    """
    Return the O(n) boundary solution approached by the family as k grows.

    This is the real-branch solution at lambda1 = -lambda/2 with n2 = n1, the point where the two
    mixed boundary fugacities coincide.
    """
    return on_boundary(on_params(g.lam, -0.5 * g.lam, g.x, n2=g.n1), Branch.REAL)


def c2_bulk_weights(lam: float, x: float) -> WeightSet:
    """
    Evaluate the colour-symmetric C2(1) bulk weights.

    Args:
        lam: Crossing parameter
        x: Spectral parameter

    Returns:
        WeightSet over (u1, u2, v, w1, w2)

    """
    sin = math.sin
    entries = {
        "u1": sin(2 * lam) * sin(x - 6 * lam),
        "u2": -sin(2 * lam) * sin(x),
        "v": -sin(x) * sin(x - 6 * lam),
        "w1": -sin(x - 2 * lam) * sin(x - 6 * lam),
        "w2": -sin(x) * sin(x - 4 * lam),
    }
    return WeightSet(entries, WeightModel.C2_BULK)


def c2_bulk(p: C2Params) -> WeightSet:
    return c2_bulk_weights(p.lam, p.x)


def c2_boundary(p: C2Params, branch: Branch) -> WeightSet:
    """
    Evaluate the non-diagonal C2(1) boundary weights.

    Real branch: beta1 = beta2 = n1*cos(x - 4l - 4l1), beta3 = beta4 = 2*sin(4l1)*sin(x).
    Imaginary branch: beta1 = -beta2 = n1*sin(x - 4l - 4l1), beta3 = -beta4 = -2*sin(4l1)*cos(x).
    """
    shifted = p.x - 4 * p.lam - 4 * p.lam1
    if branch is Branch.REAL:
        pair = p.n1 * math.cos(shifted)
        blob = 2 * math.sin(4 * p.lam1) * math.sin(p.x)
        entries = {"beta1": pair, "beta2": pair, "beta3": blob, "beta4": blob}
    else:
        pair = p.n1 * math.sin(shifted)
        blob = -2 * math.sin(4 * p.lam1) * math.cos(p.x)
        entries = {"beta1": pair, "beta2": -pair, "beta3": blob, "beta4": -blob}
    return WeightSet(entries, WeightModel.C2_BOUNDARY, branch)


def c2_boundary_diagonal(branch: Branch) -> WeightSet:
    """Diagonal C2(1) boundary (beta3 = beta4 = 0): beta1 = +/- beta2, independent of x."""
    return WeightSet({"beta1": 1.0, "beta2": float(branch.sign)}, WeightModel.C2_BOUNDARY, branch)
