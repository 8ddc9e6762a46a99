"""
Discrete-holomorphicity equation systems of the dilute O(n) and C2(1) loop models.

Each equation is transcribed as a table of monomials (powers of xi and zeta, a loop fugacity and the
defect factors q1, conj(q1)) per weight symbol. Systems evaluate to coefficient matrices at a parameter
point; complex forms are split into real and imaginary rows before the nullspace is extracted, which
builds in the requirement of real Boltzmann weights.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger
from scipy.linalg import null_space

from project.data_accessors.params import C2Params, LoopParams, OnParams, on_bulk_params, on_spin
from project.data_accessors.weights import (
    C2_BULK_SYMBOLS,
    DIAGONAL_SYMBOLS,
    FOUR_BOUNDARY_SYMBOLS,
    ON_BOUNDARY_SYMBOLS,
    ON_BULK_SYMBOLS,
    Branch,
    WeightModel,
    WeightSet,
    c2_boundary,
    c2_boundary_diagonal,
    on_boundary,
    on_boundary_diagonal,
    on_bulk_weights,
)
from project.settings import settings

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence


class RankDeficiencyError(Exception):
    """Exception raised when a system does not have the expected one-dimensional nullspace."""


FUGACITY_SYMBOLS = ("n", "n1", "n2", "n3")

_TOKEN = re.compile(r"^(xi|xibar|zeta|zetabar|n|n1|n2|n3|q1|q1bar|1)(?:\^(-?\d+(?:/\d+)?))?$")


@dataclass(frozen=True)
class Monomial:
    """
    One signed product sign * xi^a * zeta^b * fugacity * q1^c * conj(q1)^d.

    The defect exponents c and d record the phase factors picked up by the modified observable.
    """

    sign: int = 1
    xi_power: Fraction = Fraction(0)
    zeta_power: int = 0
    fugacity: str | None = None
    q1_power: int = 0
    q1bar_power: int = 0

    @classmethod
    def parse(cls, text: str) -> Monomial:
        """
        Parse a space-separated monomial such as "-n2 q1 zeta xibar" or "q1bar xi^-1/2 zetabar".

        Args:
            text: Monomial text; a leading "-" negates it

        Returns:
            Parsed Monomial

        Raises:
            ValueError: On unknown tokens, a second fugacity or a fractional zeta/q1 power

        """
        body = text.strip()
        sign = 1
        if body.startswith("-"):
            sign = -1
            body = body[1:].strip()
        if not body:
            msg = f"Empty monomial: {text!r}"
            raise ValueError(msg)

        xi_power = Fraction(0)
        zeta_power = 0
        fugacity: str | None = None
        q1_power = 0
        q1bar_power = 0
        for token in body.split():
            match = _TOKEN.match(token)
            if match is None:
                msg = f"Unknown monomial token {token!r} in {text!r}"
                raise ValueError(msg)
            base, exponent_text = match.groups()
            exponent = Fraction(exponent_text) if exponent_text else Fraction(1)
            if base != "xi" and base != "xibar" and exponent.denominator != 1:
                msg = f"Fractional power only allowed on xi: {token!r}"
                raise ValueError(msg)

            if base == "1":
                continue
            if base in ("xi", "xibar"):
                xi_power += exponent if base == "xi" else -exponent
            elif base in ("zeta", "zetabar"):
                zeta_power += int(exponent) if base == "zeta" else -int(exponent)
            elif base == "q1":
                q1_power += int(exponent)
            elif base == "q1bar":
                q1bar_power += int(exponent)
            else:
                if fugacity is not None or exponent != 1:
                    msg = f"At most one plain fugacity factor per monomial: {text!r}"
                    raise ValueError(msg)
                fugacity = base
        return cls(sign, xi_power, zeta_power, fugacity, q1_power, q1bar_power)

    def evaluate(self, p: LoopParams) -> complex:
        value = complex(self.sign) * p.xi_power(self.xi_power) * cmath.exp(-1j * self.zeta_power * p.x)
        if self.fugacity is not None:
            value *= p.fugacities()[self.fugacity]
        if self.q1_power:
            value *= p.q1**self.q1_power
        if self.q1bar_power:
            value *= p.q1.conjugate() ** self.q1bar_power
        return value

    def __str__(self) -> str:
        parts: list[str] = []
        if self.fugacity:
            parts.append(self.fugacity)
        parts.extend(["q1"] * self.q1_power)
        parts.extend(["q1bar"] * self.q1bar_power)
        if self.xi_power:
            parts.append("xi" if self.xi_power == 1 else f"xi^{self.xi_power}")
        if self.zeta_power:
            parts.append("zeta" if self.zeta_power == 1 else f"zeta^{self.zeta_power}")
        text = " ".join(parts) or "1"
        return f"-{text}" if self.sign < 0 else text


class FormKind(StrEnum):
    """Which part of a complex contour sum a form imposes."""

    COMPLEX = "complex"
    REAL_PART = "real-part"
    IMAG_PART = "imaginary-part"


@dataclass(frozen=True)
class LinearForm:
    """One discrete-holomorphicity equation, linear in the weights."""

    name: str
    terms: Mapping[str, tuple[Monomial, ...]]
    kind: FormKind = FormKind.COMPLEX

    @classmethod
    def from_table(cls, name: str, table: Mapping[str, str | tuple[str, ...]], kind: FormKind) -> LinearForm:
        terms = {
            symbol: tuple(Monomial.parse(text) for text in ((entry,) if isinstance(entry, str) else entry))
            for symbol, entry in table.items()
        }
        return cls(name, terms, kind)

    def coefficient(self, p: LoopParams, symbol: str) -> complex:
        """Return the effective coefficient of one weight (real for real/imaginary-part forms)."""
        total = sum((monomial.evaluate(p) for monomial in self.terms.get(symbol, ())), 0j)
        if self.kind is FormKind.REAL_PART:
            return complex(total.real)
        if self.kind is FormKind.IMAG_PART:
            return complex(total.imag)
        return total

    def evaluate(self, p: LoopParams, weights: WeightSet) -> complex:
        return sum((self.coefficient(p, symbol) * weights.get(symbol) for symbol in self.terms), 0j)

    def residual(self, p: LoopParams, weights: WeightSet) -> float:
        """
        Return |form(weights)| / (max_i |coefficient_i| * max_j |weight_j|) over the form's symbols.

        The product of the two maxima does not vanish when a single coefficient or weight is round-off.
        A form whose terms all vanish has residual 0.
        """
        value = abs(self.evaluate(p, weights))
        if value == 0.0:
            return 0.0
        largest_coefficient = max((abs(self.coefficient(p, symbol)) for symbol in self.terms), default=0.0)
        largest_weight = max((abs(weights.get(symbol)) for symbol in self.terms), default=0.0)
        return value / max(largest_coefficient * largest_weight, settings.singular_eps)


@dataclass(frozen=True)
class EquationSystem:
    """Ordered linear forms over an ordered list of unknowns, bound to one parameter point."""

    name: str
    forms: tuple[LinearForm, ...]
    unknowns: tuple[str, ...]
    params: LoopParams

    def __post_init__(self) -> None:
        for form in self.forms:
            extra = set(form.terms) - set(self.unknowns)
            if extra:
                msg = f"Form {form.name} of {self.name} uses symbols outside the unknowns: {sorted(extra)}"
                raise ValueError(msg)

    @property
    def form_names(self) -> list[str]:
        return [form.name for form in self.forms]

    def matrix(self) -> np.ndarray:
        """Return the m x k complex coefficient matrix."""
        return np.array(
            [[form.coefficient(self.params, symbol) for symbol in self.unknowns] for form in self.forms],
            dtype=complex,
        )

    def real_matrix(self) -> np.ndarray:
        """Return the real coefficient matrix; each complex form contributes its real and imaginary rows."""
        rows: list[np.ndarray] = []
        for form, row in zip(self.forms, self.matrix(), strict=True):
            if form.kind is FormKind.COMPLEX:
                rows.extend([row.real, row.imag])
            else:
                rows.append(row.real)
        return np.vstack(rows)

    def residuals(self, weights: WeightSet) -> np.ndarray:
        return np.array([form.residual(self.params, weights) for form in self.forms])

    def max_residual(self, weights: WeightSet) -> float:
        return float(self.residuals(weights).max())

    def select(self, names: Iterable[str]) -> EquationSystem:
        """Return the subsystem of the named forms, in the given order."""
        by_name = {form.name: form for form in self.forms}
        wanted = list(names)
        missing = [name for name in wanted if name not in by_name]
        if missing:
            msg = f"Unknown forms {missing} in {self.name}"
            raise KeyError(msg)
        forms = tuple(by_name[name] for name in wanted)
        return EquationSystem(f"{self.name}[{','.join(wanted)}]", forms, self.unknowns, self.params)

    def permuted(self, order: Sequence[int]) -> EquationSystem:
        return EquationSystem(self.name, tuple(self.forms[i] for i in order), self.unknowns, self.params)


# Monomial tables, one dict per printed equation

ON_BULK_TABLE: tuple[dict[str, str], ...] = (
    {"u1": "n", "v": "zeta xi^2", "u2": "-xibar", "w2": "-zeta", "w1": "-n zeta"},
    {"u2": "n", "w2": "n zeta xi", "w1": "zeta xi", "u1": "-xi", "v": "-zeta xibar"},
    {"v": "n", "u1": "zeta xi^2", "w1": "-xi^2", "w2": "-xibar^2", "u2": "-zeta xibar"},
    {"t": "1", "u2": "zeta xi", "v": "-1", "u1": "-zeta"},
)

ON_BLOB_TABLES: tuple[tuple[dict[str, str], ...], ...] = (
    (
        {"u1": "n1", "v": "q1bar zeta xi^2", "u2": "-q1 xibar", "w2": "-q1 zeta", "w1": "-n1 zeta"},
        {"u2": "n1", "w2": "n1 zeta xi", "w1": "q1bar zeta xi", "u1": "-q1bar xi", "v": "-q1 zeta xibar"},
        {"v": "n1", "u1": "q1bar zeta xi^2", "w1": "-q1bar xi^2", "w2": "-q1 xibar^2", "u2": "-q1 zeta xibar"},
    ),
    (
        {"u1": "n1 q1", "v": "n3 q1bar zeta xi^2", "u2": "-n2 q1 xibar", "w2": "-n2 q1 zeta", "w1": "-n1 q1 zeta"},
        {
            "u2": "n1 q1",
            "w2": "n1 q1 zeta xi",
            "w1": "n3 q1bar zeta xi",
            "u1": "-n3 q1bar xi",
            "v": "-n2 q1 zeta xibar",
        },
        {
            "v": "n1 q1",
            "u1": "n3 q1bar zeta xi^2",
            "w1": "-n3 q1bar xi^2",
            "w2": "-n2 q1 xibar^2",
            "u2": "-n2 q1 zeta xibar",
        },
    ),
)

# Boundary contour sums; each carries the xi^(-1/2) prefactor of the boundary edge
ON_BOUNDARY_TABLE: tuple[dict[str, str], ...] = (
    {"beta1": "xi^-1/2 zetabar", "beta2": "-xi^-1/2 zeta", "beta3": "-q1 xi^-1/2 zeta"},
    {"beta1": "q1 xi^-1/2 zetabar", "beta2": "-q1 xi^-1/2 zeta", "beta3": "-n2 q1 xi^-1/2 zeta"},
    {"beta1": "q1bar xi^-1/2 zetabar", "beta2": "-q1bar xi^-1/2 zeta", "beta3": "-n3 q1 xi^-1/2 zeta"},
)

ON_DIAGONAL_TABLE: dict[str, str] = {"beta1": "xi^-1/2 zetabar", "beta2": "-xi^-1/2 zeta"}

C2_BULK_TABLES: tuple[tuple[dict[str, str], ...], ...] = (
    (
        {"u1": "n", "v": "xi zeta", "u2": "-xibar", "w1": "-n zeta", "w2": "-zeta"},
        {"w2": "n xibar", "w1": "xibar", "u2": "n zeta", "v": "-1", "u1": "-xibar zeta"},
        {"v": "n", "u1": "xi zeta", "w1": "-xi", "w2": "-xibar", "u2": "-zeta"},
    ),
    (
        {"u1": "n1", "v": "q1bar xi zeta", "u2": "-q1 xibar", "w1": "-n1 zeta", "w2": "-q1 zeta"},
        {"w2": "n1 xibar", "w1": "q1 xibar", "u2": "n1 zeta", "v": "-q1bar", "u1": "-q1 xibar zeta"},
        {"v": "n1", "u1": "q1bar xi zeta", "w1": "-q1bar xi", "w2": "-q1 xibar", "u2": "-q1 zeta"},
    ),
    (
        {"u1": "n1 q1", "v": "n3 q1bar xi zeta", "u2": "-n2 q1 xibar", "w1": "-n1 q1 zeta", "w2": "-n2 q1 zeta"},
        {"w2": "n1 q1 xibar", "w1": "n2 q1 xibar", "u2": "n1 q1 zeta", "v": "-n3 q1bar", "u1": "-n2 q1 xibar zeta"},
        {"v": "n1 q1", "u1": "n3 q1bar xi zeta", "w1": "-n3 q1bar xi", "w2": "-n2 q1 xibar", "u2": "-n2 q1 zeta"},
    ),
)

C2_BOUNDARY_TABLE: tuple[dict[str, str], ...] = (
    {"beta1": "-zeta", "beta2": "zetabar", "beta3": "-q1 zeta", "beta4": "q1bar zetabar"},
    {"beta1": "-q1 zeta", "beta2": "q1 zetabar", "beta3": "-n2 q1 zeta", "beta4": "q1 q1bar zetabar"},
    {"beta1": "q1 zetabar", "beta2": "-q1 zeta", "beta3": "q1 q1bar zetabar", "beta4": "-n2 q1 zeta"},
    {"beta1": "-q1 zeta", "beta2": "q1 zetabar", "beta3": "-q1^2 zeta", "beta4": "n3 q1bar zetabar"},
    {"beta1": "q1 zetabar", "beta2": "-q1 zeta", "beta3": "n3 q1bar zetabar", "beta4": "-q1^2 zeta"},
)

C2_DIAGONAL_TABLE: dict[str, str] = {"beta1": "zetabar", "beta2": "-zeta"}


def _split_forms(tables: Sequence[Mapping[str, str]]) -> tuple[LinearForm, ...]:
    forms: list[LinearForm] = []
    for index, table in enumerate(tables, start=1):
        forms.append(LinearForm.from_table(f"R{index}", table, FormKind.REAL_PART))
        forms.append(LinearForm.from_table(f"I{index}", table, FormKind.IMAG_PART))
    return tuple(forms)


def on_bulk_system(p: OnParams) -> EquationSystem:
    forms = tuple(
        LinearForm.from_table(f"E{index}", table, FormKind.COMPLEX) for index, table in enumerate(ON_BULK_TABLE, 1)
    )
    return EquationSystem("on-bulk", forms, ON_BULK_SYMBOLS, p)


def on_bulk_blob_systems(p: OnParams) -> tuple[EquationSystem, EquationSystem]:
    """Return the two bulk systems of a plaquette touched by a boundary-attached (blobbed) strand."""
    first, second = (
        EquationSystem(
            f"on-blob-{set_index}",
            tuple(
                LinearForm.from_table(f"B{set_index}.{index}", table, FormKind.COMPLEX)
                for index, table in enumerate(tables, 1)
            ),
            ON_BULK_SYMBOLS,
            p,
        )
        for set_index, tables in enumerate(ON_BLOB_TABLES, 1)
    )
    return first, second


def n3_condition(p: OnParams) -> complex:
    """Return exp(8i*lambda) * conj(q1) * (n3 - q1) + q1 * (n2 - q1); zero for consistent parameters."""
    return cmath.exp(8j * p.lam) * p.q1.conjugate() * (p.n3 - p.q1) + p.q1 * (p.n2 - p.q1)


def on_boundary_forms(p: OnParams) -> EquationSystem:
    return EquationSystem("on-boundary", _split_forms(ON_BOUNDARY_TABLE), ON_BOUNDARY_SYMBOLS, p)


def on_boundary_diagonal_forms(p: OnParams) -> EquationSystem:
    return EquationSystem("on-diagonal", _split_forms([ON_DIAGONAL_TABLE]), DIAGONAL_SYMBOLS, p)


def c2_bulk_systems(p: C2Params) -> EquationSystem:
    forms = tuple(
        LinearForm.from_table(f"S{set_index}.{index}", table, FormKind.COMPLEX)
        for set_index, tables in enumerate(C2_BULK_TABLES, 1)
        for index, table in enumerate(tables, 1)
    )
    return EquationSystem("c2-bulk", forms, C2_BULK_SYMBOLS, p)


def c2_boundary_forms(p: C2Params) -> EquationSystem:
    return EquationSystem("c2-boundary", _split_forms(C2_BOUNDARY_TABLE), FOUR_BOUNDARY_SYMBOLS, p)


def c2_boundary_diagonal_forms(p: C2Params) -> EquationSystem:
    return EquationSystem("c2-diagonal", _split_forms([C2_DIAGONAL_TABLE]), DIAGONAL_SYMBOLS, p)


def boundary_branch(system: EquationSystem, branch: Branch) -> EquationSystem:
    """Keep the real-part forms for the real branch and the imaginary-part forms otherwise."""
    kind = FormKind.REAL_PART if branch is Branch.REAL else FormKind.IMAG_PART
    return system.select(form.name for form in system.forms if form.kind is kind)


@dataclass(frozen=True)
class NullspaceResult:
    """Numerical rank and nullspace basis (columns) of a real matrix."""

    rank: int
    basis: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.basis.shape[1])


def nullspace(matrix: np.ndarray, rank_tol: float | None = None) -> NullspaceResult:
    """
    Extract the numerical nullspace of a small dense real matrix.

    Singular values below rank_tol times the largest one count as zero. Each basis vector is scaled so
    that its entry of largest magnitude is +1.

    Args:
        matrix: Real m x k matrix
        rank_tol: Relative singular-value cutoff (defaults to settings.rank_tol)

    Returns:
        NullspaceResult with rank and a k x (k - rank) basis

    Raises:
        ValueError: If the matrix is empty, not 2-D, non-finite, or rank_tol is not positive

    """
    tol = settings.rank_tol if rank_tol is None else rank_tol
    array = np.asarray(matrix, dtype=float)
    if array.ndim != 2 or array.size == 0:
        msg = f"Expected a non-empty 2-D matrix, got shape {array.shape}"
        raise ValueError(msg)
    if not np.all(np.isfinite(array)):
        msg = "Matrix has non-finite entries"
        raise ValueError(msg)
    if tol <= 0:
        msg = f"rank_tol must be positive, got {tol}"
        raise ValueError(msg)

    basis = null_space(array, rcond=tol)
    for column in range(basis.shape[1]):
        vector = basis[:, column]
        basis[:, column] = vector / vector[np.argmax(np.abs(vector))]
    return NullspaceResult(rank=array.shape[1] - basis.shape[1], basis=basis)


def projective_deviation(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """
    Return max over i<j of |a_i b_j - a_j b_i| / (max|a| * max|b|).

    A zero vector against a nonzero one never matches (deviation inf).

    Raises:
        ValueError: On length mismatch or when both vectors are zero

    """
    u = np.asarray(a, dtype=float)
    w = np.asarray(b, dtype=float)
    if u.shape != w.shape:
        msg = f"Length mismatch: {u.shape} vs {w.shape}"
        raise ValueError(msg)
    norm_u = float(np.max(np.abs(u), initial=0.0))
    norm_w = float(np.max(np.abs(w), initial=0.0))
    if norm_u == 0.0 and norm_w == 0.0:
        msg = "Projective comparison of two zero vectors"
        raise ValueError(msg)
    if norm_u == 0.0 or norm_w == 0.0:
        return float("inf")
    cross = np.outer(u, w) - np.outer(w, u)
    return float(np.max(np.abs(cross)) / (norm_u * norm_w))


def projective_match(
    a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray, tol: float | None = None
) -> bool:
    limit = settings.projective_tol if tol is None else tol
    return projective_deviation(a, b) <= limit


def _solve_one(system: EquationSystem, rank_tol: float | None) -> np.ndarray:
    result = nullspace(system.real_matrix(), rank_tol)
    if result.dimension != 1:
        msg = f"{system.name}: expected a 1-dimensional nullspace, got {result.dimension} (rank {result.rank})"
        raise RankDeficiencyError(msg)
    return result.basis[:, 0]


def _aligned(vector: np.ndarray, reference: WeightSet) -> WeightSet:
    """Scale a nullspace vector onto a closed-form reference (least squares) and wrap it."""
    target = reference.vector()
    scale = float(vector @ target / (vector @ vector))
    logger.debug(f"{reference.model}: nullspace scale {scale:.6g}")
    return WeightSet.from_vector(reference.symbols, vector * scale, reference.model, reference.branch)


def solve_on_bulk(lam: float, x: float, *, spin: float | None = None, rank_tol: float | None = None) -> WeightSet:
    """
    Solve the O(n) bulk system for real weights.

    Args:
        lam: Crossing parameter
        x: Spectral parameter
        spin: Optional spin override (defaults to the integrable spin)
        rank_tol: Relative singular-value cutoff

    Returns:
        WeightSet scaled so that t equals the closed-form t

    Raises:
        RankDeficiencyError: If the nullspace is not one-dimensional

    """
    system = on_bulk_system(on_bulk_params(lam, x, spin=spin))
    vector = _solve_one(system, rank_tol)
    t_closed = on_bulk_weights(lam, x)["t"]
    t_index = ON_BULK_SYMBOLS.index("t")
    if abs(vector[t_index]) > settings.singular_eps:
        vector = vector * (t_closed / vector[t_index])
    return WeightSet.from_vector(ON_BULK_SYMBOLS, vector, WeightModel.ON_BULK)


def spin_scan(lam: float, x: float, offsets: Iterable[float], rank_tol: float | None = None) -> list[int]:
    """Return the nullspace dimension of the real bulk system at spin on_spin(lam) + offset."""
    dimensions = []
    for offset in offsets:
        system = on_bulk_system(on_bulk_params(lam, x, spin=on_spin(lam) + offset))
        dimensions.append(nullspace(system.real_matrix(), rank_tol).dimension)
    return dimensions


def solve_on_boundary(p: OnParams, branch: Branch, rank_tol: float | None = None) -> WeightSet:
    vector = _solve_one(boundary_branch(on_boundary_forms(p), branch), rank_tol)
    return _aligned(vector, on_boundary(p, branch))


def solve_c2_boundary(p: C2Params, branch: Branch, rank_tol: float | None = None) -> WeightSet:
    vector = _solve_one(boundary_branch(c2_boundary_forms(p), branch), rank_tol)
    return _aligned(vector, c2_boundary(p, branch))


def solve_on_diagonal(p: OnParams, branch: Branch, rank_tol: float | None = None) -> WeightSet:
    vector = _solve_one(boundary_branch(on_boundary_diagonal_forms(p), branch), rank_tol)
    return _aligned(vector, on_boundary_diagonal(p.lam, p.x, branch))


def solve_c2_diagonal(p: C2Params, branch: Branch, rank_tol: float | None = None) -> WeightSet:
    vector = _solve_one(boundary_branch(c2_boundary_diagonal_forms(p), branch), rank_tol)
    return _aligned(vector, c2_boundary_diagonal(branch))


def boundary_rank(p: LoopParams, branch: Branch, rank_tol: float | None = None) -> int:
    """Rank of the branch's real boundary coefficient matrix (2 for O(n), 3 for C2(1) at generic points)."""
    if isinstance(p, C2Params):
        system = c2_boundary_forms(p)
    elif isinstance(p, OnParams):
        system = on_boundary_forms(p)
    else:
        msg = f"Unsupported parameter type {type(p).__name__}"
        raise TypeError(msg)
    return nullspace(boundary_branch(system, branch).real_matrix(), rank_tol).rank
