"""Magnitude weightings and magnitude of unit-diagonal symmetric matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, NotUnitDiagonal, SingularMatrix
from .linalg import DEFAULT_ZERO_TOL, SymmetricMatrix, as_symmetric, solve_symmetric

__all__ = [
    "MagnitudeResult",
    "UNIT_DIAGONAL_TOL",
    "WEIGHTING_RESIDUAL_TOL",
    "magnitude",
    "magnitude_inverse_sum",
    "magnitude_of_metric",
    "rayleigh_quotient",
    "require_unit_diagonal",
]

UNIT_DIAGONAL_TOL = 1e-12
WEIGHTING_RESIDUAL_TOL = 1e-8  # scaled by sqrt(size)


@dataclass(frozen=True, eq=False)
class MagnitudeResult:
    """Outcome of solving ``Z w = 1``.

    ``weighting`` and ``magnitude`` are ``None`` when the system has no
    solution.  For a degenerate but consistent system the minimum-norm
    weighting is reported; every weighting has the same sum.
    """

    weighting: np.ndarray | None
    magnitude: float | None
    has_weighting: bool
    unique_weighting: bool
    residual_norm: float


def require_unit_diagonal(matrix) -> SymmetricMatrix:
    matrix = as_symmetric(matrix)
    if not matrix.is_unit_diagonal(UNIT_DIAGONAL_TOL):
        dev = float(np.max(np.abs(np.diag(matrix.entries) - 1.0)))
        raise NotUnitDiagonal(f"diagonal deviates from 1 by {dev:.3g}")
    return matrix


def magnitude(matrix, tol: float = DEFAULT_ZERO_TOL) -> MagnitudeResult:
    matrix = require_unit_diagonal(matrix)
    report = solve_symmetric(matrix, np.ones(matrix.size), tol)
    if report.residual_norm > WEIGHTING_RESIDUAL_TOL * np.sqrt(matrix.size):
        return MagnitudeResult(None, None, False, False, report.residual_norm)
    weights = report.solution
    weights.setflags(write=False)
    return MagnitudeResult(weights, float(np.sum(weights)), True, report.unique, report.residual_norm)


def magnitude_inverse_sum(matrix, tol: float = DEFAULT_ZERO_TOL) -> float:
    """Sum of all entries of ``Z^{-1}``, evaluated spectrally as sum_k (1.u_k)^2 / lambda_k."""
    matrix = require_unit_diagonal(matrix)
    evals, evecs = matrix._eigen
    band = tol * max(1.0, float(np.max(np.abs(evals))))
    if np.any(np.abs(evals) <= band):
        raise SingularMatrix("matrix is singular at the zero-band tolerance")
    col_sums = evecs.sum(axis=0)
    return float(np.sum(col_sums * col_sums / evals))


def magnitude_of_metric(space, scale: float = 1.0, tol: float = DEFAULT_ZERO_TOL) -> MagnitudeResult:
    from .metric import similarity_matrix

    return magnitude(similarity_matrix(space, scale), tol)


def rayleigh_quotient(matrix, direction) -> float:
    """``(sum a)^2 / (a^t Z a)`` for a direction ``a``; bounded above by the magnitude for PSD ``Z``."""
    matrix = as_symmetric(matrix)
    direction = np.asarray(direction, dtype=float)
    denom = float(direction @ (matrix.entries @ direction))
    if abs(denom) <= 1e-12 * (1.0 + float(direction @ direction)):
        raise DegenerateDirection("a^t Z a vanishes for this direction")
    return float(np.sum(direction)) ** 2 / denom
