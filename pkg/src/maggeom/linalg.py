"""Dense symmetric linear algebra.

Everything here works on small dense matrices (up to a few hundred rows).  The
eigensolver is a cyclic Jacobi method run in round-robin order, so that each
round applies ``size // 2`` disjoint plane rotations as one orthogonal update.
Its decomposition is cached on the :class:`SymmetricMatrix`, and signature,
factorization and solves all reuse it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import (
    EigenNonConvergence,
    InvalidMatrix,
    NumericalFailure,
    ReconstructionFailure,
)

__all__ = [
    "DEFAULT_ZERO_TOL",
    "Signature",
    "SignatureFactorization",
    "SolveReport",
    "SymmetricMatrix",
    "as_symmetric",
    "factorize",
    "inner_product",
    "jacobi_eigh",
    "signature",
    "solve_symmetric",
    "sym_eigen",
]

#: Relative width of the band of eigenvalues treated as zero.
DEFAULT_ZERO_TOL = 1e-9
#: Input asymmetry above this is reported when symmetrizing.
ASYMMETRY_TOL = 1e-12
JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class SymmetrizationWarning(UserWarning):
    pass


class SymmetricMatrix:
    """Validated real symmetric square matrix.

    The input is replaced by ``(A + A.T) / 2``, which is exactly symmetric in
    floating point.  ``asymmetry`` keeps the largest ``|A_ij - A_ji|`` seen;
    ``symmetrized`` flags inputs whose asymmetry exceeded ``1e-12``.
    """

    __array_priority__ = 100

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InvalidMatrix(f"expected a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidMatrix("matrix has non-finite entries")
        asym = float(np.max(np.abs(arr - arr.T)))
        arr = (arr + arr.T) / 2
        arr.setflags(write=False)
        self._entries = arr
        self.asymmetry = asym
        if self.symmetrized:
            warnings.warn(
                f"input asymmetric by {asym:.3g}; symmetrized", SymmetrizationWarning, stacklevel=2
            )

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def size(self) -> int:
        return self._entries.shape[0]

    @property
    def symmetrized(self) -> bool:
        return self.asymmetry > ASYMMETRY_TOL

    def __array__(self, dtype=None, copy=None):
        return self._entries if dtype is None else self._entries.astype(dtype)

    def __repr__(self):
        return f"SymmetricMatrix(size={self.size})"

    def is_unit_diagonal(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.diag(self._entries) - 1.0) <= tol))

    @cached_property
    def _eigen(self):
        return jacobi_eigh(self._entries)


def as_symmetric(matrix) -> SymmetricMatrix:
    return matrix if isinstance(matrix, SymmetricMatrix) else SymmetricMatrix(matrix)


@dataclass(frozen=True)
class Signature:
    """Counts of positive, negative and zero eigenvalues."""

    positive: int
    negative: int
    zero: int

    @property
    def size(self) -> int:
        return self.positive + self.negative + self.zero

    @property
    def rank(self) -> int:
        return self.positive + self.negative

    def diagonal(self) -> np.ndarray:
        """Diagonal of the form ``I_{p,q,r}``: +1, then -1, then 0."""
        return np.concatenate([np.ones(self.positive), -np.ones(self.negative), np.zeros(self.zero)])

    def __iter__(self):
        return iter((self.positive, self.negative, self.zero))


@dataclass(frozen=True, eq=False)
class SignatureFactorization:
    """``Z = F.T @ I_{p,q,r} @ F`` with ``F = factor`` invertible; its columns are the points."""

    signature: Signature
    factor: np.ndarray
    zero_tolerance: float

    @property
    def eta(self) -> np.ndarray:
        return self.signature.diagonal()

    @property
    def nondegenerate_part(self) -> np.ndarray:
        """Projection of the points to the first ``rank`` coordinates."""
        return self.factor[: self.signature.rank]

    def reconstruct(self) -> np.ndarray:
        return self.factor.T @ (self.eta[:, None] * self.factor)


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: np.ndarray | None
    residual_norm: float
    consistent: bool
    unique: bool


@lru_cache(maxsize=None)
def _round_robin(size: int) -> tuple[tuple[np.ndarray, ...], ...]:
    """Tournament schedule: every index pair meets exactly once per sweep.

    Each round holds disjoint pairs ``(lo, hi)`` plus the scatter indices used
    to write the round's rotations into one orthogonal matrix.
    """
    slots = size + (size % 2)
    ring = list(range(1, slots))
    rounds = []
    for _ in range(slots - 1):
        players = [0] + ring
        pairs = [(players[i], players[slots - 1 - i]) for i in range(slots // 2)]
        pairs = [(min(i, j), max(i, j)) for i, j in pairs if i < size and j < size]
        if pairs:
            lo, hi = map(np.array, zip(*pairs))
            rows = np.concatenate([lo, hi, lo, hi])
            cols = np.concatenate([lo, hi, hi, lo])
            rounds.append((lo, hi, rows, cols))
        ring = ring[-1:] + ring[:-1]
    return tuple(rounds)


def jacobi_eigh(matrix, rel_tol: float = JACOBI_REL_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm is at most
    ``rel_tol * (1 + ||matrix||_F)``.  Returns eigenvalues in descending order
    (ties keep their original index order) and the orthogonal matrix whose
    columns are the matching eigenvectors.
    """
    matrix = np.array(matrix, dtype=float)
    size = matrix.shape[0]
    eye = np.eye(size)
    # rows [:size] hold the matrix being diagonalized, rows [size:] the accumulated rotations
    work = np.vstack([matrix, eye])
    top = work[:size]
    threshold = rel_tol * (1.0 + np.linalg.norm(matrix))
    rounds = _round_robin(size)
    off_mask = ~np.eye(size, dtype=bool)
    tiny = np.finfo(float).tiny

    for _ in range(max_sweeps + 1):
        if np.linalg.norm(top[off_mask]) <= threshold:
            break
        for lo, hi, rows, cols in rounds:
            # tangent of the smaller angle zeroing top[lo, hi]; 0 when it is already 0
            twice_off = 2.0 * top[lo, hi]
            diag = top.diagonal()
            gap = diag[hi] - diag[lo]
            tan = twice_off / (gap + np.copysign(np.hypot(gap, twice_off), gap) + tiny)
            cos = 1.0 / np.sqrt(1.0 + tan * tan)
            sin = tan * cos
            rot = eye.copy()
            rot[rows, cols] = np.concatenate([cos, cos, sin, -sin])
            work = work @ rot
            top = work[:size]
            top[...] = rot.T @ top
            top[rows[: 2 * len(lo)], cols[2 * len(lo):]] = 0.0
    else:
        raise EigenNonConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    evals = top.diagonal().copy()
    order = np.argsort(-evals, kind="stable")
    return evals[order], work[size:, order]


def sym_eigen(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthogonal eigenvector matrix of ``matrix``."""
    evals, evecs = as_symmetric(matrix)._eigen
    return evals.copy(), evecs.copy()


def _band(eigenvalues: np.ndarray, tol: float) -> float:
    scale = max(1.0, float(np.max(np.abs(eigenvalues)))) if eigenvalues.size else 1.0
    return tol * scale


def signature(matrix, tol: float = DEFAULT_ZERO_TOL) -> Signature:
    if tol <= 0:
        raise ValueError("tol must be positive")
    evals, _ = as_symmetric(matrix)._eigen
    band = _band(evals, tol)
    positive = int(np.sum(evals > band))
    negative = int(np.sum(evals < -band))
    return Signature(positive, negative, evals.size - positive - negative)


def factorize(matrix, tol: float = DEFAULT_ZERO_TOL) -> SignatureFactorization:
    """Factor ``matrix`` as ``F.T @ I_{p,q,r} @ F``.

    Rows of ``F`` are ``sqrt|lambda_k| * u_k`` for the eigenpairs
    ``(lambda_k, u_k)``: positive ones first in descending order, then negative
    ones in ascending order, then the zero band with unit scale so that ``F``
    stays invertible.
    """
    matrix = as_symmetric(matrix)
    evals, evecs = matrix._eigen
    band = _band(evals, tol)
    idx = np.arange(evals.size)
    pos = idx[evals > band]
    neg = idx[evals < -band][np.argsort(evals[evals < -band], kind="stable")]
    zero = idx[np.abs(evals) <= band]
    order = np.concatenate([pos, neg, zero]).astype(int)
    scale = np.where(np.abs(evals) > band, np.sqrt(np.abs(evals)), 1.0)[order]
    factor = scale[:, None] * evecs[:, order].T
    factor.setflags(write=False)
    fac = SignatureFactorization(Signature(pos.size, neg.size, zero.size), factor, band)

    limit = 1e-10 * (1.0 + float(np.max(np.abs(matrix.entries))))
    err = float(np.max(np.abs(fac.reconstruct() - matrix.entries)))
    if err > limit:
        raise ReconstructionFailure(
            f"F^t I F differs from Z by {err:.3g} (> {limit:.3g}); "
            "near-zero eigenvalues were probably misclassified, adjust tol"
        )
    smin = float(np.linalg.svd(factor, compute_uv=False)[-1])
    if smin <= band:
        raise NumericalFailure(f"factor is numerically singular (sigma_min = {smin:.3g})")
    return fac


def solve_symmetric(matrix, rhs, tol: float = DEFAULT_ZERO_TOL) -> SolveReport:
    """Solve ``matrix @ x = rhs`` through the eigendecomposition.

    Degenerate systems get the minimum-norm least-squares solution; whether it
    actually solves the system is reported in ``consistent``.  One refinement
    step is applied with the same pseudo-inverse, so the solution stays in the
    range of ``matrix``.
    """
    matrix = as_symmetric(matrix)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (matrix.size,):
        raise InvalidMatrix(f"right-hand side has shape {rhs.shape}, expected ({matrix.size},)")
    evals, evecs = matrix._eigen
    keep = np.abs(evals) > _band(evals, tol)
    basis = evecs[:, keep]
    sol = basis @ (basis.T @ rhs / evals[keep])
    # one step of iterative refinement recovers the accuracy lost to rotations
    sol = sol + basis @ (basis.T @ (rhs - matrix.entries @ sol) / evals[keep])
    residual = float(np.linalg.norm(matrix.entries @ sol - rhs))
    consistent = residual <= 1e-8 * (1.0 + float(np.linalg.norm(rhs)))
    return SolveReport(sol, residual, consistent, bool(keep.all()) and consistent)


def inner_product(matrix, left, right) -> float:
    """``left^t Z right`` for the bilinear form of ``matrix``."""
    form = matrix.entries if isinstance(matrix, SymmetricMatrix) else np.asarray(matrix, dtype=float)
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if form.shape != (left.size, right.size):
        raise InvalidMatrix("dimension mismatch in inner product")
    return float(left @ (form @ right))
