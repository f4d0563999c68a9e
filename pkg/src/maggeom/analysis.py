"""Results built on the circumsphere picture.

Positive-weighting criteria, the entrywise-square bound ``Mag Z^(2) <= rank Z``
and its bordered-Gram determinant identity, the bound of the magnitude by the
point count for negative-type spaces, Q-spreads, and the hemisphere Monte Carlo experiment.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateAngles,
    NoWeighting,
    NotNegativeType,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
    NumericalFailure,
    RankOutOfRange,
    WrongDimension,
    ZeroMagnitude,
)
from .geometry import HULL_STRICTNESS, LIGHTLIKE_BAND, Verdict, strict_positivity
from .linalg import DEFAULT_ZERO_TOL, SymmetricMatrix, as_symmetric, factorize, signature
from .magnitude import magnitude, require_unit_diagonal
from .metric import MetricSpace, is_negative_type, similarity_matrix

__all__ = [
    "Criterion",
    "LowRankClass",
    "LowRankClassification",
    "MonteCarloEstimate",
    "NegativeTypeBound",
    "PositiveWeightingDiagnosis",
    "SpreadReport",
    "TensorBoundReport",
    "classify_low_rank",
    "entrywise_square",
    "hemisphere_monte_carlo",
    "negative_type_upper_bound",
    "positive_weighting",
    "q_spread",
    "rank2_equality_example",
    "rowmin_obstruction",
    "rowsum_obstruction",
    "spread_report",
    "tensor_bound_check",
    "three_point_criterion",
    "three_point_margin",
]

OBSTRUCTION_SLACK = 1e-12
RANK1_TOL = 1e-10
COLUMN_GROUP_TOL = 1e-9


class Criterion(enum.Enum):
    DIRECT_CHECK = "direct_check"
    THREE_POINT = "three_point"
    ROW_MIN_OBSTRUCTION = "rowmin_obstruction"
    ROW_SUM_OBSTRUCTION = "rowsum_obstruction"


@dataclass(frozen=True, eq=False)
class PositiveWeightingDiagnosis:
    """Positivity of the weighting, with the criteria that could be evaluated.

    ``evaluated`` maps each applicable criterion to its outcome; ``witnesses``
    holds the ones that fired (direct check or three-point test saying yes,
    an obstruction saying no).  ``consistent`` is False if any applicable
    criterion contradicts the direct check.
    """

    verdict: Verdict
    witnesses: frozenset
    evaluated: dict
    weighting: np.ndarray | None
    consistent: bool


def _require_pd(matrix: SymmetricMatrix, tol: float) -> None:
    sig = signature(matrix, tol)
    if sig.positive != matrix.size:
        raise NotPositiveDefinite(f"signature {tuple(sig)} is not positive definite")


def three_point_margin(matrix) -> float:
    """``1 - max_j (Z_ij + Z_jk - Z_ik)`` over the three choices of middle index j."""
    ent = as_symmetric(matrix).entries
    worst = max(
        ent[1, 0] + ent[0, 2] - ent[1, 2],
        ent[0, 1] + ent[1, 2] - ent[0, 2],
        ent[0, 2] + ent[2, 1] - ent[0, 1],
    )
    return 1.0 - float(worst)


def three_point_criterion(matrix, tol: float = DEFAULT_ZERO_TOL) -> bool:
    """For 3x3 positive definite ``Z``: positive weighting iff every triangle test is < 1.

    The three points lie on a circle; the center is inside their triangle
    exactly when the triangle is acute.
    """
    matrix = require_unit_diagonal(matrix)
    if matrix.size != 3:
        raise WrongDimension(f"three-point criterion needs a 3x3 matrix, got size {matrix.size}")
    _require_pd(matrix, tol)
    return three_point_margin(matrix) > 0.0


def _inverse_magnitude(matrix: SymmetricMatrix, tol: float) -> float:
    _require_pd(matrix, tol)
    res = magnitude(matrix, tol)
    if not res.has_weighting:
        raise NoWeighting("matrix admits no magnitude weighting")
    return 1.0 / res.magnitude


def _rowmin(entries: np.ndarray, inv_mag: float) -> bool:
    # boundary hits count as obstructions
    return bool(np.any(np.all(entries >= inv_mag - OBSTRUCTION_SLACK, axis=1)))


def _rowsum(entries: np.ndarray, inv_mag: float) -> bool:
    lhs = 2.0 / entries.shape[0] * entries.sum(axis=1) - 1.0
    return bool(np.all(lhs >= inv_mag - OBSTRUCTION_SLACK))


def rowmin_obstruction(matrix, tol: float = DEFAULT_ZERO_TOL) -> bool:
    """True if some row has every entry ``>= 1/Mag``; then no weighting is positive."""
    matrix = require_unit_diagonal(matrix)
    return _rowmin(matrix.entries, _inverse_magnitude(matrix, tol))


def rowsum_obstruction(matrix, tol: float = DEFAULT_ZERO_TOL) -> bool:
    """True if ``(2/size) sum_k Z_ik - 1 >= 1/Mag`` for every i; then no weighting is positive."""
    matrix = require_unit_diagonal(matrix)
    return _rowsum(matrix.entries, _inverse_magnitude(matrix, tol))


def positive_weighting(matrix, tol: float = DEFAULT_ZERO_TOL) -> PositiveWeightingDiagnosis:
    matrix = require_unit_diagonal(matrix)
    res = magnitude(matrix, tol)
    if not res.has_weighting:
        evaluated = {Criterion.DIRECT_CHECK: Verdict.NO}
        return PositiveWeightingDiagnosis(Verdict.NO, frozenset(), evaluated, None, True)

    direct = strict_positivity(res.weighting, HULL_STRICTNESS)
    evaluated = {Criterion.DIRECT_CHECK: direct}
    witnesses = {Criterion.DIRECT_CHECK} if direct is Verdict.YES else set()
    consistent = True

    if signature(matrix, tol).positive == matrix.size:
        inv = 1.0 / res.magnitude
        rowmin = _rowmin(matrix.entries, inv)
        rowsum = _rowsum(matrix.entries, inv)
        evaluated[Criterion.ROW_MIN_OBSTRUCTION] = rowmin
        evaluated[Criterion.ROW_SUM_OBSTRUCTION] = rowsum
        for crit, fired in ((Criterion.ROW_MIN_OBSTRUCTION, rowmin), (Criterion.ROW_SUM_OBSTRUCTION, rowsum)):
            if fired:
                witnesses.add(crit)
                consistent &= direct is not Verdict.YES
        if matrix.size == 3:
            acute = three_point_margin(matrix) > 0.0
            evaluated[Criterion.THREE_POINT] = acute
            if acute:
                witnesses.add(Criterion.THREE_POINT)
            if direct is not Verdict.BOUNDARY:
                consistent &= acute == (direct is Verdict.YES)

    return PositiveWeightingDiagnosis(direct, frozenset(witnesses), evaluated, res.weighting, consistent)


# -- low rank ---------------------------------------------------------------

class LowRankClass(enum.Enum):
    NO_WEIGHTING = "no_weighting"
    POSITIVE_WEIGHTING = "positive_weighting"


@dataclass(frozen=True, eq=False)
class LowRankClassification:
    kind: LowRankClass
    rank: int
    blocks: list | None
    off_block_value: float | None
    consistent_with_solve: bool


def _group_columns(points: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i in range(points.shape[1]):
        for group in groups:
            if np.max(np.abs(points[:, i] - points[:, group[0]])) <= tol:
                group.append(i)
                break
        else:
            groups.append([i])
    return groups


def classify_low_rank(matrix, tol: float = DEFAULT_ZERO_TOL) -> LowRankClassification:
    """Decide weighting existence for PSD unit-diagonal ``Z`` of rank 1 or 2.

    Rank 1 has a weighting only for the all-ones matrix.  Rank 2 has one iff
    the points take exactly two distinct values, i.e. ``Z`` is a two-block
    matrix up to simultaneous permutation; the weighting is then positive.
    """
    matrix = require_unit_diagonal(matrix)
    sig = signature(matrix, tol)
    if sig.negative:
        raise NotPositiveSemidefinite(f"signature {tuple(sig)} has negative eigenvalues")
    if sig.positive not in (1, 2):
        raise RankOutOfRange(f"rank {sig.positive} is not 1 or 2")

    blocks = None
    off_block = None
    if sig.positive == 1:
        positive = bool(np.all(np.abs(matrix.entries - 1.0) <= RANK1_TOL))
        if positive:
            blocks = [list(range(matrix.size))]
    else:
        groups = _group_columns(factorize(matrix, tol).nondegenerate_part, COLUMN_GROUP_TOL)
        positive = len(groups) == 2
        if positive:
            blocks = groups
            off_block = float(matrix.entries[groups[0][0], groups[1][0]])
    kind = LowRankClass.POSITIVE_WEIGHTING if positive else LowRankClass.NO_WEIGHTING

    res = magnitude(matrix, tol)
    agrees = res.has_weighting == positive
    if positive and res.has_weighting:
        agrees &= bool(np.all(res.weighting > HULL_STRICTNESS))
    return LowRankClassification(kind, sig.positive, blocks, off_block, agrees)


# -- entrywise square bound ----------------------------------------------------

def entrywise_square(matrix) -> SymmetricMatrix:
    return SymmetricMatrix(as_symmetric(matrix).entries ** 2)


@dataclass(frozen=True)
class TensorBoundReport:
    """``Mag Z^(2) <= rank Z`` together with the bordered Gram determinant.

    ``gram_det`` is ``det [[rank, 1^t], [1, Z^(2)]]`` computed by LU,
    independent of the magnitude solve; it equals ``det(Z^(2)) * slack``.
    """

    mag2: float
    rank: int
    slack: float
    gram_det: float
    det_z2: float
    identity_residual: float


def tensor_bound_check(matrix, tol: float = DEFAULT_ZERO_TOL) -> TensorBoundReport:
    matrix = require_unit_diagonal(matrix)
    sig = signature(matrix, tol)
    if sig.negative:
        raise NotPositiveSemidefinite(f"Z has signature {tuple(sig)}; it must be positive semidefinite")
    squared = entrywise_square(matrix)
    if signature(squared, tol).positive != matrix.size:
        raise NotPositiveDefinite("Z^(2) is not positive definite")
    mag2 = magnitude(squared, tol).magnitude
    rank = sig.positive
    size = matrix.size
    gram = np.empty((size + 1, size + 1))
    gram[0, 0] = rank
    gram[0, 1:] = gram[1:, 0] = 1.0
    gram[1:, 1:] = squared.entries
    gram_det = float(np.linalg.det(gram))
    det_z2 = float(np.linalg.det(squared.entries))
    residual = abs(gram_det - det_z2 * (rank - mag2)) / (abs(det_z2) * rank)
    return TensorBoundReport(mag2, rank, rank - mag2, gram_det, det_z2, residual)


@dataclass(frozen=True)
class NegativeTypeBound:
    mag: float
    size: int
    margin: float
    hook_residual: float

    @property
    def hook_ok(self) -> bool:
        # exp(-s d) vs exp(-s d / 2)^2 agree to rounding, not bit for bit
        return self.hook_residual <= 4 * np.finfo(float).eps


def negative_type_upper_bound(space: MetricSpace, scale: float = 1.0, tol: float = DEFAULT_ZERO_TOL) -> NegativeTypeBound:
    """Strict bound ``Mag < size`` for a scaled negative-type space with at least two points."""
    if space.size < 2:
        raise WrongDimension("the strict bound needs at least two points")
    if not is_negative_type(space, tol).is_negative_type:
        raise NotNegativeType("metric space is not of negative type")
    sim = similarity_matrix(space, scale)
    half = similarity_matrix(space, scale / 2)
    hook = float(np.max(np.abs(sim.entries - half.entries ** 2)))
    res = magnitude(sim, tol)
    if not res.has_weighting:
        raise NoWeighting("similarity matrix admits no weighting")
    return NegativeTypeBound(res.magnitude, space.size, space.size - res.magnitude, hook)


# -- spreads ---------------------------------------------------------------------

def q_spread(matrix, order: float) -> float:
    """Q-spread: a power mean of the row averages of ``Z``."""
    row_means = as_symmetric(matrix).entries.mean(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        if order == 1:
            return float(np.prod(row_means ** (-1.0 / row_means.size)))
        if math.isinf(order):
            return float(np.min(1.0 / row_means))
        return float(np.mean(row_means ** (order - 1.0)) ** (1.0 / (1.0 - order)))


@dataclass(frozen=True, eq=False)
class SpreadReport:
    orders: tuple
    spreads: tuple
    magnitude: float
    barycenter_gap: float
    gap_identity: float
    gap_identity_residual: float


def spread_report(source, orders=(0.0, 1.0, 2.0, math.inf), scale: float = 1.0, tol: float = DEFAULT_ZERO_TOL) -> SpreadReport:
    """Spreads plus the squared barycenter-to-circumcenter distance.

    ``source`` is a :class:`MetricSpace` (scaled by ``scale``) or a
    unit-diagonal matrix.  The gap is measured as ``<u, u>_Z`` with
    ``u = 1/size - w/Mag`` and compared with ``sum Z / size^2 - 1/Mag``.
    """
    if isinstance(source, MetricSpace):
        matrix = similarity_matrix(source, scale)
    else:
        matrix = require_unit_diagonal(source)
    res = magnitude(matrix, tol)
    if not res.has_weighting:
        raise NoWeighting("matrix admits no magnitude weighting")
    if abs(res.magnitude) <= LIGHTLIKE_BAND * matrix.size:
        raise ZeroMagnitude("magnitude is zero; the circumcenter is undefined")
    size = matrix.size
    offset = np.full(size, 1.0 / size) - res.weighting / res.magnitude
    gap = float(offset @ (matrix.entries @ offset))
    identity = float(matrix.entries.sum()) / size**2 - 1.0 / res.magnitude
    orders = tuple(float(order) for order in orders)
    return SpreadReport(
        orders,
        tuple(q_spread(matrix, order) for order in orders),
        res.magnitude,
        gap,
        identity,
        abs(gap - identity),
    )


# -- examples ----------------------------------------------------------------------

def rank2_equality_example(angles, degrees: bool = False) -> SymmetricMatrix:
    """Gram matrix of three unit vectors in the plane at the given angles.

    It has rank 2 and ``Mag Z^(2) = 2``: equality in the entrywise-square bound
    for a matrix other than the identity.
    """
    theta = np.asarray(angles, dtype=float)
    if theta.shape != (3,):
        raise WrongDimension("need exactly three angles")
    if degrees:
        theta = np.radians(theta)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        if abs(math.sin(theta[i] - theta[j])) <= 1e-8:
            raise DegenerateAngles("angles must be pairwise distinct modulo pi")
    vecs = np.stack([np.cos(theta), np.sin(theta)])
    gram = SymmetricMatrix(vecs.T @ vecs)
    res = magnitude(entrywise_square(gram))
    if not res.has_weighting or abs(res.magnitude - 2.0) > 1e-9:
        raise NumericalFailure(f"Mag Z^(2) = {res.magnitude}, expected 2; angles too close")
    return gram


@dataclass(frozen=True)
class MonteCarloEstimate:
    hits: int
    trials: int

    @property
    def frequency(self) -> float:
        return self.hits / self.trials

    @property
    def standard_error(self) -> float:
        freq = self.frequency
        return math.sqrt(freq * (1.0 - freq) / self.trials)


def hemisphere_monte_carlo(dim: int, trials: int, rng=None, batch: int = 50_000) -> MonteCarloEstimate:
    """Frequency with which dim+1 uniform points on the unit sphere of R^dim surround the center.

    The origin is inside the simplex iff its (unique) affine coordinates with
    respect to the points are all positive.
    """
    if dim < 2 or trials < 1:
        raise ValueError("need dim >= 2 and trials >= 1")
    rng = np.random.default_rng(rng)
    hits = 0
    rhs = np.zeros(dim + 1)
    rhs[dim] = 1.0
    done = 0
    while done < trials:
        count = min(batch, trials - done)
        pts = rng.standard_normal((count, dim, dim + 1))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        system = np.concatenate([pts, np.ones((count, 1, dim + 1))], axis=1)
        coef = np.linalg.solve(system, np.broadcast_to(rhs, (count, dim + 1))[..., None])[..., 0]
        hits += int(np.count_nonzero(np.all(coef > 0, axis=1)))
        done += count
    return MonteCarloEstimate(hits, trials)
