"""Circumsphere certificates for unit-diagonal symmetric matrices.

Factor ``Z = F^t I_{p,q,r} F`` and take the columns of ``F`` as points.
Because ``Z_ii = 1``, their nondegenerate parts lie on the unit quasi-sphere
of R^{p,q}.  The affine hull of the points cuts that quasi-sphere in a smaller
quasi-sphere, with center ``F a`` for affine coordinates ``a`` (summing to 1)
and radial scalar square ``rss``; then ``Mag Z = 1 / (1 - rss)``.  The sphere
through the origin and all points has center ``F w / 2`` for a weighting
``w`` and radial scalar square ``Mag Z / 4``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoWeighting, NotPositiveDefinite, NumericalFailure
from .linalg import (
    DEFAULT_ZERO_TOL,
    Signature,
    SignatureFactorization,
    SymmetricMatrix,
    factorize,
    signature,
    solve_symmetric,
)
from .magnitude import magnitude, require_unit_diagonal

__all__ = [
    "AugmentedSphereCertificate",
    "CausalClass",
    "CertificateCheck",
    "HULL_STRICTNESS",
    "LIGHTLIKE_BAND",
    "SphereCertificate",
    "Verdict",
    "augmented_circumsphere",
    "center_in_convex_hull",
    "circumsphere_certificate",
    "verify_certificate",
]

#: ``|Mag| <= LIGHTLIKE_BAND * size`` is classified as lightlike.
LIGHTLIKE_BAND = 1e-10
#: Coefficients above this count as strictly positive.
HULL_STRICTNESS = 1e-10


class CausalClass(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"
    NO_WEIGHTING = "no_weighting"


class Verdict(enum.Enum):
    """Three-valued answer for strict inequalities evaluated in floating point."""

    YES = "yes"
    NO = "no"
    BOUNDARY = "boundary"

    def __bool__(self):
        return self is Verdict.YES


def strict_positivity(values, strictness: float = HULL_STRICTNESS) -> Verdict:
    values = np.asarray(values)
    if np.all(values > strictness):
        return Verdict.YES
    if np.any(values < -strictness):
        return Verdict.NO
    return Verdict.BOUNDARY


@dataclass(frozen=True, eq=False)
class SphereCertificate:
    """Witness for ``Mag Z = 1 / (1 - rss)``.

    Sphere fields (``affine_coords``, ``center``, ``radial_scalar_square``, ``curvature``)
    are ``None`` for the lightlike and no-weighting classes, where the affine
    section is degenerate or passes through the origin.  ``curvature`` is the
    sectional curvature K = 1/rss of the section (``inf`` when rss is 0).
    """

    causal_class: CausalClass
    magnitude: float | None
    weighting: np.ndarray | None
    signature: Signature
    affine_coords: np.ndarray | None = None
    center: np.ndarray | None = None
    radial_scalar_square: float | None = None
    curvature: float | None = None
    equidistance_residual: float = 0.0

    @property
    def has_sphere(self) -> bool:
        return self.affine_coords is not None

    @property
    def magnitude_from_radius(self) -> float | None:
        if self.radial_scalar_square is None:
            return None
        return 1.0 / (1.0 - self.radial_scalar_square)


@dataclass(frozen=True, eq=False)
class AugmentedSphereCertificate:
    center: np.ndarray
    radial_scalar_square: float
    equidistance_residual: float
    bisector_residual: float

    @property
    def magnitude(self) -> float:
        return 4.0 * self.radial_scalar_square


@dataclass(frozen=True)
class CertificateCheck:
    affine_residual: float
    equidistance_residual: float
    radius_residual: float
    magnitude_residual: float
    passed: bool

    @property
    def max_residual(self) -> float:
        return max(
            self.affine_residual,
            self.equidistance_residual,
            self.radius_residual,
            self.magnitude_residual,
        )


def _classify(mag, size: int) -> CausalClass:
    if not mag.has_weighting:
        return CausalClass.NO_WEIGHTING
    if abs(mag.magnitude) <= LIGHTLIKE_BAND * size:
        return CausalClass.LIGHTLIKE
    return CausalClass.SPACELIKE if mag.magnitude > 0 else CausalClass.TIMELIKE


def _equidistant_affine_point(matrix: SymmetricMatrix, tol: float) -> tuple[np.ndarray, float]:
    # sum a = 1 and <a - e_i, a - e_i>_Z independent of i  <=>  Z a + s 1 = 0,
    # and then <a - e_i, a - e_i>_Z = a^t Z a - 2 (Z a)_i + 1 = 1 + s for every i
    size = matrix.size
    bordered = np.ones((size + 1, size + 1))
    bordered[:size, :size] = matrix.entries
    bordered[size, size] = 0.0
    rhs = np.zeros(size + 1)
    rhs[size] = 1.0
    report = solve_symmetric(bordered, rhs, tol)
    if not report.consistent:
        raise NumericalFailure(
            f"equidistance system inconsistent (residual {report.residual_norm:.3g})"
        )
    return report.solution[:size], 1.0 + float(report.solution[size])


def circumsphere_certificate(
    matrix, tol: float = DEFAULT_ZERO_TOL, factorization: SignatureFactorization | None = None
) -> SphereCertificate:
    matrix = require_unit_diagonal(matrix)
    mag = magnitude(matrix, tol)
    cls = _classify(mag, matrix.size)
    if cls in (CausalClass.NO_WEIGHTING, CausalClass.LIGHTLIKE):
        return SphereCertificate(cls, mag.magnitude, mag.weighting, signature(matrix, tol))

    fac = factorization if factorization is not None else factorize(matrix, tol)
    coords, rss = _equidistant_affine_point(matrix, tol)
    pts = fac.nondegenerate_part
    eta = fac.eta[: fac.signature.rank]
    center = pts @ coords
    # squared distances are recomputed in the factor space as the check;
    # their mean cancels too badly to serve as the value when Mag is large
    sq = eta @ (center[:, None] - pts) ** 2
    coords.setflags(write=False)
    center.setflags(write=False)
    return SphereCertificate(
        causal_class=cls,
        magnitude=mag.magnitude,
        weighting=mag.weighting,
        signature=fac.signature,
        affine_coords=coords,
        center=center,
        radial_scalar_square=rss,
        curvature=1.0 / rss if rss != 0.0 else math.inf,
        equidistance_residual=float(np.max(np.abs(sq - rss))),
    )


def augmented_circumsphere(
    matrix, tol: float = DEFAULT_ZERO_TOL, factorization: SignatureFactorization | None = None
) -> AugmentedSphereCertificate:
    """Quasi-sphere through the origin and all points, centered at ``F w / 2``."""
    matrix = require_unit_diagonal(matrix)
    mag = magnitude(matrix, tol)
    if not mag.has_weighting:
        raise NoWeighting("no magnitude weighting; the augmented circumsphere is undefined")
    fac = factorization if factorization is not None else factorize(matrix, tol)
    eta = fac.eta
    factor = fac.factor
    center = 0.5 * (factor @ mag.weighting)
    # F^t I F matches Z only to rounding, which large weightings amplify;
    # one correction against the factor-space residual keeps center = F w' / 2
    # for a weighting w' that also satisfies the bisector system in F
    resid = 1.0 - 2.0 * (factor.T @ (eta * center))
    step = solve_symmetric(matrix, resid, tol).solution
    if step is not None:
        center = center + 0.5 * (factor @ step)
    r2 = float(eta @ (center * center))
    sq = eta @ (center[:, None] - factor) ** 2
    bisector = factor.T @ (eta * center) - 0.5
    center.setflags(write=False)
    return AugmentedSphereCertificate(
        center=center,
        radial_scalar_square=r2,
        equidistance_residual=float(np.max(np.abs(sq - r2))),
        bisector_residual=float(np.max(np.abs(bisector))),
    )


def center_in_convex_hull(matrix, tol: float = DEFAULT_ZERO_TOL) -> Verdict:
    """Whether the circumcenter lies in the open simplex spanned by the points (``Z`` positive definite)."""
    matrix = require_unit_diagonal(matrix)
    sig = signature(matrix, tol)
    if sig.positive != matrix.size:
        raise NotPositiveDefinite(f"signature {tuple(sig)} is not positive definite")
    cert = circumsphere_certificate(matrix, tol)
    by_center = strict_positivity(cert.affine_coords)
    by_weighting = strict_positivity(cert.weighting)
    return by_center if by_center is by_weighting else Verdict.BOUNDARY


def verify_certificate(matrix, cert: SphereCertificate, tol: float = 1e-8) -> CertificateCheck:
    """Recheck a certificate against ``Z`` alone, without any factorization.

    For affine coordinates ``a`` the squared distance from the center to point
    i is ``<a - e_i, a - e_i>_Z = a^t Z a - 2 (Z a)_i + 1``.
    """
    matrix = require_unit_diagonal(matrix)
    mag = magnitude(matrix)
    if not cert.has_sphere:
        ok = _classify(mag, matrix.size) is cert.causal_class
        return CertificateCheck(0.0, 0.0, 0.0, 0.0, ok)

    coords = np.asarray(cert.affine_coords)
    image = matrix.entries @ coords
    sq = float(coords @ image) - 2.0 * image + np.diag(matrix.entries)
    rss = cert.radial_scalar_square
    if mag.has_weighting:
        mag_res = abs(mag.magnitude - 1.0 / (1.0 - rss)) / (1.0 + abs(mag.magnitude))
    else:
        mag_res = math.inf
    residuals = (
        abs(float(np.sum(coords)) - 1.0),
        float(np.max(sq) - np.min(sq)),
        float(np.max(np.abs(sq - rss))),
        mag_res,
    )
    return CertificateCheck(*residuals, passed=max(residuals) <= tol * (1.0 + abs(rss)))
