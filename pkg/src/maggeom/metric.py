"""Finite metric spaces, similarity matrices and magnitude profiles."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraph, InvalidMetric
from .linalg import DEFAULT_ZERO_TOL, SymmetricMatrix, jacobi_eigh
from .magnitude import magnitude

__all__ = [
    "BLOWUP_THRESHOLD",
    "MagnitudeProfile",
    "MetricSpace",
    "NegativeTypeReport",
    "Pole",
    "is_negative_type",
    "magnitude_profile",
    "path_metric_graph",
    "similarity_matrix",
]

TRIANGLE_SLACK = 1e-12
BLOWUP_THRESHOLD = 1e12
POLE_SCALE_TOL = 1e-9


class MetricSpace:
    """Finite metric space given by its distance matrix."""

    def __init__(self, distances, labels=None):
        dist = np.array(distances, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or dist.shape[0] < 1:
            raise InvalidMetric(f"expected a non-empty square distance matrix, got shape {dist.shape}")
        if not np.all(np.isfinite(dist)):
            raise InvalidMetric("distances must be finite")
        if np.any(np.diag(dist) != 0.0):
            raise InvalidMetric("d(x, x) must be 0")
        if not np.array_equal(dist, dist.T):
            raise InvalidMetric("distance matrix is not symmetric")
        off = ~np.eye(dist.shape[0], dtype=bool)
        if np.any(dist[off] <= 0.0):
            raise InvalidMetric("distinct points must be at positive distance")
        slack = TRIANGLE_SLACK * max(1.0, float(dist.max()))
        # excess[i, j, k] = d_ij - d_ik - d_kj
        excess = dist[:, :, None] - dist[:, None, :] - dist[None, :, :]
        worst = float(excess.max())
        if worst > slack:
            raise InvalidMetric(f"triangle inequality violated by {worst:.3g}")
        dist.setflags(write=False)
        self._distances = dist
        self.labels = list(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != dist.shape[0]:
            raise InvalidMetric("label count does not match point count")

    @classmethod
    def from_points(cls, points, labels=None) -> MetricSpace:
        coords = np.atleast_2d(np.asarray(points, dtype=float))
        diff = coords[:, None, :] - coords[None, :, :]
        return cls(np.sqrt(np.sum(diff * diff, axis=-1)), labels)

    @property
    def distances(self) -> np.ndarray:
        return self._distances

    @property
    def size(self) -> int:
        return self._distances.shape[0]

    def scaled(self, scale: float) -> MetricSpace:
        if not scale > 0:
            raise ValueError("scale must be positive")
        return MetricSpace(scale * self._distances, self.labels)

    def __repr__(self):
        return f"MetricSpace(size={self.size})"


def similarity_matrix(space: MetricSpace, scale: float = 1.0) -> SymmetricMatrix:
    """``exp(-scale * d)`` entrywise; unit diagonal by construction."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    return SymmetricMatrix(np.exp(-scale * space.distances))


@dataclass(frozen=True, eq=False)
class NegativeTypeReport:
    is_negative_type: bool
    gram_min_eigenvalue: float
    embedding: np.ndarray | None
    anchor: int = 0


def is_negative_type(space: MetricSpace, tol: float = DEFAULT_ZERO_TOL, anchor: int = 0) -> NegativeTypeReport:
    """Schoenberg test: does ``(X, sqrt d)`` embed isometrically in Euclidean space?

    Builds the Gram matrix of the putative embedding with the anchor point at
    the origin, ``G_ij = (d_ai + d_aj - d_ij) / 2``; the space is of negative
    type iff ``G`` is positive semidefinite.  On success the rows of
    ``embedding`` are coordinates whose squared Euclidean distances reproduce
    the distances.
    """
    size = space.size
    if not 0 <= anchor < size:
        raise IndexError("anchor out of range")
    dist = space.distances
    rest = [i for i in range(size) if i != anchor]
    if not rest:
        return NegativeTypeReport(True, 0.0, np.zeros((1, 0)), anchor)
    from_anchor = dist[anchor, rest]
    gram = 0.5 * (from_anchor[:, None] + from_anchor[None, :] - dist[np.ix_(rest, rest)])
    evals, evecs = jacobi_eigh(gram)
    lmin = float(evals[-1])
    if lmin < -tol * (1.0 + float(np.max(np.abs(gram)))):
        return NegativeTypeReport(False, lmin, None, anchor)
    keep = evals > tol * max(1.0, float(evals[0]))
    coords = evecs[:, keep] * np.sqrt(evals[keep])
    emb = np.zeros((size, int(keep.sum())))
    emb[rest] = coords
    return NegativeTypeReport(True, lmin, emb, anchor)


@dataclass(frozen=True)
class Pole:
    """A blow-up of the magnitude located between ``scale_low`` and ``scale_high``."""

    scale_low: float
    scale_high: float
    scale: float
    refined: bool


@dataclass(frozen=True, eq=False)
class MagnitudeProfile:
    scales: np.ndarray
    values: np.ndarray  # nan marks a sample where the similarity matrix is singular or Mag blows up
    determinants: np.ndarray
    poles: list[Pole] = field(default_factory=list)


def _det(space: MetricSpace, scale: float) -> float:
    evals, _ = similarity_matrix(space, scale)._eigen
    return float(np.prod(evals))


def _sample(space: MetricSpace, scale: float, tol: float) -> tuple[float, float]:
    sim = similarity_matrix(space, scale)
    evals, _ = sim._eigen
    det = float(np.prod(evals))
    if np.any(np.abs(evals) <= tol * max(1.0, float(np.max(np.abs(evals))))):
        return math.nan, det
    res = magnitude(sim, tol)
    if not res.has_weighting or abs(res.magnitude) > BLOWUP_THRESHOLD:
        return math.nan, det
    return res.magnitude, det


def _bisect_root(space: MetricSpace, lo: float, hi: float, f_lo: float) -> float:
    while hi - lo > POLE_SCALE_TOL:
        mid = 0.5 * (lo + hi)
        f_mid = _det(space, mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def magnitude_profile(
    space: MetricSpace,
    scale_min: float,
    scale_max: float,
    samples: int,
    tol: float = DEFAULT_ZERO_TOL,
    workers: int | None = None,
) -> MagnitudeProfile:
    """Magnitude of the scaled space on a log-uniform grid, with poles located.

    A pole is reported between adjacent samples where the determinant of the
    similarity matrix changes sign, or around a sample where ``|Mag|`` exceeds
    ``BLOWUP_THRESHOLD``.  Sign changes are refined by bisection on the
    determinant to ``1e-9`` in scale.  ``workers`` evaluates samples on a
    thread pool; output order is by scale.
    """
    if not (0 < scale_min < scale_max):
        raise ValueError("need 0 < scale_min < scale_max")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    grid = np.geomspace(scale_min, scale_max, samples)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda scale: _sample(space, scale, tol), grid))
    else:
        rows = [_sample(space, scale, tol) for scale in grid]
    values = np.array([row[0] for row in rows])
    dets = np.array([row[1] for row in rows])

    poles = []
    flagged = set()
    for idx in range(samples - 1):
        if dets[idx] == 0.0 or (dets[idx] > 0) != (dets[idx + 1] > 0):
            root = grid[idx] if dets[idx] == 0.0 else _bisect_root(space, grid[idx], grid[idx + 1], dets[idx])
            poles.append(Pole(float(grid[idx]), float(grid[idx + 1]), float(root), True))
            flagged.update((idx, idx + 1))
    for idx in np.flatnonzero(np.isnan(values)):
        if idx in flagged:
            continue
        lo, hi = grid[max(idx - 1, 0)], grid[min(idx + 1, samples - 1)]
        poles.append(Pole(float(lo), float(hi), float(grid[idx]), False))
    poles.sort(key=lambda pole: pole.scale)
    return MagnitudeProfile(grid, values, dets, poles)


def path_metric_graph(edges, n_vertices: int, labels=None) -> MetricSpace:
    """Shortest-path metric of an unweighted graph on vertices ``0 .. n_vertices-1``."""
    if n_vertices < 1:
        raise InvalidMetric("graph needs at least one vertex")
    dist = np.full((n_vertices, n_vertices), np.inf)
    np.fill_diagonal(dist, 0.0)
    for head, tail in edges:
        head, tail = int(head), int(tail)
        if not (0 <= head < n_vertices and 0 <= tail < n_vertices):
            raise InvalidMetric(f"edge ({head}, {tail}) references a missing vertex")
        if head != tail:
            dist[head, tail] = dist[tail, head] = 1.0
    for via in range(n_vertices):
        dist = np.minimum(dist, dist[:, via, None] + dist[None, via, :])
    if np.isinf(dist).any():
        raise DisconnectedGraph("graph is not connected")
    return MetricSpace(dist, labels)
