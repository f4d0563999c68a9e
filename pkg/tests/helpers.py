"""Random generators and small fixtures shared by the test modules."""

import numpy as np

from maggeom.linalg import SymmetricMatrix

SKEWED = np.array([[1.0, 0.9, 0.9], [0.9, 1.0, 0.7], [0.9, 0.7, 1.0]])
LIGHTLIKE = np.array([[1.0, 0.75, 0.75], [0.75, 1.0, 0.0], [0.75, 0.0, 1.0]])
K23_EDGES = [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]
LOG_SQRT2 = 0.5 * np.log(2.0)


def pair(value):
    return np.array([[1.0, value], [value, 1.0]])


def circulant3(value):
    return np.array([[1.0, value, value], [value, 1.0, value], [value, value, 1.0]])


def random_pd(rng, size, extra=None):
    """Gram matrix of ``size`` random unit vectors in dimension >= size (positive definite a.s.)."""
    dim = size + (rng.integers(0, 4) if extra is None else extra)
    vecs = rng.standard_normal((size, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    gram = vecs @ vecs.T
    np.fill_diagonal(gram, 1.0)
    return gram


def random_indefinite(rng, size):
    """Unit-diagonal symmetric matrix with at least one negative eigenvalue."""
    while True:
        raw = rng.uniform(-1.0, 1.0, (size, size)) * rng.uniform(0.5, 1.5)
        upper = np.triu(raw, 1)
        matrix = upper + upper.T + np.eye(size)
        if np.linalg.eigvalsh(matrix)[0] < -1e-3:
            return matrix


def well_conditioned(matrix, mag_floor=1e-3, cond_cap=1e8):
    """True when the matrix is safely invertible with magnitude bounded away from 0."""
    evals = np.linalg.eigvalsh(matrix)
    if np.min(np.abs(evals)) * cond_cap < np.max(np.abs(evals)):
        return False
    return abs(np.linalg.inv(matrix).sum()) > mag_floor


def random_invertible(rng, size, kind):
    gen = random_pd if kind == "pd" else random_indefinite
    while True:
        matrix = gen(rng, size)
        if well_conditioned(matrix):
            return matrix


def random_psd_rank(rng, size, rank):
    """PSD unit-diagonal matrix of the given rank whose entrywise square is comfortably positive definite."""
    while True:
        vecs = rng.standard_normal((size, rank))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        gram = vecs @ vecs.T
        np.fill_diagonal(gram, 1.0)
        if np.linalg.cond(gram * gram) < 1e6:
            return gram


def two_block(sizes, off_value):
    """Two-block matrix: ones on the diagonal blocks, a constant off-block."""
    total = sum(sizes)
    matrix = np.full((total, total), float(off_value))
    start = 0
    for block in sizes:
        matrix[start:start + block, start:start + block] = 1.0
        start += block
    return matrix


def sym(matrix):
    return SymmetricMatrix(matrix)
