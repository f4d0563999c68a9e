import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import K23_EDGES, LIGHTLIKE, SKEWED, circulant3, pair, random_pd, two_block
from maggeom.analysis import (
    Criterion,
    LowRankClass,
    classify_low_rank,
    entrywise_square,
    hemisphere_monte_carlo,
    negative_type_upper_bound,
    positive_weighting,
    q_spread,
    rank2_equality_example,
    rowmin_obstruction,
    rowsum_obstruction,
    spread_report,
    tensor_bound_check,
    three_point_criterion,
    three_point_margin,
)
from maggeom.errors import (
    DegenerateAngles,
    NotNegativeType,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
    NotUnitDiagonal,
    RankOutOfRange,
    WrongDimension,
    ZeroMagnitude,
)
from maggeom.geometry import Verdict
from maggeom.magnitude import magnitude
from maggeom.metric import MetricSpace, path_metric_graph


_SEEDS = st.integers(0, 2**32 - 1)


def equilateral(size=3):
    return MetricSpace(np.ones((size, size)) - np.eye(size))


# -- positive weighting ----------------------------------------------------------

def test_positive_weighting_identity():
    diag = positive_weighting(np.eye(4))
    assert diag.verdict is Verdict.YES
    assert diag.weighting == pytest.approx(np.ones(4))
    assert Criterion.DIRECT_CHECK in diag.witnesses
    assert diag.consistent


def test_positive_weighting_skewed():
    diag = positive_weighting(SKEWED)
    assert diag.verdict is Verdict.NO
    assert diag.weighting == pytest.approx([-1.25, 1.25, 1.25])
    assert diag.evaluated[Criterion.THREE_POINT] is False
    assert Criterion.ROW_MIN_OBSTRUCTION in diag.witnesses
    assert diag.consistent


def test_positive_weighting_all_ones():
    assert positive_weighting(np.ones((4, 4))).verdict is Verdict.YES


def test_positive_weighting_none():
    diag = positive_weighting(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert diag.verdict is Verdict.NO and diag.weighting is None


def test_positive_weighting_requires_unit_diagonal():
    with pytest.raises(NotUnitDiagonal):
        positive_weighting(2 * np.eye(2))


# -- three point -----------------------------------------------------------------

def test_three_point_examples():
    assert three_point_criterion(circulant3(0.5))
    assert not three_point_criterion(SKEWED)
    assert three_point_margin(SKEWED) == pytest.approx(1 - 1.1)
    assert three_point_criterion(np.eye(3))


def test_three_point_preconditions():
    with pytest.raises(WrongDimension):
        three_point_criterion(np.eye(4))
    with pytest.raises(NotPositiveDefinite):
        three_point_criterion(circulant3(-0.6))


@settings(max_examples=300, deadline=None)
@given(seed=_SEEDS)
def test_three_point_matches_direct_check(seed):
    gram = random_pd(np.random.default_rng(seed), 3, extra=0)
    if np.linalg.eigvalsh(gram)[0] < 1e-6 or abs(three_point_margin(gram)) <= 1e-9:
        return
    direct = positive_weighting(gram).verdict
    assert three_point_criterion(gram) == (direct is Verdict.YES)


# -- obstructions ----------------------------------------------------------------

def test_rowmin_examples():
    assert rowmin_obstruction(SKEWED)
    assert not rowmin_obstruction(np.eye(3))
    assert not rowmin_obstruction(circulant3(0.5))


def test_rowsum_examples():
    assert not rowsum_obstruction(np.eye(3))
    assert not rowsum_obstruction(SKEWED)


def test_rowsum_hypothesis_found_by_search_forces_nonpositive_weight():
    rng = np.random.default_rng(12)
    found = 0
    for _ in range(20000):
        size = int(rng.integers(3, 6))
        # strongly clustered points make row sums large
        vecs = rng.standard_normal((size, size)) * 0.25 + rng.standard_normal(size)
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        gram = vecs @ vecs.T
        np.fill_diagonal(gram, 1.0)
        if np.linalg.eigvalsh(gram)[0] < 1e-6:
            continue
        if rowsum_obstruction(gram):
            found += 1
            assert magnitude(gram).weighting.min() <= 0
    assert found >= 5


@settings(max_examples=300, deadline=None)
@given(size=st.integers(2, 7), seed=_SEEDS)
def test_obstructions_are_one_sided(size, seed):
    gram = random_pd(np.random.default_rng(seed), size, extra=0)
    if np.linalg.eigvalsh(gram)[0] < 1e-6:
        return
    direct = positive_weighting(gram).verdict
    if rowmin_obstruction(gram):
        assert direct is not Verdict.YES
    if rowsum_obstruction(gram):
        assert direct is not Verdict.YES


# -- low rank --------------------------------------------------------------------

def test_low_rank_ones():
    cls = classify_low_rank(np.ones((4, 4)))
    assert cls.kind is LowRankClass.POSITIVE_WEIGHTING and cls.rank == 1
    assert magnitude(np.ones((4, 4))).magnitude == pytest.approx(1.0)
    assert cls.consistent_with_solve


def test_low_rank_rank_one_without_weighting():
    cls = classify_low_rank(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert cls.kind is LowRankClass.NO_WEIGHTING and cls.consistent_with_solve


def test_low_rank_two_block():
    matrix = two_block((2, 2), 0.3)
    cls = classify_low_rank(matrix)
    assert cls.kind is LowRankClass.POSITIVE_WEIGHTING and cls.rank == 2
    assert sorted(map(sorted, cls.blocks)) == [[0, 1], [2, 3]]
    assert cls.off_block_value == pytest.approx(0.3)
    # a constant weight per block solves (2 + 2 * 0.3) * weight = 1
    assert magnitude(matrix).weighting == pytest.approx(np.full(4, 1 / (2 * 1.3)))


def test_low_rank_permuted_two_block():
    perm = np.array([2, 0, 3, 1, 4])
    matrix = two_block((2, 3), -0.5)[np.ix_(perm, perm)]
    assert classify_low_rank(matrix).kind is LowRankClass.POSITIVE_WEIGHTING


def test_low_rank_three_directions_in_plane():
    cls = classify_low_rank(rank2_equality_example([0.0, 1.0, 2.0]))
    assert cls.kind is LowRankClass.NO_WEIGHTING and cls.consistent_with_solve


def test_low_rank_preconditions():
    with pytest.raises(RankOutOfRange):
        classify_low_rank(np.eye(3))
    with pytest.raises(NotPositiveSemidefinite):
        classify_low_rank(circulant3(-0.6))


# -- entrywise square and tensor bound ---------------------------------------------

def test_entrywise_square_examples():
    assert np.array_equal(entrywise_square(np.eye(3)).entries, np.eye(3))
    assert entrywise_square(pair(0.5)).entries == pytest.approx(pair(0.25))
    trio = rank2_equality_example([0, 90, 45], degrees=True)
    expected = np.array([[1, 0, 0.5], [0, 1, 0.5], [0.5, 0.5, 1]])
    assert entrywise_square(trio).entries == pytest.approx(expected, abs=1e-15)


def test_tensor_bound_identity():
    rep = tensor_bound_check(np.eye(4))
    assert rep.mag2 == pytest.approx(4) and rep.rank == 4 and abs(rep.slack) <= 1e-12


def test_tensor_bound_rank2_trio():
    trio = rank2_equality_example([0, 90, 45], degrees=True)
    rep = tensor_bound_check(trio)
    assert rep.rank == 2
    assert rep.mag2 == pytest.approx(2.0, abs=1e-12)
    assert magnitude(entrywise_square(trio)).weighting == pytest.approx([1, 1, 0], abs=1e-12)


def test_tensor_bound_preconditions():
    with pytest.raises(NotPositiveSemidefinite):
        tensor_bound_check(circulant3(-0.6))
    with pytest.raises(NotPositiveDefinite):
        tensor_bound_check(np.ones((3, 3)))


@settings(max_examples=150, deadline=None)
@given(seed=_SEEDS)
def test_tensor_bound_random_pd_strict(seed):
    rep = tensor_bound_check(random_pd(np.random.default_rng(seed), 6))
    assert rep.slack > 0
    assert rep.gram_det >= -1e-9
    assert rep.identity_residual <= 1e-8


@settings(max_examples=150, deadline=None)
@given(size=st.integers(2, 8), seed=_SEEDS)
def test_tensor_bound_equality_only_at_identity(size, seed):
    rng = np.random.default_rng(seed)
    # perturbations of the identity of varying size
    amplitude = 10.0 ** rng.uniform(-8, -1)
    upper = np.triu(rng.uniform(-1, 1, (size, size)) * amplitude, 1)
    matrix = np.eye(size) + upper + upper.T
    if np.linalg.eigvalsh(matrix)[0] <= 1e-6:
        return
    rep = tensor_bound_check(matrix)
    assert rep.slack >= -1e-9
    # near the identity the slack is the sum of squared off-diagonal entries up to
    # fourth order, so at least twice the largest one; it is resolved to a few ulps of size
    if rep.slack <= 1e-9:
        floor = 8 * size * np.finfo(float).eps
        assert np.abs(upper).max() <= math.sqrt(max(rep.slack, 0.0) + floor)


# -- negative type bound ---------------------------------------------------------

def test_bound_equilateral():
    bound = negative_type_upper_bound(equilateral(), 1.0)
    assert bound.mag == pytest.approx(3 / (1 + 2 * math.exp(-1)))
    assert bound.margin == pytest.approx(3 - 3 / (1 + 2 * math.exp(-1)))
    assert bound.size == 3
    assert bound.hook_ok


def test_bound_pair():
    bound = negative_type_upper_bound(MetricSpace([[0, 1.0], [1.0, 0]]), 1.0)
    assert bound.mag == pytest.approx(2 / (1 + math.exp(-1)))
    assert bound.mag < 2


def test_bound_preconditions():
    with pytest.raises(NotNegativeType):
        negative_type_upper_bound(path_metric_graph(K23_EDGES, 5))
    with pytest.raises(WrongDimension):
        negative_type_upper_bound(MetricSpace([[0.0]]))


@settings(max_examples=100, deadline=None)
@given(size=st.integers(2, 6), dim=st.integers(1, 5), seed=_SEEDS)
def test_bound_strict_for_euclidean_clouds(size, dim, seed):
    space = MetricSpace.from_points(np.random.default_rng(seed).uniform(0, 1, (size, dim)))
    for scale in (0.1, 1.0, 10.0):
        bound = negative_type_upper_bound(space, scale)
        assert bound.margin > 0 and bound.hook_ok


# -- spreads -----------------------------------------------------------------------

def test_spread_pair_ln2():
    ln2 = math.log(2)
    rep = spread_report(MetricSpace([[0, ln2], [ln2, 0]]), (1, 2, math.inf), scale=1.0)
    assert rep.spreads == pytest.approx((4 / 3, 4 / 3, 4 / 3))
    assert rep.magnitude == pytest.approx(4 / 3)
    assert abs(rep.barycenter_gap) <= 1e-12


def test_spread_skewed():
    rep = spread_report(SKEWED, (2,))
    assert rep.spreads[0] == pytest.approx(9 / 8)
    assert rep.magnitude == pytest.approx(1.25)
    assert rep.barycenter_gap == pytest.approx(8 / 9 - 0.8)
    assert rep.gap_identity_residual <= 1e-12


def test_spread_identity():
    rep = spread_report(np.eye(3), (0, 1, 2, math.inf))
    assert rep.orders == (0, 1, 2, math.inf)
    assert rep.spreads[2] == pytest.approx(3.0) and rep.magnitude == pytest.approx(3.0)
    assert abs(rep.barycenter_gap) <= 1e-12


def test_spread_zero_magnitude():
    with pytest.raises(ZeroMagnitude):
        spread_report(LIGHTLIKE)


def test_q_spread_branches():
    row_means = SKEWED.mean(axis=1)
    assert q_spread(SKEWED, 0) == pytest.approx(np.mean(1 / row_means))
    assert q_spread(SKEWED, 1) == pytest.approx(np.exp(-np.mean(np.log(row_means))))
    assert q_spread(SKEWED, 2) == pytest.approx(9 / 8)
    assert q_spread(SKEWED, math.inf) == pytest.approx(1 / row_means.max())
    assert q_spread(SKEWED, 0.5) == pytest.approx(np.mean(row_means ** -0.5) ** 2)


@settings(max_examples=200, deadline=None)
@given(size=st.integers(2, 9), seed=_SEEDS)
def test_spread_two_below_magnitude_for_psd(size, seed):
    gram = random_pd(np.random.default_rng(seed), size)
    if np.linalg.cond(gram) > 1e8:
        return
    rep = spread_report(gram, (2,))
    assert rep.spreads[0] <= rep.magnitude + 1e-9 * (1 + rep.magnitude)
    assert rep.barycenter_gap >= -1e-9
    assert rep.gap_identity_residual <= 1e-9 * (1 + abs(rep.barycenter_gap))


@pytest.mark.parametrize("off_value", [0.1, 0.5, -0.3])
def test_spread_circulant_gap_vanishes(off_value):
    rep = spread_report(circulant3(off_value), (2,))
    assert abs(rep.barycenter_gap) <= 1e-12
    assert rep.spreads[0] == pytest.approx(rep.magnitude)


# -- rank-2 equality example ---------------------------------------------------------

def test_rank2_examples():
    trio = rank2_equality_example([0, 120, 240], degrees=True)
    off = trio.entries[~np.eye(3, dtype=bool)]
    assert off == pytest.approx(np.full(6, -0.5))
    assert entrywise_square(trio).entries == pytest.approx(circulant3(0.25))
    assert magnitude(entrywise_square(trio)).magnitude == pytest.approx(3 / 1.5)


def test_rank2_degenerate():
    with pytest.raises(DegenerateAngles):
        rank2_equality_example([0, 180, 45], degrees=True)
    with pytest.raises(WrongDimension):
        rank2_equality_example([0, 1])


@settings(max_examples=100, deadline=None)
@given(angles=st.lists(st.floats(0, 2 * math.pi), min_size=3, max_size=3))
def test_rank2_always_two(angles):
    gaps = [abs(math.sin(angles[first] - angles[second])) for first, second in ((0, 1), (0, 2), (1, 2))]
    if min(gaps) < 1e-3:
        return
    trio = rank2_equality_example(angles)
    assert magnitude(entrywise_square(trio)).magnitude == pytest.approx(2.0, abs=1e-9)
    assert tensor_bound_check(trio).rank == 2


# -- Monte Carlo -------------------------------------------------------------------

def test_monte_carlo_single_trial():
    est = hemisphere_monte_carlo(3, 1, rng=1)
    assert est.frequency in (0.0, 1.0)


def test_monte_carlo_seeded_is_deterministic():
    assert hemisphere_monte_carlo(2, 5000, rng=9) == hemisphere_monte_carlo(2, 5000, rng=9)


def test_monte_carlo_batches_do_not_change_count_distribution():
    est = hemisphere_monte_carlo(2, 20000, rng=4, batch=777)
    assert abs(est.frequency - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / 20000)


def test_monte_carlo_rejects_bad_arguments():
    with pytest.raises(ValueError):
        hemisphere_monte_carlo(1, 10)
    with pytest.raises(ValueError):
        hemisphere_monte_carlo(2, 0)
