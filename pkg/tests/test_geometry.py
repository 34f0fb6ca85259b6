import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from kcoddp.geometry import (
    ComputationalBox,
    InvalidParameter,
    PointConfiguration,
    SpaceTimePoint,
    compute_ordering,
    computational_region,
    eligible_mask,
    region_margin,
    relevant_set_contains,
    sample_poisson_configuration,
)


def test_space_time_point_rejects_non_finite():
    with pytest.raises(InvalidParameter):
        SpaceTimePoint(0.0, np.nan, 1.0)
    assert SpaceTimePoint(1, 2, 3).as_array().tolist() == [1.0, 2.0, 3.0]


def test_box_requires_ordered_bounds():
    with pytest.raises(InvalidParameter):
        ComputationalBox([0, 1], [1, 1])
    box = ComputationalBox([0, 0], [2, 3])
    assert box.volume == 6.0
    assert box.contains([[1, 1], [3, 1]]).tolist() == [True, False]


def test_region_two_dimensional_example():
    # hand arithmetic: 2 * sqrt((1/pi) * (2/10) * ln 100)
    r = 2 * math.sqrt(1 / math.pi * 0.2 * math.log(100))
    box = computational_region([0, 0], [1, 1], alpha=1, lam=10, epsilon=0.01, d=2)
    assert box.margin_r == pytest.approx(1.0829, abs=1e-4)
    assert box.margin_r == pytest.approx(r, rel=1e-14)
    np.testing.assert_allclose(box.lower, [-r, -r])
    np.testing.assert_allclose(box.upper, [1 + r, 1 + r])


def test_region_epsilon_near_one_collapses_to_data_range():
    box = computational_region([0, 0], [1, 2], alpha=1, lam=1, epsilon=1 - 1e-12, d=2)
    np.testing.assert_allclose(box.lower, [0, 0], atol=1e-5)
    np.testing.assert_allclose(box.upper, [1, 2], atol=1e-5)


def test_doubling_lambda_shrinks_margin_by_root_two():
    r1 = region_margin(1.0, 5.0, 0.01, 2)
    r2 = region_margin(1.0, 10.0, 0.01, 2)
    assert r2 == pytest.approx(r1 / math.sqrt(2), rel=1e-13)


@pytest.mark.parametrize("alpha, lam, eps", [(0, 1, 0.1), (1, -1, 0.1), (1, 1, 0.0), (1, 1, 1.0)])
def test_region_rejects_bad_parameters(alpha, lam, eps):
    with pytest.raises(InvalidParameter):
        computational_region([0], [1], alpha, lam, eps)


def test_poisson_zero_intensity_limit_is_empty():
    box = ComputationalBox([0, 0], [1e-12, 1e-12])
    rng = np.random.default_rng(0)
    assert all(len(sample_poisson_configuration(box, 1.0, rng)) == 0 for _ in range(100))


def test_poisson_count_mean_and_variance():
    rng = np.random.default_rng(1)
    box = ComputationalBox([0, 0], [1, 1])
    n = 100_000
    counts = np.array([len(sample_poisson_configuration(box, 2.0, rng)) for _ in range(n)])
    assert abs(counts.mean() - 2.0) < 3 * math.sqrt(2 / n)
    # the sample variance has sd about sqrt((mu + 2 mu^2) / n) for a Poisson count
    assert abs(counts.var() - 2.0) < 3 * math.sqrt((2 + 2 * 4) / n)


def test_poisson_points_uniform_chi_square():
    rng = np.random.default_rng(2)
    box = ComputationalBox([0, 0], [1, 1])
    pts = np.vstack([sample_poisson_configuration(box, 50, rng).points for _ in range(200)])
    assert box.contains(pts).all()
    cells = (pts[:, 0] > 0.5).astype(int) * 2 + (pts[:, 1] > 0.5).astype(int)
    observed = np.bincount(cells, minlength=4)
    assert stats.chisquare(observed).pvalue > 0.01


def test_relevant_set_modes():
    x = SpaceTimePoint(0, 0, 1.5)
    assert relevant_set_contains(x, SpaceTimePoint(5, 5, 1.0), "spacetime")
    assert not relevant_set_contains(x, SpaceTimePoint(0, 0, 2.0), "spacetime")
    assert relevant_set_contains(x, SpaceTimePoint(0, 0, 99.0), "spatial")
    with pytest.raises(InvalidParameter):
        relevant_set_contains(x, x, "bogus")


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_temporal_mode_matches_spacetime(tx, tz):
    x, z = (0.3, -1.0, tx), (2.0, 1.0, tz)
    assert relevant_set_contains(x, z, "temporal") == relevant_set_contains(x, z, "spacetime")


def test_ordering_one_dimensional_example():
    assert compute_ordering([0.0], np.array([[2.0], [1.0], [3.0]]), "spatial").tolist() == [1, 0, 2]


def test_ordering_single_point_and_empty():
    assert compute_ordering([0.0], np.array([[4.0]]), "spatial").tolist() == [0]
    assert compute_ordering([0.0, 0.0, 0.0], np.empty((0, 3))).tolist() == []


def test_ordering_excludes_future_points():
    cfg = PointConfiguration(np.array([[0, 0, 1.0], [0, 0, 2.0]]), 1.0)
    assert compute_ordering(SpaceTimePoint(0, 0, 1.5), cfg, "spacetime").tolist() == [0]


def test_ordering_ties_broken_by_index():
    pts = np.array([[1.0], [-1.0], [1.0]])
    assert compute_ordering([0.0], pts, "spatial").tolist() == [0, 1, 2]


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_ordering_injective_and_permutation_equivariant(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(12, 3))
    x = rng.normal(size=3)
    order = compute_ordering(x, pts)
    assert len(set(order.tolist())) == len(order)
    assert set(order.tolist()) == set(np.flatnonzero(eligible_mask(x, pts)).tolist())
    perm = rng.permutation(len(pts))
    order_p = compute_ordering(x, pts[perm])
    np.testing.assert_array_equal(pts[perm][order_p], pts[order])
    d = np.linalg.norm(pts[order] - x, axis=1)
    assert np.all(np.diff(d) >= 0)


def test_orderings_vary_with_location():
    rng = np.random.default_rng(3)
    box = ComputationalBox([0, 0, 0], [1, 1, 1])
    x1, x2 = np.array([0.2, 0.2, 1.0]), np.array([0.8, 0.7, 1.0])
    differ = 0
    for _ in range(200):
        cfg = sample_poisson_configuration(box, 10, rng)
        if len(cfg) >= 3:
            differ += not np.array_equal(compute_ordering(x1, cfg), compute_ordering(x2, cfg))
    assert differ > 0
