import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kcoddp.geometry import InvalidParameter
from kcoddp.oddp import (
    StickState,
    TruncationBoundInput,
    sample_sticks,
    smallest_N_for_bound,
    stick_weights,
    tail_moment_T,
    tail_moment_U,
    truncation_bound,
    weights_for_ordering,
)


def test_stick_state_validation():
    with pytest.raises(InvalidParameter):
        StickState([0.5, 1.0], 1.0)
    with pytest.raises(InvalidParameter):
        StickState([0.5], 0.0)


def test_weights_identity_ordering():
    w = weights_for_ordering(StickState([0.5, 0.5, 0.5], 1.0), [0, 1, 2], 3)
    np.testing.assert_allclose(w, [0.5, 0.25, 0.125], rtol=0, atol=1e-15)


def test_weights_permuted_ordering():
    w = weights_for_ordering(StickState([0.2, 0.6, 0.4], 1.0), [1, 0, 2], 3)
    np.testing.assert_allclose(w, [0.6, 0.08, 0.128], rtol=1e-14)


def test_first_stick_exhausted():
    w = weights_for_ordering(StickState([1 - 1e-12, 0.5, 0.5], 1.0), [0, 1, 2], 3)
    assert w[0] == pytest.approx(1.0)
    assert np.all(w[1:] < 1e-11)


def test_weights_k_too_large():
    with pytest.raises(IndexError):
        weights_for_ordering(StickState([0.5, 0.5], 1.0), [0, 1], 3)


@given(arrays(float, st.integers(1, 40), elements=st.floats(1e-6, 1 - 1e-6)))
def test_weights_positive_with_partial_sums_at_most_one(V):
    w = stick_weights(V)
    assert np.all(w > 0)
    # the leftover stick can fall below double resolution, so the sum may round to 1
    assert np.all(np.cumsum(w) <= 1.0 + 1e-12)
    # 1 - sum p_i equals the remaining stick prod (1 - V_i)
    assert 1 - w.sum() == pytest.approx(np.prod(1 - V), abs=1e-12)


def test_tail_moments_trivial_cases():
    for a in (0.3, 1.0, 7.0):
        assert tail_moment_T(1, 2, a) == 1.0
        assert tail_moment_U(1, 1, a) == pytest.approx(1.0, rel=1e-14)
    assert tail_moment_T(3, 1, 1.0) == 0.25
    assert tail_moment_T(2, 2, 2.0) == 0.5
    assert tail_moment_U(1, 2, 1.0) == pytest.approx(0.5, rel=1e-14)
    assert tail_moment_U(3, 2, 1.0) == pytest.approx(0.5 / 9, rel=1e-14)


def test_tail_moment_U_large_alpha_is_finite():
    assert math.isfinite(tail_moment_U(2, 2, 1e6))


@pytest.mark.parametrize("N, r, alpha, closed", [(3, 1, 1.0, tail_moment_T), (2, 2, 2.0, tail_moment_T),
                                                  (1, 2, 1.0, tail_moment_U), (3, 2, 1.0, tail_moment_U)])
def test_tail_moments_monte_carlo(N, r, alpha, closed):
    rng = np.random.default_rng(10)
    K, reps = 200, 200_000
    p = stick_weights(sample_sticks(alpha, (reps, K), rng))
    if closed is tail_moment_T:
        # mass beyond atom N-1 is exactly the leftover stick, so no truncation error
        est = np.prod(1 - sample_sticks(alpha, (reps, N - 1), rng), axis=1) ** r if N > 1 else np.ones(reps)
    else:
        est = (p[:, N - 1:] ** r).sum(axis=1)
    se = est.std(ddof=1) / math.sqrt(reps)
    assert abs(est.mean() - closed(N, r, alpha)) < 3 * se + (alpha / (alpha + 1)) ** K


def test_truncation_bound_example():
    expected = 4 * (1 / 3) ** 10 + 2 * math.sqrt(2 / math.pi) * (1 / 2) ** 10
    assert truncation_bound(M=1, n=1, alpha=1, N=10) == pytest.approx(expected, rel=1e-15)
    assert truncation_bound(TruncationBoundInput(1, 1, 1, 10)) == pytest.approx(1.626e-3, abs=5e-7)


def test_truncation_bound_shape():
    b = [truncation_bound(M=1, n=1, alpha=2, N=N) for N in range(1, 60)]
    assert np.all(np.diff(b) < 0)
    assert b[-1] < 1e-9
    assert truncation_bound(M=1, n=2, alpha=1, N=5) == pytest.approx(2 * truncation_bound(M=1, n=1, alpha=1, N=5))
    for key, lo, hi in [("alpha", 0.5, 2.0), ("M", 1.0, 2.0), ("n", 1, 3)]:
        base = dict(M=1.0, n=1, alpha=1.0, N=7)
        assert truncation_bound(**{**base, key: lo}) < truncation_bound(**{**base, key: hi})


def test_truncation_bound_input_validation():
    with pytest.raises(InvalidParameter):
        TruncationBoundInput(1, 0, 1, 10)


def test_smallest_N():
    assert smallest_N_for_bound(1, 1, 1, 1.7e-3) == 10
    assert smallest_N_for_bound(1, 1, 1, 100.0) == 1
    tols = np.geomspace(1e-1, 1e-12, 30)
    Ns = [smallest_N_for_bound(1, 2, 3.0, t) for t in tols]
    assert np.all(np.diff(Ns) >= 0)
    for t, N in zip(tols, Ns):
        assert truncation_bound(M=1, n=2, alpha=3.0, N=N) <= t
        if N > 1:
            assert truncation_bound(M=1, n=2, alpha=3.0, N=N - 1) > t
