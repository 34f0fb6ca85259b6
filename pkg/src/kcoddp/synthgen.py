"""
Gaussian sampling and conditioning, and a nonstationary non-Gaussian
synthetic data generator.

The generator draws a Gaussian process with a linear trend at a few held-out
design points, conditions the process at the remaining points on those
draws, and uses the conditional draw both as the mean and (through absolute
differences) as the covariance of the response.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve
from scipy.spatial.distance import cdist

from ._random import make_rng
from .geometry import InvalidParameter
from .kernel import FactorizationError, jittered_cholesky
from .model import Dataset

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class GaussianSpec:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise InvalidParameter("covariance shape does not match the mean")
        if not np.allclose(cov, cov.T, rtol=0, atol=SYMMETRY_TOL * max(1.0, np.abs(cov).max(initial=0))):
            raise InvalidParameter("covariance must be symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    @property
    def dim(self):
        return self.mean.size


def psd_sqrt(cov):
    """
    Symmetric square root via the eigendecomposition, tiny negative
    eigenvalues clipped to zero; exact for singular and zero matrices.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.size == 0:
        return cov.copy()
    w, U = np.linalg.eigh(cov)
    scale = max(1.0, float(np.abs(w).max()))
    if w.min() < -1e-8 * scale:
        raise FactorizationError("covariance is not positive semidefinite")
    return (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T


def mvn_sample(spec, rng=None, size=None):
    """One draw (or ``size`` draws, one per row) from ``N(spec.mean, spec.cov)``."""
    rng = make_rng(rng)
    R = psd_sqrt(spec.cov)
    if size is None:
        return spec.mean + R @ rng.standard_normal(spec.dim)
    return spec.mean + rng.standard_normal((size, spec.dim)) @ R


def _chol(cov):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return jittered_cholesky(cov)


def gp_conditional(joint, observed, observed_idx):
    """
    Law of the unobserved coordinates of ``joint`` given the values
    ``observed`` at ``observed_idx``:
    ``mu_1 + A_12 A_22^{-1} (x_2 - mu_2)`` and ``A_11 - A_12 A_22^{-1} A_21``.
    """
    obs = np.asarray(observed_idx, dtype=int)
    free = np.setdiff1d(np.arange(joint.dim), obs)
    x2 = np.atleast_1d(np.asarray(observed, dtype=float))
    A11 = joint.cov[np.ix_(free, free)]
    A12 = joint.cov[np.ix_(free, obs)]
    A22 = joint.cov[np.ix_(obs, obs)]
    L = _chol(A22)
    mean = joint.mean[free] + A12 @ cho_solve((L, True), x2 - joint.mean[obs])
    cov = A11 - A12 @ cho_solve((L, True), A12.T)
    return GaussianSpec(mean, 0.5 * (cov + cov.T))


def exp_distance_cov(a, b=None, rate=0.5):
    """exp(-rate * ||a_i - b_j||) with Euclidean distance over all coordinates."""
    a = np.asarray(a, dtype=float).reshape(len(a), -1)
    b = a if b is None else np.asarray(b, dtype=float).reshape(len(b), -1)
    return np.exp(-rate * cdist(a, b))


@dataclass(frozen=True)
class SyntheticRecord:
    """Every intermediate of one synthetic draw; ``dataset`` holds the retained points."""

    dataset: Dataset
    times: np.ndarray
    locations: np.ndarray
    holdout_time_idx: np.ndarray
    holdout_loc_idx: np.ndarray
    x_holdout: np.ndarray
    x_retained: np.ndarray
    y_cov: np.ndarray


def simulate_synthetic(seed=None, n_grid=100, n_holdout=5, box_side=50.0, beta=(0.1, 0.01, 0.02)):
    if not 0 < n_holdout < n_grid:
        raise InvalidParameter("need 0 < n_holdout < n_grid")
    rng = make_rng(seed)
    beta = np.asarray(beta, dtype=float)
    # one time per unit interval (i-1, i]
    times = np.arange(1, n_grid + 1) - rng.random(n_grid)
    locations = rng.uniform(0.0, box_side, size=(n_grid, 2))
    # held-out times and locations are chosen independently, the rest keep their order
    t_out = np.sort(rng.choice(n_grid, n_holdout, replace=False))
    s_out = np.sort(rng.choice(n_grid, n_holdout, replace=False))
    t_in = np.setdiff1d(np.arange(n_grid), t_out)
    s_in = np.setdiff1d(np.arange(n_grid), s_out)
    d_out = np.column_stack([times[t_out], locations[s_out]])
    d_in = np.column_stack([times[t_in], locations[s_in]])
    design = np.vstack([d_out, d_in])
    A = exp_distance_cov(design)
    np.fill_diagonal(A, 1.0)
    mu = design @ beta
    h = np.arange(n_holdout)
    joint = GaussianSpec(mu, A)
    x_out = mvn_sample(GaussianSpec(mu[h], A[np.ix_(h, h)]), rng)
    cond = gp_conditional(joint, x_out, h)
    x_in = mvn_sample(cond, rng)
    y_cov = np.exp(-0.5 * np.abs(x_in[:, None] - x_in[None, :]))
    np.fill_diagonal(y_cov, 1.0)
    y = mvn_sample(GaussianSpec(0.01 * x_in, y_cov), rng)
    points = np.column_stack([d_in[:, 1], d_in[:, 2], d_in[:, 0]])
    return SyntheticRecord(Dataset(points, y), times, locations, t_out, s_out, x_out, x_in, y_cov)


def generate_synthetic(seed=None, n_grid=100, n_holdout=5, box_side=50.0, beta=(0.1, 0.01, 0.02)):
    """Synthetic dataset of ``n_grid - n_holdout`` points with columns (s1, s2, t) and y."""
    return simulate_synthetic(seed, n_grid, n_holdout, box_side, beta).dataset
