"""
Nonstationary space-time kernel

    K(s, t, theta, tau) = exp{-1/2 (s - theta)' Sigma(s) (s - theta) - delta(t) |t - tau|}

with a Higdon-style square root ``Sigma(s)^{1/2}`` driven by two latent
Gaussian fields psi1, psi2 and a log-Gaussian temporal decay delta(t).
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ._random import make_rng
from .geometry import InvalidParameter

A_DEFAULT = 3.5
JITTER_START = 1e-8
JITTER_MAX = 1e-4


class FactorizationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class AnisotropyMatrix:
    m: np.ndarray

    @property
    def sigma(self):
        """Sigma(s) = m' m."""
        return self.m.T @ self.m


@dataclass
class KernelFieldParams:
    phi: float
    psi1: np.ndarray
    psi2: np.ndarray
    log_delta: np.ndarray
    tau: float
    b_psi: float
    a_delta: float
    A: float = A_DEFAULT
    sigma2_psi: float = 1.0
    sigma2_delta: float = 1.0

    def __post_init__(self):
        if self.phi <= 0:
            raise InvalidParameter("phi must be positive")
        self.psi1 = np.asarray(self.psi1, dtype=float)
        self.psi2 = np.asarray(self.psi2, dtype=float)
        self.log_delta = np.asarray(self.log_delta, dtype=float)
        if not (self.psi1.shape == self.psi2.shape == self.log_delta.shape):
            raise InvalidParameter("field vectors must be aligned with the data sites")

    @property
    def delta(self):
        return np.exp(self.log_delta)


def _diag_factors(norm2, A):
    root = np.sqrt(4 * A**2 + norm2**2 * np.pi**2) / (2 * np.pi)
    # root >= norm2/2 analytically; clip the rounding residue
    return np.sqrt(root + norm2 / 2), np.sqrt(np.maximum(root - norm2 / 2, 0.0))


def sigma_half_batch(psi1, psi2, phi, A=A_DEFAULT):
    """Stack of Sigma(s)^{1/2} matrices, shape ``(n, 2, 2)``."""
    psi1 = np.asarray(psi1, dtype=float)
    psi2 = np.asarray(psi2, dtype=float)
    d1, d2 = _diag_factors(psi1**2 + psi2**2, A)
    ang = np.arctan2(psi2, psi1)  # arctan2(0, 0) == 0
    c, s = np.cos(ang), np.sin(ang)
    m = np.empty(psi1.shape + (2, 2))
    m[..., 0, 0] = d1 * c
    m[..., 0, 1] = d1 * s
    m[..., 1, 0] = -d2 * s
    m[..., 1, 1] = d2 * c
    return phi * m


def sigma_half(psi1_s, psi2_s, phi, A=A_DEFAULT):
    if phi <= 0 or A <= 0:
        raise InvalidParameter("phi and A must be positive")
    return AnisotropyMatrix(sigma_half_batch(psi1_s, psi2_s, phi, A))


def kernel_eval(x, theta, tau, sigma_half_m, delta_t):
    if delta_t <= 0:
        raise InvalidParameter("delta(t) must be positive")
    x = np.asarray(x, dtype=float)
    m = sigma_half_m.m if isinstance(sigma_half_m, AnisotropyMatrix) else np.asarray(sigma_half_m)
    u = m @ (x[:2] - np.asarray(theta, dtype=float))
    return float(np.exp(-0.5 * u @ u - delta_t * abs(x[2] - tau)))


def kernel_matrix(points, theta, tau, m_stack, delta):
    """K(x_i, theta_j) for ``points`` (n, 3), ``theta`` (k, 2); returns (n, k)."""
    diff = points[:, None, :2] - theta[None, :, :]
    u = np.einsum("nab,nkb->nka", m_stack, diff)
    quad = (u**2).sum(axis=-1)
    return np.exp(-0.5 * quad - (delta * np.abs(points[:, 2] - tau))[:, None])


def gp_covariance_psi(locations, b_psi, sigma2=1.0):
    if b_psi <= 0:
        raise InvalidParameter("b_psi must be positive")
    locs = np.atleast_2d(np.asarray(locations, dtype=float))
    return sigma2 * np.exp(-cdist(locs, locs, "sqeuclidean") / b_psi)


def gp_covariance_delta(times, a_delta, sigma2=1.0):
    # decaying sign; the printed positive exponent is not a covariance
    if a_delta <= 0:
        raise InvalidParameter("a_delta must be positive")
    t = np.asarray(times, dtype=float).ravel()
    return sigma2 * np.exp(-((t[:, None] - t[None, :]) ** 2) / a_delta)


def jittered_cholesky(cov, start=JITTER_START, stop=JITTER_MAX):
    """Lower Cholesky factor of ``cov + j I``, escalating j by 10x on failure."""
    cov = np.asarray(cov, dtype=float)
    if cov.size == 0:
        return cov.copy()
    eye = np.eye(cov.shape[0])
    j = start
    while j <= stop * (1 + 1e-9):
        try:
            return np.linalg.cholesky(cov + j * eye)
        except np.linalg.LinAlgError:
            j *= 10
    raise FactorizationError(f"covariance not factorizable with jitter up to {stop:g}")


def sample_fields(locations, times, b_psi, a_delta, rng=None, size=None):
    """Joint prior draw of (psi1, psi2, log_delta) at the data sites."""
    rng = make_rng(rng)
    L_psi = jittered_cholesky(gp_covariance_psi(locations, b_psi))
    L_del = jittered_cholesky(gp_covariance_delta(times, a_delta))
    n = L_psi.shape[0]
    shape = (n,) if size is None else (n, size)
    psi1 = L_psi @ rng.standard_normal(shape)
    psi2 = L_psi @ rng.standard_normal(shape)
    log_delta = L_del @ rng.standard_normal(shape)
    if size is not None:
        return psi1.T, psi2.T, log_delta.T
    return psi1, psi2, log_delta
