"""
Random function f_k(x) = sum_i K(x, theta_{pi_i(x)}) p_i(x), the Gaussian
likelihood, the prior densities and the joint log-posterior.
"""

from dataclasses import dataclass, field, replace
from math import lgamma, log, pi

import numpy as np
from scipy.spatial.distance import cdist

from ._random import make_rng
from .geometry import ComputationalBox, InvalidParameter, as_points
from .kernel import (
    A_DEFAULT,
    gp_covariance_delta,
    gp_covariance_psi,
    jittered_cholesky,
    kernel_matrix,
    sample_fields,
    sigma_half_batch,
)
from .oddp import stick_weights

LOG_2PI = log(2 * pi)
UNIFORM_BOUNDS = (3.0, 200.0)


@dataclass(frozen=True)
class VariableState:
    """The transdimensional block: k atoms with stick, location and parameter."""

    V: np.ndarray
    z: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray

    def __post_init__(self):
        V = np.atleast_1d(np.asarray(self.V, dtype=float))
        z = np.asarray(self.z, dtype=float).reshape(len(V), -1)
        t1 = np.atleast_1d(np.asarray(self.theta1, dtype=float))
        t2 = np.atleast_1d(np.asarray(self.theta2, dtype=float))
        if not (len(V) == len(z) == len(t1) == len(t2)):
            raise InvalidParameter("variable blocks must all have length k")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    @property
    def k(self):
        return len(self.V)

    @property
    def theta(self):
        return np.column_stack([self.theta1, self.theta2])


@dataclass(frozen=True)
class FixedState:
    phi: float
    a_delta: float
    b_psi: float
    psi1: np.ndarray
    psi2: np.ndarray
    log_delta: np.ndarray
    tau: float
    alpha: float
    lam: float
    sigma: float
    alpha0: float = 0.0
    alpha1: float = 0.0

    def __post_init__(self):
        for name in ("psi1", "psi2", "log_delta"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))

    @property
    def delta(self):
        return np.exp(self.log_delta)

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    y: np.ndarray
    covariate: np.ndarray = None

    def __post_init__(self):
        pts = as_points(self.points, 3)
        y = np.asarray(self.y, dtype=float).ravel()
        if len(pts) != len(y):
            raise InvalidParameter("points and responses must be aligned")
        if self.covariate is not None:
            cov = np.asarray(self.covariate, dtype=float).ravel()
            if len(cov) != len(y):
                raise InvalidParameter("covariate must be aligned with responses")
            object.__setattr__(self, "covariate", cov)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.y)

    @property
    def regression(self):
        return self.covariate is not None

    @property
    def locations(self):
        return self.points[:, :2]

    @property
    def times(self):
        return self.points[:, 2]

    def subset(self, idx):
        cov = None if self.covariate is None else self.covariate[idx]
        return Dataset(self.points[idx], self.y[idx], cov)


@dataclass(frozen=True)
class Hyper:
    """Fixed prior configuration plus the data sites the latent fields live on."""

    box: ComputationalBox
    locations: np.ndarray
    times: np.ndarray
    rho: float = 0.0
    k_max: int = 30
    n0: float = 1.0
    eta: float = 2.0
    b_lambda: float = 20.0
    A: float = A_DEFAULT
    bounds: tuple = UNIFORM_BOUNDS
    sigma_log_sd: float = 1.0
    reg_var: float = 1e4
    regression: bool = False
    ordering_mode: str = "spacetime"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def g0_cov(self):
        return np.array([[1.0, self.rho], [self.rho, 1.0]])

    def chol_psi(self, b_psi):
        key = ("psi", b_psi)
        if key not in self._cache:
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = jittered_cholesky(gp_covariance_psi(self.locations, b_psi))
        return self._cache[key]

    def chol_delta(self, a_delta):
        key = ("delta", a_delta)
        if key not in self._cache:
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = jittered_cholesky(gp_covariance_delta(self.times, a_delta))
        return self._cache[key]


def empirical_rho(locations):
    loc = np.asarray(locations, dtype=float)
    if len(loc) < 3:
        return 0.0
    r = np.corrcoef(loc[:, 0], loc[:, 1])[0, 1]
    return float(np.clip(np.nan_to_num(r), -0.99, 0.99))


# --- the random function ---------------------------------------------------


def f_at(points, V, z, theta, tau, m_stack, delta, mode="spacetime"):
    """
    Vectorised f_k at ``points`` (n, 3) given per-point kernel matrices
    ``m_stack`` (n, 2, 2) and decays ``delta`` (n,).

    Atoms outside U(x) get zero weight; the rest are ranked by distance.
    """
    points = np.asarray(points, dtype=float)
    n, k = len(points), len(V)
    if k == 0:
        return np.zeros(n)
    d2 = cdist(points, z, "sqeuclidean")
    if mode == "spatial":
        elig = np.ones((n, k), dtype=bool)
    else:
        elig = z[None, :, -1] <= points[:, None, -1]
    d2 = np.where(elig, d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    Vo = np.where(np.take_along_axis(elig, order, 1), V[order], 0.0)
    p = stick_weights(Vo)
    K = np.take_along_axis(kernel_matrix(points, theta, tau, m_stack, delta), order, 1)
    return (p * K).sum(axis=1)


def f_values(points, var, fixed, psi1=None, psi2=None, log_delta=None, A=A_DEFAULT,
             mode="spacetime"):
    """f_k at ``points``; field values default to the ones stored at the data sites."""
    psi1 = fixed.psi1 if psi1 is None else np.asarray(psi1, dtype=float)
    psi2 = fixed.psi2 if psi2 is None else np.asarray(psi2, dtype=float)
    log_delta = fixed.log_delta if log_delta is None else np.asarray(log_delta, dtype=float)
    m = sigma_half_batch(psi1, psi2, fixed.phi, A)
    return f_at(as_points(points, 3), var.V, var.z, var.theta, fixed.tau, m, np.exp(log_delta), mode)


def f_eval(x, var, fixed, psi=(0.0, 0.0, 0.0), A=A_DEFAULT, mode="spacetime"):
    """f_k at a single point with explicit field values ``psi = (psi1, psi2, log_delta)``."""
    p1, p2, ld = psi
    return float(f_values(as_points(x, 3), var, fixed, [p1], [p2], [ld], A, mode)[0])


# --- likelihood and priors ---------------------------------------------------


def regression_mean(data, f, alpha0=0.0, alpha1=0.0):
    if data.covariate is None:
        return np.asarray(f, dtype=float)
    return alpha0 + alpha1 * data.covariate + f


def log_likelihood(data, f_vals, sigma, regression=None):
    """Gaussian log-likelihood; ``regression=(alpha0, alpha1)`` adds the covariate term."""
    if sigma <= 0:
        raise InvalidParameter("sigma must be positive")
    y = data.y if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    mean = np.asarray(f_vals, dtype=float)
    if regression is not None:
        mean = regression[0] + regression[1] * data.covariate + mean
    r = (y - mean) / sigma
    return float(-0.5 * (r @ r) - len(y) * (log(sigma) + 0.5 * LOG_2PI))


def log_prior_alpha(alpha, n0=1.0, eta=2.0):
    if alpha <= 0:
        return -np.inf
    return (eta * log(n0) + lgamma(2 * eta) + (eta - 1) * log(alpha)
            - 2 * lgamma(eta) - 2 * eta * log(alpha + n0))


def log_prior_lambda(lam, alpha, b_lambda=20.0):
    if lam <= 0 or alpha <= 0:
        return -np.inf
    dev = log(lam) - log(alpha)
    return -log(lam) - 0.5 * log(2 * pi * b_lambda) - dev * dev / (2 * b_lambda)


def _lognormal_logpdf(x, sd):
    if x <= 0:
        return -np.inf
    lx = log(x)
    return -lx - log(sd) - 0.5 * LOG_2PI - lx * lx / (2 * sd * sd)


def _mvn_chol_logpdf(x, L):
    w = np.linalg.solve(L, x) if len(x) else x
    return float(-0.5 * (w @ w) - np.log(np.diag(L)).sum() - 0.5 * len(x) * LOG_2PI)


def _g0_logpdf(theta1, theta2, rho):
    q = (theta1**2 - 2 * rho * theta1 * theta2 + theta2**2) / (1 - rho**2)
    return float(np.sum(-LOG_2PI - 0.5 * log(1 - rho**2) - 0.5 * q))


def log_prior_variable(var, fixed, hyper):
    """pi(k) pi(V, z, theta1, theta2 | k)."""
    k = var.k
    if not 1 <= k <= hyper.k_max:
        return -np.inf
    if np.any((var.V <= 0) | (var.V >= 1)) or not np.all(hyper.box.contains(var.z)):
        return -np.inf
    a = fixed.alpha
    if a <= 0:
        return -np.inf
    lp = -log(hyper.k_max)
    lp += k * log(a) + (a - 1) * np.log1p(-var.V).sum()
    lp -= k * log(hyper.box.volume)
    lp += _g0_logpdf(var.theta1, var.theta2, hyper.rho)
    return float(lp)


def log_prior_scalars(fixed, hyper):
    """pi(tau, phi, b_psi, a_delta) pi(sigma) pi(alpha) pi(lambda | alpha) and regression terms."""
    lo, hi = hyper.bounds
    for v in (fixed.phi, fixed.a_delta, fixed.b_psi):
        if not lo < v < hi:
            return -np.inf
    if fixed.sigma <= 0 or fixed.alpha <= 0 or fixed.lam <= 0:
        return -np.inf
    lp = -3 * log(hi - lo)
    lp += -0.5 * fixed.tau**2 - 0.5 * LOG_2PI
    lp += _lognormal_logpdf(fixed.sigma, hyper.sigma_log_sd)
    lp += log_prior_alpha(fixed.alpha, hyper.n0, hyper.eta)
    lp += log_prior_lambda(fixed.lam, fixed.alpha, hyper.b_lambda)
    if hyper.regression:
        lp += -(fixed.alpha0**2 + fixed.alpha1**2) / (2 * hyper.reg_var) - log(2 * pi * hyper.reg_var)
    return float(lp)


def log_prior_fields(fixed, hyper):
    """Independent GP priors on psi1, psi2 and log delta at the data sites."""
    lo, hi = hyper.bounds
    if not (lo < fixed.b_psi < hi and lo < fixed.a_delta < hi):
        return -np.inf
    L_psi = hyper.chol_psi(fixed.b_psi)
    L_del = hyper.chol_delta(fixed.a_delta)
    return (_mvn_chol_logpdf(fixed.psi1, L_psi) + _mvn_chol_logpdf(fixed.psi2, L_psi)
            + _mvn_chol_logpdf(fixed.log_delta, L_del))


def log_prior_all(var, fixed, hyper):
    lp = log_prior_variable(var, fixed, hyper)
    if lp == -np.inf:
        return lp
    lp += log_prior_scalars(fixed, hyper)
    if lp == -np.inf:
        return lp
    return lp + log_prior_fields(fixed, hyper)


def log_posterior(var, fixed, data, hyper):
    lp = log_prior_all(var, fixed, hyper)
    if lp == -np.inf:
        return lp
    f = f_values(data.points, var, fixed, A=hyper.A, mode=hyper.ordering_mode)
    reg = (fixed.alpha0, fixed.alpha1) if data.regression else None
    return lp + log_likelihood(data, f, fixed.sigma, reg)


# --- prior simulation ----------------------------------------------------------


def sample_alpha_prior(n0, eta, rng, size=None):
    b = rng.beta(eta, eta, size=size)
    return n0 * b / (1 - b)


def sample_prior_state(hyper, rng=None, k=None):
    """One joint draw (var, fixed) from the prior."""
    rng = make_rng(rng)
    lo, hi = hyper.bounds
    alpha = float(sample_alpha_prior(hyper.n0, hyper.eta, rng))
    lam = float(np.exp(np.log(alpha) + np.sqrt(hyper.b_lambda) * rng.standard_normal()))
    k = int(rng.integers(1, hyper.k_max + 1)) if k is None else k
    V = rng.beta(1.0, alpha, size=k)
    # Beta(1, alpha) underflows to 0 or rounds to 1 for extreme alpha
    V = np.clip(V, 1e-12, 1 - 1e-12)
    box = hyper.box
    z = box.lower + rng.random((k, box.dim)) * box.widths
    theta = rng.multivariate_normal(np.zeros(2), hyper.g0_cov(), size=k)
    b_psi, a_delta, phi = rng.uniform(lo, hi, size=3)
    psi1, psi2, log_delta = sample_fields(hyper.locations, hyper.times, b_psi, a_delta, rng)
    sigma = float(np.exp(hyper.sigma_log_sd * rng.standard_normal()))
    alpha0, alpha1 = (rng.normal(0, np.sqrt(hyper.reg_var), 2) if hyper.regression else (0.0, 0.0))
    var = VariableState(V, z, theta[:, 0], theta[:, 1])
    fixed = FixedState(phi, a_delta, b_psi, psi1, psi2, log_delta, float(rng.standard_normal()),
                       alpha, lam, sigma, float(alpha0), float(alpha1))
    return var, fixed
