"""
Covariance structure of the kernel-convolved ODDP.

The conditional covariance of f at two points, given the orderings there,
factors into a G0 kernel covariance times an ordering term ``corr_G`` that
only depends on which atoms the two orderings share and on what precedes
them. The unconditional correlation is averaged over Poisson configurations
by plain Monte Carlo.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._random import make_rng
from .geometry import InvalidParameter, compute_ordering, sample_poisson_configuration
from .kernel import A_DEFAULT, sigma_half_batch

DEFAULT_DEPTH = 200


@dataclass(frozen=True)
class OverlapSets:
    """
    Shared atoms of two orderings with, for each one, ``#S`` (atoms preceding
    it in both) and ``#S'`` (atoms preceding it in exactly one).
    """

    shared: np.ndarray
    s_size: np.ndarray
    sprime_size: np.ndarray
    n1: int = 0
    n2: int = 0


def overlap_sets(ord1, ord2, depth=None):
    ord1 = np.asarray(ord1, dtype=int).ravel()
    ord2 = np.asarray(ord2, dtype=int).ravel()
    if depth is not None:
        ord1, ord2 = ord1[:depth], ord2[:depth]
    pos2 = {a: j for j, a in enumerate(ord2.tolist())}
    # position in ord2 of each ord1 atom, -1 when absent
    p2 = np.array([pos2.get(a, -1) for a in ord1.tolist()], dtype=int)
    in_both = p2 >= 0
    idx1 = np.flatnonzero(in_both)
    shared = ord1[idx1]
    j2 = p2[idx1]
    # #S for the i-th shared atom: earlier shared atoms (in ord1) that also precede it in ord2
    s_size = (j2[None, :] < j2[:, None]) & (np.arange(len(idx1))[None, :] < np.arange(len(idx1))[:, None])
    s_size = s_size.sum(axis=1).astype(int)
    sprime = (idx1 + j2 - 2 * s_size).astype(int)
    return OverlapSets(shared, s_size, sprime, len(ord1), len(ord2))


def corr_G(alpha, sets, tail=None):
    """
    Ordering part of the correlation, ``2/(a+2) sum_k (a/(a+2))^#S (a/(a+1))^#S'``.

    ``tail="common"`` treats everything after the two finite orderings as one
    shared continuation and sums its geometric contribution in closed form,
    so identical orderings give exactly 1.
    """
    if alpha <= 0:
        raise InvalidParameter("alpha must be positive")
    r2 = alpha / (alpha + 2)
    r1 = alpha / (alpha + 1)
    total = float(np.sum(r2 ** sets.s_size.astype(float) * r1 ** sets.sprime_size.astype(float)))
    if tail == "common":
        ns = len(sets.shared)
        total += r2**ns * r1 ** (sets.n1 + sets.n2 - 2 * ns) * (alpha + 2) / 2
    elif tail is not None:
        raise InvalidParameter(f"unknown tail option {tail!r}")
    return 2.0 / (alpha + 2) * total


def corr_G_tail_bound(alpha, depth=DEFAULT_DEPTH):
    """Upper bound on the corr_G contribution of shared atoms beyond ``depth``."""
    # each such atom has at least `depth` predecessors in the union, and at most
    # two atoms share a given max position
    r1 = alpha / (alpha + 1)
    return 4.0 / (alpha + 2) * (alpha + 1) * r1**depth


# --- G0 kernel moments -----------------------------------------------------------


@dataclass(frozen=True)
class NormalG0:
    """Multivariate normal base measure."""

    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def bivariate(cls, rho=0.0, var1=1.0, var2=1.0):
        c = rho * np.sqrt(var1 * var2)
        return cls(np.zeros(2), np.array([[var1, c], [c, var2]]))

    def sample(self, rng, n):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        L = np.linalg.cholesky(cov)
        return mean + rng.standard_normal((n, len(mean))) @ L.T


class KernelMoments(NamedTuple):
    E_K1: float
    E_K2: float
    E_K1K2: float
    E_K1sq: float
    E_K2sq: float
    se_K1: float
    se_K2: float
    se_K1K2: float
    se_corr: float = float("nan")

    @property
    def cov(self):
        return self.E_K1K2 - self.E_K1 * self.E_K2

    @property
    def var1(self):
        return self.E_K1sq - self.E_K1**2

    @property
    def var2(self):
        return self.E_K2sq - self.E_K2**2

    @property
    def corr(self):
        if self.var1 <= 0 or self.var2 <= 0:
            return 0.0
        if self.var1 == self.var2 == self.cov:
            return 1.0
        return float(np.clip(self.cov / np.sqrt(self.var1 * self.var2), -1.0, 1.0))


def spacetime_kernel(phi, tau=0.0, psi1=0.0, psi2=0.0, log_delta=0.0, A=A_DEFAULT):
    """K(x, theta) with field values frozen at the given numbers; vectorised over theta."""
    m = sigma_half_batch(np.array(psi1, dtype=float), np.array(psi2, dtype=float), phi, A)
    delta = float(np.exp(log_delta))

    def kernel(x, thetas):
        x = np.asarray(x, dtype=float)
        u = (np.asarray(thetas, dtype=float).reshape(-1, 2) - x[:2]) @ m.T
        return np.exp(-0.5 * (u**2).sum(axis=1) - delta * abs(x[2] - tau))

    return kernel


def gaussian_kernel(scale=1.0):
    """exp(-|x - theta|^2 / (2 scale^2)) on any dimension."""

    def kernel(x, thetas):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = np.asarray(thetas, dtype=float).reshape(-1, x.size) - x
        return np.exp(-0.5 * (d**2).sum(axis=1) / scale**2)

    return kernel


def kernel_moments_from_thetas(x1, x2, kernel, thetas):
    k1 = kernel(x1, thetas)
    k2 = kernel(x2, thetas)
    n = len(thetas)
    prod = k1 * k2
    se = lambda v: float(v.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return KernelMoments(float(k1.mean()), float(k2.mean()), float(prod.mean()),
                         float((k1 * k1).mean()), float((k2 * k2).mean()), se(k1), se(k2), se(prod),
                         _corr_se(k1, k2))


def _corr_se(k1, k2):
    """Delta-method standard error of the sample correlation (influence function)."""
    n = len(k1)
    s1, s2 = k1.std(), k2.std()
    if n < 2 or s1 == 0 or s2 == 0:
        return 0.0
    u = (k1 - k1.mean()) / s1
    v = (k2 - k2.mean()) / s2
    r = float((u * v).mean())
    infl = u * v - r * (u * u + v * v) / 2
    return float(infl.std(ddof=1) / np.sqrt(n))


def kernel_moments_G0(x1, x2, kernel, g0, n_mc, rng=None):
    """Monte Carlo E K(x1), E K(x2), E K(x1)K(x2) over theta ~ G0, with standard errors."""
    if n_mc < 1:
        raise InvalidParameter("n_mc must be at least 1")
    thetas = g0.sample(make_rng(rng), n_mc)
    return kernel_moments_from_thetas(x1, x2, kernel, thetas)


def conditional_cov_f(alpha, sets, moments, tail=None):
    """Cov(f(x1), f(x2) | orderings) = Cov_G0(K1, K2) corr_G / (alpha + 1)."""
    cov = moments.cov if isinstance(moments, KernelMoments) else float(moments)
    return cov * corr_G(alpha, sets, tail) / (alpha + 1)


# --- unconditional correlation ----------------------------------------------------


class CorrEstimate(NamedTuple):
    estimate: float
    std_error: float


def _ordering_corr_samples(x1, x2, alpha, configs, mode, depth):
    vals = np.empty(len(configs))
    for i, cfg in enumerate(configs):
        o1 = compute_ordering(x1, cfg, mode)[:depth]
        o2 = compute_ordering(x2, cfg, mode)[:depth]
        vals[i] = corr_G(alpha, overlap_sets(o1, o2), tail="common")
    return vals


def sample_configurations(box, lam, n_configs, rng=None):
    if n_configs < 1:
        raise InvalidParameter("n_configs must be at least 1")
    rng = make_rng(rng)
    return [sample_poisson_configuration(box, lam, rng) for _ in range(n_configs)]


def ordering_corr_mc(x1, x2, alpha, configs, mode="spacetime", depth=DEFAULT_DEPTH):
    vals = _ordering_corr_samples(x1, x2, alpha, configs, mode, depth)
    se = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
    return CorrEstimate(float(vals.mean()), float(se))


def unconditional_corr_mc(x1, x2, alpha, lam, box, moments, n_configs, rng=None,
                          mode="spacetime", depth=DEFAULT_DEPTH, configs=None):
    """
    E over configurations of corr_G times the G0 kernel correlation.

    ``moments`` is a :class:`KernelMoments` (or a plain kernel correlation).
    Pre-drawn ``configs`` can be passed to reuse configurations across calls.
    """
    if configs is None:
        configs = sample_configurations(box, lam, n_configs, rng)
    if isinstance(moments, KernelMoments):
        kc, kc_se = moments.corr, moments.se_corr
        kc_se = 0.0 if not np.isfinite(kc_se) else kc_se
    else:
        kc, kc_se = float(moments), 0.0
    if np.array_equal(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)):
        return CorrEstimate(1.0, 0.0)
    oc = ordering_corr_mc(x1, x2, alpha, configs, mode, depth)
    # the two factors come from independent draws
    se = np.hypot(oc.std_error * kc, oc.estimate * kc_se)
    return CorrEstimate(oc.estimate * kc, float(se))


@dataclass(frozen=True)
class SweepRow:
    separation: float
    estimate: float
    std_error: float


def correlation_sweep(x0, direction, separations, alpha, lam, box, kernel, g0,
                      n_configs=1000, n_mc=20000, rng=None, mode="spacetime"):
    """
    Unconditional correlation between ``x0`` and ``x0 + s * direction`` for each s.

    Configurations and G0 draws are shared across separations (common random
    numbers), which keeps the sweep smooth in s.
    """
    rng = make_rng(rng)
    x0 = np.asarray(x0, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    thetas = g0.sample(rng, n_mc)
    configs = sample_configurations(box, lam, n_configs, rng)
    rows = []
    for s in separations:
        x1 = x0 + s * direction
        mom = kernel_moments_from_thetas(x0, x1, kernel, thetas)
        est = unconditional_corr_mc(x0, x1, alpha, lam, box, mom, n_configs, mode=mode, configs=configs)
        rows.append(SweepRow(float(s), est.estimate, est.std_error))
    return rows


# --- separable special cases ---------------------------------------------------------

SEPARABLE_MODES = ("space_kernel", "time_kernel")


def separable_corr(k1, k2, o1, o2, alpha, lam, order_box, kernel, g0, order_mode,
                   n_configs=1000, n_mc=20000, rng=None):
    """
    Correlation when the kernel sees coordinates ``k`` and the ordering sees
    coordinates ``o``: Corr_G0(kernel) times the averaged ordering term.
    """
    rng = make_rng(rng)
    mom = kernel_moments_G0(k1, k2, kernel, g0, n_mc, rng)
    configs = sample_configurations(order_box, lam, n_configs, rng)
    if np.array_equal(np.atleast_1d(o1), np.atleast_1d(o2)):
        ordering = 1.0
    else:
        ordering = ordering_corr_mc(np.atleast_1d(o1), np.atleast_1d(o2), alpha, configs, order_mode).estimate
    return float(mom.corr * ordering)


def separability_mode_corr(x1, x2, mode, alpha, lam, box, kernel, g0,
                           n_configs=1000, n_mc=20000, rng=None):
    """
    ``space_kernel``: spatial kernel, atoms ordered by time with U(x) = (-inf, t].
    ``time_kernel``: temporal kernel, atoms ordered by location over the whole domain.

    ``box`` is a :class:`ComputationalBox` over the ordering coordinates.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    s1, t1, s2, t2 = x1[:2], x1[2:], x2[:2], x2[2:]
    if mode == "space_kernel":
        return separable_corr(s1, s2, t1, t2, alpha, lam, box, kernel, g0, "temporal",
                              n_configs, n_mc, rng)
    if mode == "time_kernel":
        return separable_corr(t1, t2, s1, s2, alpha, lam, box, kernel, g0, "spatial",
                              n_configs, n_mc, rng)
    raise InvalidParameter(f"unknown separability mode {mode!r}")

