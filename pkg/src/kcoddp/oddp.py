"""
Stick-breaking weights under location-dependent orderings, tail moments of
the weights and the truncation error bound for the data marginal.
"""

from dataclasses import dataclass
from math import exp, lgamma, log, pi, sqrt

import numpy as np

from ._random import make_rng
from .geometry import InvalidParameter


@dataclass(frozen=True)
class StickState:
    V: np.ndarray
    alpha: float

    def __post_init__(self):
        V = np.atleast_1d(np.asarray(self.V, dtype=float))
        if np.any((V <= 0) | (V >= 1)):
            raise InvalidParameter("stick proportions must lie strictly in (0, 1)")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidParameter("alpha must be finite and positive")
        object.__setattr__(self, "V", V)


@dataclass(frozen=True)
class TruncationBoundInput:
    M: float
    n: int
    alpha: float
    N: int

    def __post_init__(self):
        if self.M <= 0 or self.n < 1 or self.alpha <= 0 or self.N < 1:
            raise InvalidParameter("M, n, alpha and N must all be positive")


def stick_weights(V):
    """p_i = V_i prod_{j<i} (1 - V_j) along the last axis."""
    V = np.asarray(V, dtype=float)
    rest = np.cumprod(1.0 - V, axis=-1)
    before = np.concatenate([np.ones(V.shape[:-1] + (1,)), rest[..., :-1]], axis=-1)
    return V * before


def weights_for_ordering(stick, ordering, k=None):
    """First ``k`` weights p_1(x)..p_k(x) for the ordering at x."""
    V = stick.V if isinstance(stick, StickState) else np.asarray(stick, dtype=float)
    ordering = np.asarray(ordering, dtype=int)
    k = len(ordering) if k is None else k
    if k > len(ordering) or k > len(V) or k < 0:
        raise IndexError(f"k={k} exceeds the {min(len(ordering), len(V))} available atoms")
    return stick_weights(V[ordering[:k]])


def sample_sticks(alpha, size, rng=None):
    return make_rng(rng).beta(1.0, alpha, size=size)


def tail_moment_T(N, r, alpha):
    """E (sum_{k>=N} p_k)^r."""
    return (alpha / (alpha + r)) ** (N - 1)


def tail_moment_U(N, r, alpha):
    """E sum_{k>=N} p_k^r."""
    log_ratio = lgamma(r) + lgamma(alpha + 1) - lgamma(alpha + r)
    return (alpha / (alpha + r)) ** (N - 1) * exp(log_ratio)


def truncation_bound(inp=None, *, M=None, n=None, alpha=None, N=None):
    """L1 distance bound between the N-truncated and the full data marginal."""
    if inp is None:
        inp = TruncationBoundInput(M, n, alpha, N)
    M, n, a, N = inp.M, inp.n, inp.alpha, inp.N
    return 4 * M**2 * n * (a / (a + 2)) ** N + 2 * sqrt(2 / pi) * M * n * (a / (a + 1)) ** N


def smallest_N_for_bound(M, n, alpha, tolerance):
    if tolerance <= 0:
        raise InvalidParameter("tolerance must be positive")
    # both terms are geometric; start from an analytic lower estimate and scan up
    N = 1
    ratio = alpha / (alpha + 1)
    lead = 4 * M**2 * n + 2 * sqrt(2 / pi) * M * n
    if lead > tolerance:
        N = max(1, int(log(tolerance / lead) / log(ratio)) - 1)
    while N > 1 and truncation_bound(M=M, n=n, alpha=alpha, N=N - 1) <= tolerance:
        N -= 1
    while truncation_bound(M=M, n=n, alpha=alpha, N=N) > tolerance:
        N += 1
    return N
