"""
Coordinates, the computational region and point-process orderings.

Points are plain float arrays whose last coordinate is time; a space-time
point is ``(s1, s2, t)``. The ordering at ``x`` ranks the points of a
Poisson configuration that fall in the relevant set ``U(x)`` by Euclidean
distance to ``x``.
"""

from dataclasses import dataclass
from math import gamma, log, pi

import numpy as np

from ._random import make_rng

MODES = ("spatial", "temporal", "spacetime")


class InvalidParameter(ValueError):
    """A parameter is outside its admissible range."""


@dataclass(frozen=True)
class SpaceTimePoint:
    s1: float
    s2: float
    t: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.s1, self.s2, self.t])):
            raise InvalidParameter("space-time point components must be finite")

    def as_array(self):
        return np.array([self.s1, self.s2, self.t], dtype=float)


def as_points(points, dim=None):
    """Coerce a point, a sequence of points or SpaceTimePoints to a 2-D array."""
    if isinstance(points, SpaceTimePoint):
        arr = points.as_array()[None, :]
    elif len(points) and isinstance(points[0], SpaceTimePoint):
        arr = np.array([p.as_array() for p in points])
    else:
        arr = np.atleast_2d(np.asarray(points, dtype=float))
        if dim == 1 and arr.shape[0] == 1 and arr.shape[1] != 1:
            arr = arr.T
    if dim is not None and arr.size == 0:
        arr = arr.reshape(0, dim)
    return arr


def _as_point(x):
    if isinstance(x, SpaceTimePoint):
        return x.as_array()
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ComputationalBox:
    lower: np.ndarray
    upper: np.ndarray
    margin_r: float = 0.0
    epsilon: float = 0.01

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise InvalidParameter("box needs lower < upper in every dimension")
        if self.margin_r < 0:
            raise InvalidParameter("margin must be non-negative")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    @property
    def widths(self):
        return self.upper - self.lower

    @property
    def volume(self):
        return float(np.prod(self.widths))

    def contains(self, points):
        pts = as_points(points, self.dim)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)


@dataclass(frozen=True)
class PointConfiguration:
    points: np.ndarray
    intensity_lambda: float

    def __len__(self):
        return len(self.points)


def region_margin(alpha, lam, epsilon, d):
    """Padding r so that the stick mass ordered from outside the box is ~epsilon."""
    if alpha <= 0 or lam <= 0:
        raise InvalidParameter("alpha and lambda must be positive")
    if not 0 < epsilon < 1:
        raise InvalidParameter("epsilon must lie in (0, 1)")
    if d < 1:
        raise InvalidParameter("dimension must be at least 1")
    unit = gamma(d / 2) * d / (2 * pi ** (d / 2))
    return 2.0 * (unit * (alpha + 1) / lam * log(1 / epsilon)) ** (1.0 / d)


def computational_region(data_min, data_max, alpha, lam, epsilon=0.01, d=None):
    data_min = np.atleast_1d(np.asarray(data_min, dtype=float))
    data_max = np.atleast_1d(np.asarray(data_max, dtype=float))
    if np.any(data_min > data_max):
        raise InvalidParameter("data_min must not exceed data_max")
    d = data_min.size if d is None else d
    r = region_margin(alpha, lam, epsilon, d)
    lower, upper = data_min - r, data_max + r
    # a degenerate data range with r -> 0 still needs a non-empty box
    upper = np.where(upper > lower, upper, lower + np.finfo(float).eps * (1 + abs(lower)))
    return ComputationalBox(lower, upper, margin_r=r, epsilon=epsilon)


def sample_poisson_configuration(box, lam, rng=None):
    """Homogeneous Poisson process with intensity ``lam`` restricted to ``box``."""
    if lam <= 0:
        raise InvalidParameter("intensity must be positive")
    rng = make_rng(rng)
    n = rng.poisson(lam * box.volume)
    pts = box.lower + rng.random((n, box.dim)) * box.widths
    return PointConfiguration(pts, float(lam))


def relevant_set_contains(x, z, mode="spacetime"):
    if mode not in MODES:
        raise InvalidParameter(f"unknown mode {mode!r}")
    if mode == "spatial":
        return True
    return bool(_as_point(z)[-1] <= _as_point(x)[-1])


def eligible_mask(x, points, mode="spacetime"):
    """Vectorised relevant-set membership of every configuration point."""
    if mode not in MODES:
        raise InvalidParameter(f"unknown mode {mode!r}")
    if mode == "spatial":
        return np.ones(len(points), dtype=bool)
    return points[:, -1] <= _as_point(x)[-1]


def compute_ordering(x, config, mode="spacetime"):
    """Indices of eligible points by ascending distance to ``x``, ties by index."""
    xa = _as_point(x)
    pts = config.points if isinstance(config, PointConfiguration) else config
    pts = as_points(pts, xa.size)
    if len(pts) == 0:
        return np.empty(0, dtype=int)
    idx = np.flatnonzero(eligible_mask(xa, pts, mode))
    dist = np.sqrt(((pts[idx] - xa) ** 2).sum(axis=1))
    return idx[np.argsort(dist, kind="stable")]
