"""
Birth, death and no-change moves on a generic transdimensional state.

A state holds ``k`` rows in each variable block (block ``b`` has ``d_b``
columns) plus a fixed-length vector. All moves are additive
transformations of a few positive innovations:

* no-change: every coordinate moves by ``zeta * a * eps`` with one ``eps``
  per block and an independent sign per coordinate;
* birth: row ``j`` splits into ``x_j + a eps`` and ``x_j - a eps`` (the
  second child is inserted at ``j + 1``) while the other rows move by
  ``zeta * a * |eps|``;
* death: rows ``j, j + 1`` merge into their average and the innovation is
  recovered as ``(x_j - x_{j+1}) / (2 a)``.

Birth needs one innovation per column of every variable block so that the
dimensions match. Each split innovation gets a random sign, so its signed
value is standard normal and enters the acceptance ratio through its
density.
"""

from dataclasses import dataclass, field
from math import log, pi

import numpy as np

BIRTH, DEATH, NO_CHANGE = "birth", "death", "no_change"
MOVE_TYPES = (BIRTH, DEATH, NO_CHANGE)
DEFAULT_WEIGHTS = (1 / 3, 1 / 3, 1 / 3)
_HALF_LOG_2PI = 0.5 * log(2 * pi)


@dataclass(frozen=True)
class MoveScales:
    """
    ``a``: additive scale per variable block; ``fixed``: per-coordinate scales
    of the fixed vector; ``split``: scale of the split innovation per block
    (defaults to ``a``).
    """

    a: tuple
    fixed: np.ndarray
    split: tuple = None

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        fixed = np.atleast_1d(np.asarray(self.fixed, dtype=float))
        split = a if self.split is None else tuple(float(v) for v in self.split)
        if len(split) != len(a):
            raise ValueError("one split scale per variable block is required")
        if min(a + split, default=1.0) <= 0 or np.any(fixed <= 0):
            raise ValueError("move scales must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "split", split)


@dataclass(frozen=True)
class ChainState:
    """Transformed coordinates and the cached log target."""

    var: tuple
    fixed: np.ndarray
    log_post: float

    @property
    def k(self):
        return self.var[0].shape[0]


@dataclass(frozen=True)
class MoveDraw:
    """
    Random ingredients of one move. ``eps`` holds, per variable block, the
    positive innovations (one per column), ``eps_fixed`` the fixed-block
    innovation. ``split_sign`` orients each split innovation; ``zeta`` holds
    per-row signs (shape ``(k, d_b)``) and ``zeta_fixed`` the fixed-block signs.
    """

    move_type: str
    j: int
    eps: tuple
    eps_fixed: float
    zeta: tuple
    zeta_fixed: np.ndarray
    split_sign: tuple = field(default=None)

    def conjugate(self):
        """Same innovations, all additive signs flipped."""
        return MoveDraw(self.move_type, self.j, self.eps, self.eps_fixed,
                        tuple(-z for z in self.zeta), -self.zeta_fixed, self.split_sign)


def _signs(rng, shape):
    return np.where(rng.random(shape) < 0.5, -1.0, 1.0)


def draw_move(state, scales, rng, weights=DEFAULT_WEIGHTS):
    """Draw the move type and every random ingredient in a fixed order."""
    u = rng.random()
    c = np.cumsum(weights)
    move = MOVE_TYPES[int(np.searchsorted(c / c[-1], u, side="right"))]
    k = state.k
    if move == BIRTH:
        j = int(rng.integers(k))
    elif move == DEATH:
        j = int(rng.integers(k - 1)) if k > 1 else -1
    else:
        j = -1
    dims = [b.shape[1] for b in state.var]
    if move == NO_CHANGE:
        eps = tuple(np.full(d, abs(rng.standard_normal())) for d in dims)
    else:
        eps = tuple(np.abs(rng.standard_normal(d)) for d in dims)
    split_sign = tuple(_signs(rng, d) for d in dims) if move == BIRTH else None
    zeta = tuple(_signs(rng, b.shape) for b in state.var)
    eps_fixed = abs(rng.standard_normal())
    zeta_fixed = _signs(rng, state.fixed.shape)
    return MoveDraw(move, j, eps, eps_fixed, zeta, zeta_fixed, split_sign)


def log_split_jacobian(dims, scales):
    """log prod_b (2 a_b)^{d_b} for the split part of a birth."""
    return float(sum(d * log(2 * a) for d, a in zip(dims, scales.split)))


def _move_fixed(fixed, draw, scales):
    return fixed + draw.zeta_fixed * scales.fixed * draw.eps_fixed


def propose_no_change(state, draw, scales):
    var = tuple(x + z * a * e for x, z, a, e in zip(state.var, draw.zeta, scales.a, draw.eps))
    return var, _move_fixed(state.fixed, draw, scales), 0.0


def propose_birth(state, draw, scales):
    """
    Split row ``draw.j`` of every block. Returns ``(var, fixed, log_jacobian,
    signed_eps)`` where ``signed_eps`` are the split innovations actually used.
    """
    j = draw.j
    out, signed = [], []
    for x, z, a, s, e, sg in zip(state.var, draw.zeta, scales.a, scales.split, draw.eps, draw.split_sign):
        moved = x + z * a * e
        es = sg * e
        child1 = x[j] + s * es
        child2 = x[j] - s * es
        moved[j] = child1
        out.append(np.insert(moved, j + 1, child2, axis=0))
        signed.append(es)
    dims = [b.shape[1] for b in state.var]
    return tuple(out), _move_fixed(state.fixed, draw, scales), log_split_jacobian(dims, scales), tuple(signed)


def propose_death(state, draw, scales):
    """
    Merge rows ``draw.j`` and ``draw.j + 1``. Returns ``(var, fixed, eps_star,
    log_jacobian)``; ``eps_star`` is the signed recovered split innovation per
    block. ``draw.eps`` is not used for the variable blocks.
    """
    j = draw.j
    out, eps_star = [], []
    for x, z, a, s in zip(state.var, draw.zeta, scales.a, scales.split):
        es = (x[j] - x[j + 1]) / (2 * s)
        merged = 0.5 * (x[j] + x[j + 1])
        moved = x + z * a * np.abs(es)
        moved[j] = merged
        out.append(np.delete(moved, j + 1, axis=0))
        eps_star.append(es)
    dims = [b.shape[1] for b in state.var]
    return tuple(out), _move_fixed(state.fixed, draw, scales), tuple(eps_star), -log_split_jacobian(dims, scales)


def log_std_normal(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(-0.5 * x * x - _HALF_LOG_2PI))


def acceptance_log_prob(log_post_old, log_post_new, log_jacobian, log_proposal_ratio=0.0,
                        log_weight_ratio=0.0, log_zeta_ratio=0.0):
    """
    ``min(0, dlog pi + log|J| + log q_rev/q_fwd + log w_rev/w_fwd + log P(zeta^c)/P(zeta))``.
    """
    if log_post_new == -np.inf or np.isnan(log_post_new):
        return -np.inf
    total = log_post_new - log_post_old + log_jacobian + log_proposal_ratio + log_weight_ratio + log_zeta_ratio
    return min(0.0, total)


def _weight_ratio(weights, fwd, rev):
    w = dict(zip(MOVE_TYPES, weights))
    return log(w[rev]) - log(w[fwd])


def transition(state, target, scales, rng, weights=DEFAULT_WEIGHTS, k_max=None):
    """
    One Metropolis-Hastings transition. ``target(var, fixed)`` returns the log
    density in transformed coordinates. Returns ``(state, move_type, accepted)``.
    """
    draw = draw_move(state, scales, rng, weights)
    move = draw.move_type
    u = rng.random()
    if move == BIRTH:
        if k_max is not None and state.k >= k_max:
            return state, move, False
        var, fixed, log_j, eps = propose_birth(state, draw, scales)
        log_q = -sum(log_std_normal(e) for e in eps)
        log_w = _weight_ratio(weights, BIRTH, DEATH)
    elif move == DEATH:
        if state.k <= 1:
            return state, move, False
        var, fixed, eps_star, log_j = propose_death(state, draw, scales)
        log_q = sum(log_std_normal(e) for e in eps_star)
        log_w = _weight_ratio(weights, DEATH, BIRTH)
    else:
        var, fixed, log_j = propose_no_change(state, draw, scales)
        log_q = log_w = 0.0
    lp = target(var, fixed)
    log_a = acceptance_log_prob(state.log_post, lp, log_j, log_q, log_w)
    if np.log(u) < log_a:
        return ChainState(var, fixed, float(lp)), move, True
    return state, move, False


def step(state, target, scales, rng, weights=DEFAULT_WEIGHTS, k_max=None):
    return transition(state, target, scales, rng, weights, k_max)[0]
