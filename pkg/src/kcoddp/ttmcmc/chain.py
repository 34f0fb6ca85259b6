"""
The spatio-temporal model as a TTMCMC target, chain orchestration and the
sample archive.

Chain coordinates:

* variable blocks ``log V`` (k, 1), ``logit`` of the box-scaled ``z``
  (k, 3), ``theta1`` (k, 1), ``theta2`` (k, 1);
* fixed vector ``[phi, a_delta, b_psi, log alpha, log lambda, tau,
  log sigma, w1, w2, w_delta, (alpha0, alpha1)]`` where the latent fields
  are whitened, ``psi = L(b_psi) w`` and ``log delta = L(a_delta) w_delta``.

The target is the joint log-posterior of the original parameters plus the
log-Jacobian of this map.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import log_expit, logit

from .._random import make_rng, spawn_seeds
from ..config import RunConfig
from ..geometry import as_points, computational_region
from ..kernel import FactorizationError
from ..model import (
    Dataset,
    FixedState,
    Hyper,
    VariableState,
    empirical_rho,
    f_values,
    log_posterior,
)
from .moves import MOVE_TYPES, ChainState, MoveScales, transition

N_SCALAR_FIXED = 7


def build_hyper(data, config):
    pts = data.points
    box = computational_region(pts.min(axis=0), pts.max(axis=0), config.box_alpha,
                               config.box_lambda, config.epsilon, d=3)
    return Hyper(
        box=box, locations=data.locations, times=data.times,
        rho=empirical_rho(data.locations), k_max=config.k_max, n0=config.n0, eta=config.eta,
        b_lambda=config.b_lambda, A=config.A, bounds=tuple(config.bounds),
        sigma_log_sd=100.0 if data.regression else 1.0,
        regression=data.regression, ordering_mode=config.ordering_mode,
    )


class ModelTarget:
    """Log-density of the model in chain coordinates."""

    def __init__(self, data, hyper):
        self.data = data
        self.hyper = hyper
        self.n = len(data)
        self.regression = data.regression

    @property
    def fixed_len(self):
        return N_SCALAR_FIXED + 3 * self.n + (2 if self.regression else 0)

    def decode(self, var, fixed):
        """(VariableState, FixedState, log_jacobian), or ``None`` outside the support."""
        h = self.hyper
        v_star = var[0][:, 0]
        if np.any(v_star >= 0):
            return None
        lo, hi = h.bounds
        phi, a_delta, b_psi = fixed[0], fixed[1], fixed[2]
        if not (lo < phi < hi and lo < a_delta < hi and lo < b_psi < hi):
            return None
        try:
            L_psi = h.chol_psi(b_psi)
            L_del = h.chol_delta(a_delta)
        except FactorizationError:
            return None
        n = self.n
        z_star = var[1]
        box = h.box
        z = box.lower + box.widths * np.exp(log_expit(z_star))
        log_jac = float(v_star.sum())
        log_jac += float(np.sum(np.log(box.widths) + log_expit(z_star) + log_expit(-z_star)))
        log_jac += float(fixed[3] + fixed[4] + fixed[6])
        log_jac += float(2 * np.log(np.diag(L_psi)).sum() + np.log(np.diag(L_del)).sum())
        w = fixed[N_SCALAR_FIXED:N_SCALAR_FIXED + 3 * n]
        psi1 = L_psi @ w[:n]
        psi2 = L_psi @ w[n:2 * n]
        log_delta = L_del @ w[2 * n:]
        a0, a1 = (fixed[-2], fixed[-1]) if self.regression else (0.0, 0.0)
        vs = VariableState(np.exp(v_star), z, var[2][:, 0], var[3][:, 0])
        fs = FixedState(phi, a_delta, b_psi, psi1, psi2, log_delta, fixed[5], np.exp(fixed[3]),
                        np.exp(fixed[4]), np.exp(fixed[6]), a0, a1)
        return vs, fs, log_jac

    def encode(self, vs, fs):
        h = self.hyper
        box = h.box
        u = (vs.z - box.lower) / box.widths
        var = (np.log(vs.V)[:, None], logit(u), vs.theta1[:, None].copy(), vs.theta2[:, None].copy())
        L_psi = h.chol_psi(fs.b_psi)
        L_del = h.chol_delta(fs.a_delta)
        w1 = solve_triangular(L_psi, fs.psi1, lower=True)
        w2 = solve_triangular(L_psi, fs.psi2, lower=True)
        wd = solve_triangular(L_del, fs.log_delta, lower=True)
        head = [fs.phi, fs.a_delta, fs.b_psi, np.log(fs.alpha), np.log(fs.lam), fs.tau, np.log(fs.sigma)]
        tail = [fs.alpha0, fs.alpha1] if self.regression else []
        return var, np.concatenate([head, w1, w2, wd, tail]).astype(float)

    def __call__(self, var, fixed):
        dec = self.decode(var, fixed)
        if dec is None:
            return -np.inf
        vs, fs, log_jac = dec
        if vs.k > self.hyper.k_max:
            return -np.inf
        lp = log_posterior(vs, fs, self.data, self.hyper)
        return lp + log_jac if np.isfinite(lp) else -np.inf


def expand_scales(config, n, regression):
    """Per-coordinate move scales for the model's chain coordinates."""
    a = config.scales
    fixed = list(a[4:11]) + [a[11]] * n + [a[12]] * n + [a[13]] * n
    if regression:
        fixed += list(config.reg_scales)
    return MoveScales(a[:4], np.array(fixed), config.split_scales)


def initial_state(target, config, rng):
    """Starting point: ``k_init`` prior-like atoms and central fixed values."""
    h = target.hyper
    data = target.data
    init = dict(config.init)
    k = config.k_init
    V = np.clip(rng.beta(1.0, 1.0, size=k), 1e-6, 1 - 1e-6)
    box = h.box
    u = np.clip(rng.random((k, 3)), 1e-6, 1 - 1e-6)
    z = box.lower + u * box.widths
    theta = rng.multivariate_normal(np.zeros(2), h.g0_cov(), size=k)
    n = len(data)
    y_sd = float(np.std(data.y)) if n > 1 else 1.0
    fs = FixedState(
        phi=init.get("phi", 5.0), a_delta=init.get("a_delta", 10.0), b_psi=init.get("b_psi", 10.0),
        psi1=np.zeros(n), psi2=np.zeros(n), log_delta=np.zeros(n), tau=init.get("tau", 0.0),
        alpha=init.get("alpha", 1.0), lam=init.get("lam", 1.0), sigma=init.get("sigma", y_sd or 1.0),
        alpha0=init.get("alpha0", float(np.mean(data.y)) if data.regression else 0.0),
        alpha1=init.get("alpha1", 0.0),
    )
    var, fixed = target.encode(VariableState(V, z, theta[:, 0], theta[:, 1]), fs)
    return ChainState(var, fixed, float(target(var, fixed)))


@dataclass
class SampleArchive:
    """Retained draws of one chain plus run diagnostics."""

    iters: list = field(default_factory=list)
    var: list = field(default_factory=list)
    fixed: list = field(default_factory=list)
    log_post: list = field(default_factory=list)
    k_trace: np.ndarray = None
    proposed: dict = field(default_factory=lambda: dict.fromkeys(MOVE_TYPES, 0))
    accepted: dict = field(default_factory=lambda: dict.fromkeys(MOVE_TYPES, 0))
    hyper: Hyper = None
    data: Dataset = None
    chain: int = 0
    seed: int = None

    def __len__(self):
        return len(self.iters)

    def acceptance_rates(self):
        return {m: (self.accepted[m] / self.proposed[m] if self.proposed[m] else float("nan"))
                for m in MOVE_TYPES}

    def k_values(self):
        return np.array([v.k for v in self.var], dtype=int)

    def scalar(self, name):
        return np.array([getattr(f, name) for f in self.fixed], dtype=float)


def run(data, config=None, n_iter=None, burn_in=None, thin=None, seed=None, chain=0, callback=None):
    """Run one chain; arguments override the matching ``config`` fields."""
    config = RunConfig() if config is None else config
    over = {k: v for k, v in dict(n_iter=n_iter, burn_in=burn_in, thin=thin, seed=seed).items() if v is not None}
    if over:
        config = config.replace(**over)
    rng = make_rng(config.seed)
    hyper = build_hyper(data, config)
    target = ModelTarget(data, hyper)
    scales = expand_scales(config, len(data), data.regression)
    state = initial_state(target, config, rng)
    if not np.isfinite(state.log_post):
        raise RuntimeError("initial state has zero posterior density")
    arc = SampleArchive(hyper=hyper, data=data, chain=chain, seed=config.seed)
    k_trace = np.empty(config.n_iter, dtype=int)
    for it in range(1, config.n_iter + 1):
        state, move, acc = transition(state, target, scales, rng, config.move_weights, config.k_max)
        arc.proposed[move] += 1
        arc.accepted[move] += int(acc)
        k_trace[it - 1] = state.k
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            vs, fs, _ = target.decode(state.var, state.fixed)
            arc.iters.append(it)
            arc.var.append(vs)
            arc.fixed.append(fs)
            arc.log_post.append(state.log_post)
        if callback is not None:
            callback(it, state)
    arc.k_trace = k_trace
    return arc


def _run_star(args):
    data, config, chain = args
    return run(data, config, chain=chain)


def run_chains(data, config=None, n_chains=None, seed=None, processes=1):
    """Independent chains with seeds spawned from one master seed."""
    config = RunConfig() if config is None else config
    n_chains = config.n_chains if n_chains is None else n_chains
    seed = config.seed if seed is None else seed
    jobs = [(data, config.replace(seed=s), c) for c, s in enumerate(spawn_seeds(seed, n_chains))]
    if processes > 1 and n_chains > 1:
        with ProcessPoolExecutor(processes) as ex:
            return list(ex.map(_run_star, jobs))
    return [_run_star(j) for j in jobs]


# --- field values at new sites and predictive draws ----------------------------------


def _conditional_weights(L, cross):
    v = solve_triangular(L, cross, lower=True)
    return v, np.maximum(1.0 - (v * v).sum(axis=0), 0.0)


def fields_at(hyper, fixed, x_new, rng=None):
    """
    Draw (psi1, psi2, log_delta) at new points from the GP conditional given
    the field values at the data sites. With ``rng=None`` the conditional
    means are returned.
    """
    x_new = as_points(x_new, 3)
    L_psi = hyper.chol_psi(fixed.b_psi)
    L_del = hyper.chol_delta(fixed.a_delta)
    d2 = ((x_new[:, None, :2] - hyper.locations[None, :, :]) ** 2).sum(-1)
    c_psi = np.exp(-d2 / fixed.b_psi).T
    c_del = np.exp(-((x_new[:, 2][None, :] - hyper.times[:, None]) ** 2) / fixed.a_delta)
    v_psi, var_psi = _conditional_weights(L_psi, c_psi)
    v_del, var_del = _conditional_weights(L_del, c_del)
    w1 = solve_triangular(L_psi, fixed.psi1, lower=True)
    w2 = solve_triangular(L_psi, fixed.psi2, lower=True)
    wd = solve_triangular(L_del, fixed.log_delta, lower=True)
    out = [v_psi.T @ w1, v_psi.T @ w2, v_del.T @ wd]
    if rng is not None:
        sd = [np.sqrt(var_psi), np.sqrt(var_psi), np.sqrt(var_del)]
        out = [m + s * rng.standard_normal(len(m)) for m, s in zip(out, sd)]
    return tuple(out)


def f_draws(archive, x_new, rng=None):
    """f at ``x_new`` for every retained state, shape (n_draws, n_points)."""
    x_new = as_points(x_new, 3)
    rows = []
    for vs, fs in zip(archive.var, archive.fixed):
        p1, p2, ld = fields_at(archive.hyper, fs, x_new, rng)
        rows.append(f_values(x_new, vs, fs, p1, p2, ld, archive.hyper.A, archive.hyper.ordering_mode))
    return np.array(rows).reshape(len(rows), len(x_new))


def predictive_draws(archive, x_new, rng=None, covariate=None):
    """y draws at ``x_new``: f plus the regression mean plus N(0, sigma^2) noise per state."""
    rng = make_rng(rng)
    f = f_draws(archive, x_new, rng)
    sigma = archive.scalar("sigma")[:, None]
    mean = f
    if archive.hyper.regression:
        if covariate is None:
            raise ValueError("regression fits need the covariate at the new points")
        a0 = archive.scalar("alpha0")[:, None]
        a1 = archive.scalar("alpha1")[:, None]
        mean = mean + a0 + a1 * np.atleast_1d(covariate)[None, :]
    return mean + sigma * rng.standard_normal(f.shape)


# --- CSV persistence ------------------------------------------------------------------

SAMPLE_COLUMNS = (
    "iter", "k", "V", "z_s1", "z_s2", "z_t", "theta1", "theta2",
    "phi", "a_delta", "b_psi", "tau", "alpha", "lambda", "sigma", "alpha0", "alpha1",
    "psi1", "psi2", "log_delta", "log_post",
)


def _join(values):
    return ";".join(repr(float(v)) for v in values)


def _split(text):
    return np.array([float(v) for v in text.split(";")]) if text else np.empty(0)


def write_samples_csv(archive, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_NONNUMERIC)
        w.writerow(SAMPLE_COLUMNS)
        for it, vs, fs, lp in zip(archive.iters, archive.var, archive.fixed, archive.log_post):
            w.writerow([
                it, vs.k, _join(vs.V), _join(vs.z[:, 0]), _join(vs.z[:, 1]), _join(vs.z[:, 2]),
                _join(vs.theta1), _join(vs.theta2),
                float(fs.phi), float(fs.a_delta), float(fs.b_psi), float(fs.tau), float(fs.alpha),
                float(fs.lam), float(fs.sigma), float(fs.alpha0), float(fs.alpha1),
                _join(fs.psi1), _join(fs.psi2), _join(fs.log_delta), float(lp),
            ])


def read_samples_csv(path):
    """Rows of a samples CSV as (iters, VariableStates, FixedStates, log_posts)."""
    iters, var, fixed, lps = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh, quoting=csv.QUOTE_NONNUMERIC)
        header = next(r)
        if tuple(header) != SAMPLE_COLUMNS:
            raise ValueError(f"{path}: unexpected header")
        for row in r:
            rec = dict(zip(SAMPLE_COLUMNS, row))
            z = np.column_stack([_split(rec["z_s1"]), _split(rec["z_s2"]), _split(rec["z_t"])])
            var.append(VariableState(_split(rec["V"]), z, _split(rec["theta1"]), _split(rec["theta2"])))
            fixed.append(FixedState(rec["phi"], rec["a_delta"], rec["b_psi"], _split(rec["psi1"]),
                                    _split(rec["psi2"]), _split(rec["log_delta"]), rec["tau"],
                                    rec["alpha"], rec["lambda"], rec["sigma"], rec["alpha0"], rec["alpha1"]))
            iters.append(int(rec["iter"]))
            lps.append(rec["log_post"])
    return iters, var, fixed, lps


def write_acceptance_csv(archives, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["chain", "move_type", "proposed", "accepted", "rate"])
        for arc in archives:
            rates = arc.acceptance_rates()
            for m in MOVE_TYPES:
                w.writerow([arc.chain, m, arc.proposed[m], arc.accepted[m], repr(rates[m])])


def read_acceptance_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [dict(chain=int(r["chain"]), move_type=r["move_type"], proposed=int(r["proposed"]),
                     accepted=int(r["accepted"]), rate=float(r["rate"])) for r in csv.DictReader(fh)]
