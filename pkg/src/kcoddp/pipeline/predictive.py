"""Posterior predictive summaries and leave-one-out cross-validation."""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .._random import make_rng, spawn_seeds
from ..ttmcmc import predictive_draws, run

GRID_SIZE = 256
LEVELS = (0.025, 0.5, 0.975)


@dataclass(frozen=True)
class PredictiveSummary:
    median: float
    lower: float
    upper: float
    grid: np.ndarray
    density: np.ndarray
    draws: np.ndarray = field(repr=False, default=None)


def normal_reference_bandwidth(draws):
    draws = np.asarray(draws, dtype=float)
    return 1.06 * draws.std(ddof=1) * len(draws) ** (-0.2) if len(draws) > 1 else 0.0


def density_grid(draws, size=GRID_SIZE):
    """Gaussian kernel density on ``size`` points spanning the draw range +/- 10%."""
    draws = np.asarray(draws, dtype=float).ravel()
    lo, hi = draws.min(), draws.max()
    pad = 0.1 * (hi - lo) if hi > lo else 0.1 * max(abs(lo), 1.0)
    grid = np.linspace(lo - pad, hi + pad, size)
    h = normal_reference_bandwidth(draws)
    if hi == lo or h <= 0:
        # all draws equal: put the unit mass on the nearest grid cell
        dens = np.zeros(size)
        dens[np.argmin(np.abs(grid - lo))] = 1.0 / (grid[1] - grid[0])
        return grid, dens
    u = (grid[:, None] - draws[None, :]) / h
    dens = np.exp(-0.5 * u * u).sum(axis=1) / (len(draws) * h * np.sqrt(2 * np.pi))
    return grid, dens


def summarize_draws(draws):
    draws = np.asarray(draws, dtype=float).ravel()
    if draws.size == 0:
        raise ValueError("no predictive draws")
    lower, median, upper = np.quantile(draws, LEVELS)
    grid, dens = density_grid(draws)
    return PredictiveSummary(float(median), float(lower), float(upper), grid, dens, draws)


def posterior_predictive(archive, x_new, rng=None, covariate=None):
    """Median, 95% interval and density of the predictive law at one new point."""
    if len(archive) == 0:
        raise ValueError("archive is empty")
    draws = predictive_draws(archive, x_new, rng, covariate)[:, 0]
    return summarize_draws(draws)


def write_predictive_csv(summary, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "x", "value"])
        for level, v in zip(LEVELS, (summary.lower, summary.median, summary.upper)):
            w.writerow(["quantile", repr(level), repr(v)])
        for g, d in zip(summary.grid, summary.density):
            w.writerow(["density", repr(float(g)), repr(float(d))])


def read_predictive_csv(path):
    q, grid, dens = {}, [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["kind"] == "quantile":
                q[float(row["x"])] = float(row["value"])
            else:
                grid.append(float(row["x"]))
                dens.append(float(row["value"]))
    return PredictiveSummary(q[0.5], q[0.025], q[0.975], np.array(grid), np.array(dens))


@dataclass(frozen=True)
class FoldResult:
    index: int
    y: float
    lower: float
    median: float
    upper: float
    included: bool
    error: str = ""


@dataclass(frozen=True)
class CoverageReport:
    folds: tuple

    @property
    def n(self):
        return len(self.folds)

    @property
    def n_included(self):
        return sum(f.included for f in self.folds)

    @property
    def coverage(self):
        return self.n_included / self.n if self.n else float("nan")


def _fold(args):
    data, config, i, seed = args
    run_seed, pred_seed = spawn_seeds(seed, 2)
    idx = np.setdiff1d(np.arange(len(data)), [i])
    try:
        arc = run(data.subset(idx), config.replace(seed=run_seed))
        cov = None if data.covariate is None else data.covariate[i:i + 1]
        s = posterior_predictive(arc, data.points[i], make_rng(pred_seed), cov)
    except Exception as exc:  # a failed fold is reported, not fatal
        return FoldResult(i, float(data.y[i]), np.nan, np.nan, np.nan, False, f"{type(exc).__name__}: {exc}")
    y = float(data.y[i])
    return FoldResult(i, y, s.lower, s.median, s.upper, bool(s.lower <= y <= s.upper))


def loo_cross_validation(data, config, processes=1):
    """Refit without each point in turn and check its 95% predictive interval."""
    if len(data) < 3:
        raise ValueError("leave-one-out needs at least 3 points")
    seeds = spawn_seeds(config.seed, len(data))
    jobs = [(data, config, i, s) for i, s in enumerate(seeds)]
    if processes > 1:
        with ProcessPoolExecutor(processes) as ex:
            folds = list(ex.map(_fold, jobs))
    else:
        folds = [_fold(j) for j in jobs]
    return CoverageReport(tuple(folds))


LOO_COLUMNS = ("index", "y", "lower", "median", "upper", "included", "error")


def write_loo_csv(report, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(LOO_COLUMNS)
        for f in report.folds:
            w.writerow([f.index, repr(f.y), repr(f.lower), repr(f.median), repr(f.upper), int(f.included), f.error])


def read_loo_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        folds = [FoldResult(int(r["index"]), float(r["y"]), float(r["lower"]), float(r["median"]),
                            float(r["upper"]), bool(int(r["included"])), r["error"])
                 for r in csv.DictReader(fh)]
    return CoverageReport(tuple(folds))
