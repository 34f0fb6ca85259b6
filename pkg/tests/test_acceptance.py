"""
Acceptance criteria, one test per criterion. Each test records its outcome
so the terminal summary prints one PASS/FAIL line per criterion.
"""

import math
import pickle
import time

import numpy as np
import pytest

from kcoddp.config import RunConfig
from kcoddp.covariance import (
    KernelMoments,
    NormalG0,
    conditional_cov_f,
    correlation_sweep,
    gaussian_kernel,
    kernel_moments_G0,
    overlap_sets,
    sample_configurations,
    separability_mode_corr,
    spacetime_kernel,
    unconditional_corr_mc,
)
from kcoddp.geometry import ComputationalBox, sample_poisson_configuration
from kcoddp.kernel import sample_fields
from kcoddp.model import Hyper, sample_alpha_prior, sample_prior_state
from kcoddp.oddp import (
    sample_sticks,
    stick_weights,
    tail_moment_T,
    tail_moment_U,
    truncation_bound,
)
from kcoddp.pipeline import (
    HourlyOzoneSeries,
    loo_cross_validation,
    posterior_predictive,
    prepare,
    w126_annual,
    w126_weight,
)
from kcoddp.pipeline.cli import main
from kcoddp.synthgen import GaussianSpec, generate_synthetic, mvn_sample
from kcoddp.ttmcmc import (
    BIRTH,
    DEATH,
    ChainState,
    MoveDraw,
    MoveScales,
    draw_move,
    log_split_jacobian,
    predictive_draws,
    propose_birth,
    propose_death,
    run,
    run_chains,
)
from test_covariance import brute_force_cov, gaussian_moments
from toys import run_dimension_toy, truncated_marginal_l1

ALPHAS = (0.5, 1.0, 5.0)


@pytest.fixture(autouse=True)
def _record_criterion(request):
    mark = request.node.get_closest_marker("criterion")
    if mark is not None:
        num, title = mark.args
        request.node.user_properties.extend([("criterion", num), ("title", title)])
    yield


def note(request, text):
    request.node.user_properties.append(("detail", text))


@pytest.mark.criterion(1, "tail-moment identities within 3 MC standard errors")
def test_criterion_1_tail_moments(request):
    start = time.perf_counter()
    K, reps = 200, 200_000
    worst = 0.0
    for alpha in ALPHAS:
        rng = np.random.default_rng(int(alpha * 100))
        V = sample_sticks(alpha, (reps, K), rng)
        p = stick_weights(V)
        leftover = np.cumprod(1 - V, axis=1)
        tail_bound = (alpha / (alpha + 1)) ** K
        for N in (1, 2, 3):
            # the mass from atom N on is exactly the leftover stick after N - 1 breaks
            mass = np.ones(reps) if N == 1 else leftover[:, N - 2]
            for r in (1, 2):
                for est, closed in ((mass**r, tail_moment_T(N, r, alpha)),
                                    ((p[:, N - 1:] ** r).sum(axis=1), tail_moment_U(N, r, alpha))):
                    se = est.std(ddof=1) / math.sqrt(reps)
                    z = abs(est.mean() - closed) / (se + tail_bound) if se + tail_bound > 0 else 0.0
                    worst = max(worst, z)
                    assert abs(est.mean() - closed) <= 3 * se + tail_bound, (N, r, alpha)
    elapsed = time.perf_counter() - start
    note(request, f"max |z| = {worst:.2f}, {elapsed:.0f}s")
    assert elapsed < 60


@pytest.mark.criterion(2, "closed-form conditional covariance vs 1e6-replicate brute force")
def test_criterion_2_conditional_covariance(request):
    start = time.perf_counter()
    s = 0.9
    x1, x2 = np.array([0.3, -0.2]), np.array([-0.4, 0.5])
    E1, E2, E12 = gaussian_moments(x1, x2, s)
    mom = KernelMoments(E1, E2, E12, 0, 0, 0, 0, 0)
    rng = np.random.default_rng(2024)
    zs = []
    for alpha in ALPHAS:
        o1, o2 = rng.permutation(3), rng.permutation(3)
        tail = math.ceil(math.log(1e-7) / math.log(alpha / (alpha + 1)))
        closed = conditional_cov_f(alpha, overlap_sets(o1, o2), mom, tail="common")
        est, se = brute_force_cov(alpha, o1, o2, x1, x2, s, 1_000_000, rng, tail=tail)
        zs.append(abs(est - closed) / se)
        assert abs(est - closed) < 3 * se, (alpha, o1, o2, est, closed, se)
    # same point: Var f = Var_G0(K) / (alpha + 1)
    alpha = 1.0
    Ex, _, Exx = gaussian_moments(x1, x1, s)
    closed = (Exx - Ex * Ex) / (alpha + 1)
    o = np.arange(3)
    est, se = brute_force_cov(alpha, o, o, x1, x1, s, 1_000_000, rng, tail=24)
    assert conditional_cov_f(alpha, overlap_sets(o, o), KernelMoments(Ex, Ex, Exx, 0, 0, 0, 0, 0),
                             tail="common") == pytest.approx(closed, rel=1e-13)
    zs.append(abs(est - closed) / se)
    assert abs(est - closed) < 3 * se
    elapsed = time.perf_counter() - start
    note(request, f"max |z| = {max(zs):.2f}, {elapsed:.0f}s")
    assert elapsed < 300


@pytest.mark.criterion(3, "unconditional correlation limits at small and large separation")
def test_criterion_3_correlation_limits(request):
    start = time.perf_counter()
    box = ComputationalBox([0, 0, 0], [4, 4, 4])
    lam = 1.0
    assert lam * box.volume >= 30
    rows = correlation_sweep([0.5, 0.5, 3.5], [1, 1, -1], np.geomspace(0.01, 5.0, 8), 1.0, lam, box,
                             spacetime_kernel(3.0), NormalG0.bivariate(), n_configs=1000, n_mc=20_000, rng=3)
    near, far = rows[0], rows[-1]
    elapsed = time.perf_counter() - start
    note(request, f"near {near.estimate:.4f}+-{near.std_error:.4f}, far {far.estimate:.2e}, {elapsed:.0f}s")
    assert near.estimate + 2 * near.std_error >= 0.95
    assert far.estimate - 2 * far.std_error <= 0.05
    assert elapsed < 300


@pytest.mark.criterion(4, "truncation L1 error never exceeds the analytic bound")
def test_criterion_4_truncation_bound(request):
    expected = 4 * (1 / 3) ** 10 + 2 * math.sqrt(2 / math.pi) * (1 / 2) ** 10
    assert abs(truncation_bound(M=1, n=1, alpha=1, N=10) - expected) < 1e-12
    assert truncation_bound(M=1, n=1, alpha=1, N=10) == pytest.approx(1.626e-3, abs=5e-7)
    for alpha in ALPHAS:
        for N in (2, 4, 8):
            hand = 4 * (alpha / (alpha + 2)) ** N + 2 * math.sqrt(2 / math.pi) * (alpha / (alpha + 1)) ** N
            assert abs(truncation_bound(M=1, n=1, alpha=alpha, N=N) - hand) < 1e-12
    ratios = []
    for alpha in ALPHAS:
        l1 = truncated_marginal_l1(alpha, (2, 4, 8), seed=int(alpha * 10))
        for N, dist in l1.items():
            bound = truncation_bound(M=1, n=1, alpha=alpha, N=N)
            ratios.append(dist / bound)
            assert dist <= bound, (alpha, N, dist, bound)
    note(request, f"max L1/bound = {max(ratios):.3g}")


@pytest.mark.criterion(5, "TTMCMC round trip, Jacobians and dimension toy")
def test_criterion_5_ttmcmc(request):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    # (a) birth followed by the reverse death recovers the state
    for _ in range(200):
        k = int(rng.integers(1, 6))
        st = ChainState(tuple(rng.normal(size=(k, d)) for d in (1, 3, 1, 1)), rng.normal(size=6), 0.0)
        sc = MoveScales(tuple(rng.uniform(0.05, 1, 4)), rng.uniform(0.05, 1, 6), tuple(rng.uniform(0.1, 2, 4)))
        draw = draw_move(st, sc, rng, (1, 0, 0))
        var, fixed, log_j, eps = propose_birth(st, draw, sc)
        back = MoveDraw(DEATH, draw.j, draw.eps, draw.eps_fixed,
                        tuple(np.insert(-z, draw.j + 1, 1.0, axis=0) for z in draw.zeta), -draw.zeta_fixed)
        var2, fixed2, eps_star, log_j2 = propose_death(ChainState(var, fixed, 0.0), back, sc)
        for a, b in zip(var2, st.var):
            assert np.max(np.abs(a - b)) <= 1e-12
        assert np.max(np.abs(fixed2 - st.fixed)) <= 1e-12
        for e, es in zip(eps, eps_star):
            assert np.max(np.abs(e - es)) <= 1e-12
        assert log_j == -log_j2
    # (b) Jacobians
    a1 = 0.37
    one = MoveScales((a1,), [1.0], (a1,))
    st1 = ChainState((np.array([[0.2]]),), np.zeros(1), 0.0)
    assert math.exp(propose_birth(st1, draw_move(st1, one, rng, (1, 0, 0)), one)[2]) == pytest.approx(2 * a1, rel=1e-15)
    st2 = ChainState((np.array([[0.2], [0.5]]),), np.zeros(1), 0.0)
    assert math.exp(propose_death(st2, draw_move(st2, one, rng, (0, 1, 0)), one)[3]) == pytest.approx(
        1 / (2 * a1), rel=1e-15)
    a = (0.1, 0.25, 0.5, 0.8)
    four = MoveScales(a, [1.0], a)
    assert math.exp(log_split_jacobian([1, 1, 1, 1], four)) == pytest.approx(16 * np.prod(a), rel=1e-15)
    assert BIRTH != DEATH
    # (c) dimension distribution on the toy target
    p, se, exact = run_dimension_toy(1_000_000, seed=55)
    elapsed = time.perf_counter() - start
    note(request, f"P(k=1) {p:.4f} vs {exact:.4f} (se {se:.4f}), {elapsed:.0f}s")
    assert abs(p - exact) < 3 * se
    assert elapsed < 600


@pytest.mark.criterion(6, "desk-scale LOO coverage, k range and acceptance rates")
def test_criterion_6_end_to_end(request):
    start = time.perf_counter()
    data = prepare(generate_synthetic(2024, n_grid=35, n_holdout=5)).dataset
    assert len(data) == 30
    cfg = RunConfig(seed=11, n_iter=20_000, burn_in=5_000)
    arc = run(data, cfg)
    rates = arc.acceptance_rates()
    rep = loo_cross_validation(data, cfg)
    elapsed = time.perf_counter() - start
    note(request, f"coverage {rep.coverage:.3f} ({rep.n_included}/{rep.n}), k in "
                  f"[{arc.k_trace.min()}, {arc.k_trace.max()}], rates "
                  + ", ".join(f"{m} {r:.3f}" for m, r in rates.items()) + f", {elapsed:.0f}s")
    assert rep.coverage >= 0.85
    assert arc.k_trace.min() >= 1 and arc.k_trace.max() <= 30
    assert all(0.05 < r < 0.9 for r in rates.values())
    assert not any(f.error for f in rep.folds)
    assert elapsed < 1800


@pytest.mark.criterion(7, "W126 hand values and qualitative weight behaviour")
def test_criterion_7_w126(request):
    def sig4(x):
        return float(f"{x:.4g}")

    assert sig4(w126_weight(0.10)) == 0.09854
    assert sig4(w126_weight(0.05)) == 0.005503
    months = np.repeat(np.arange(1, 8), 30)
    res = w126_annual(HourlyOzoneSeries(np.full((210, 12), 0.10), months))
    assert sig4(res.daily[0]) == 1.182
    assert sig4(res.monthly[0]) == 35.47
    assert sig4(res.index) == 106.4
    assert res.exceeds
    low = np.linspace(1e-4, 0.05, 200)
    high = np.linspace(0.10, 0.5, 200)
    # below 0.05 ppm the weighted value is near zero: at most about 11% of q
    edge = w126_weight(0.05) / 0.05
    assert edge < 0.111
    assert np.all(w126_weight(low) / low <= edge) and np.all(w126_weight(low) <= w126_weight(0.05))
    # from 0.10 ppm on the weighting is close to the identity
    assert np.all(w126_weight(high) >= 0.985 * high) and np.all(w126_weight(high) <= high)
    note(request, f"Y = {res.index:.5f}")


def _same(a, b):
    # byte-level comparison also treats matching NaNs as equal
    return pickle.dumps(a) == pickle.dumps(b)


@pytest.mark.criterion(8, "bit-reproducibility of randomized entry points")
def test_criterion_8_determinism(request, tmp_path):
    data = prepare(generate_synthetic(8, n_grid=10, n_holdout=2)).dataset
    box = ComputationalBox([0, 0, 0], [2, 2, 2])
    hyper = Hyper(box=box, locations=data.locations, times=data.times, rho=0.1)
    kern = spacetime_kernel(3.0)
    g0 = NormalG0.bivariate(0.1)
    cfg = RunConfig(seed=42, n_iter=80, burn_in=60, n_chains=2)
    x1, x2 = np.array([0.5, 0.5, 1.5]), np.array([0.7, 0.4, 1.2])
    entry_points = {
        "sample_poisson_configuration": lambda: sample_poisson_configuration(box, 3.0, 1).points,
        "sample_sticks": lambda: sample_sticks(1.0, 50, 1),
        "sample_alpha_prior": lambda: sample_alpha_prior(1.0, 2.0, np.random.default_rng(1), 10),
        "sample_prior_state": lambda: sample_prior_state(hyper, 1)[0].V,
        "sample_fields": lambda: np.concatenate(sample_fields(data.locations, data.times, 5.0, 5.0, 1)),
        "kernel_moments_G0": lambda: kernel_moments_G0(x1, x2, kern, g0, 500, 1),
        "sample_configurations": lambda: [c.points for c in sample_configurations(box, 3.0, 3, 1)][-1],
        "unconditional_corr_mc": lambda: unconditional_corr_mc(x1, x2, 1.0, 3.0, box, 0.5, 20, 1),
        "correlation_sweep": lambda: correlation_sweep(x1, [1, 0, 0], [0.1, 1.0], 1.0, 3.0, box, kern, g0, 20, 500, 1),
        "separability_mode_corr": lambda: separability_mode_corr(
            x1, x2, "space_kernel", 1.0, 3.0, ComputationalBox([0.0], [2.0]), gaussian_kernel(0.5), g0, 20, 500, 1),
        "mvn_sample": lambda: mvn_sample(GaussianSpec(np.zeros(3), np.eye(3)), 1, 5),
        "generate_synthetic": lambda: generate_synthetic(1, n_grid=20, n_holdout=3).y,
        "run": lambda: run(data, cfg).log_post,
        "run_chains": lambda: [a.log_post for a in run_chains(data, cfg)],
        "predictive_draws": lambda: predictive_draws(run(data, cfg), x1, 1),
        "posterior_predictive": lambda: posterior_predictive(run(data, cfg), x1, 1).density,
        "loo_cross_validation": lambda: loo_cross_validation(data.subset(range(5)), cfg.replace(n_iter=40, burn_in=30)),
    }
    for name, fn in entry_points.items():
        assert _same(fn(), fn()), name
    # chains run in worker processes match the serial run
    serial = run_chains(data, cfg, processes=1)
    parallel = run_chains(data, cfg, processes=2)
    assert [a.log_post for a in serial] == [a.log_post for a in parallel]
    assert serial[0].log_post != serial[1].log_post
    # the command line writes identical files for identical seeds
    path = tmp_path / "d.csv"
    main(["simulate", "--seed", "3", "--n-grid", "10", "--n-holdout", "2", "--out", str(path)])
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main(["fit", "--data", str(path), "--seed", "5", "--n-iter", "50", "--burn-in", "40",
                     "--n-chains", "2", "--out-dir", str(out)]) == 0
        outs.append([(out / f).read_bytes() for f in ("samples_0.csv", "samples_1.csv", "acceptance.csv")])
    assert outs[0] == outs[1]
    note(request, f"{len(entry_points) + 2} entry points")
