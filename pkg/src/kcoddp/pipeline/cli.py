"""Command-line entry point: ``kcoddp <subcommand> ...``."""

import argparse
import sys
from pathlib import Path

import numpy as np

from .. import oddp
from ..covariance import NormalG0, correlation_sweep, spacetime_kernel
from ..geometry import ComputationalBox
from ..synthgen import generate_synthetic
from ..ttmcmc import SampleArchive, build_hyper, read_samples_csv, run_chains, write_acceptance_csv, write_samples_csv
from .config import resolve_config
from .io import load_dataset, write_corr_sweep_csv, write_dataset_csv
from .predictive import loo_cross_validation, posterior_predictive, write_loo_csv, write_predictive_csv
from .w126 import read_hourly_csv, w126_annual


class UsageError(Exception):
    pass


def _add_run_options(p):
    p.add_argument("--data", required=True, help="CSV with header s1,s2,t,y[,x_cmaq]")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-iter", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--out-dir", default=".")


def build_parser():
    ap = argparse.ArgumentParser(prog="kcoddp", description="Kernel-convolved ODDP space-time models")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-grid", type=int, default=100)
    p.add_argument("--n-holdout", type=int, default=5)
    p.add_argument("--box-side", type=float, default=50.0)
    p.add_argument("--out", default="synthetic.csv")

    p = sub.add_parser("fit", help="run TTMCMC chains")
    _add_run_options(p)
    p.add_argument("--n-chains", type=int)

    p = sub.add_parser("loo", help="leave-one-out predictive coverage")
    _add_run_options(p)
    p.add_argument("--processes", type=int, default=1)

    p = sub.add_parser("predict", help="predictive summaries from a samples file")
    p.add_argument("--data", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--points", required=True,
                   help="raw-scale points 's1,s2,t[,x_cmaq];...'")
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("corr", help="unconditional correlation against separation")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=3.0)
    p.add_argument("--n-configs", type=int, default=1000)
    p.add_argument("--n-mc", type=int, default=20000)
    p.add_argument("--n-sep", type=int, default=8)
    p.add_argument("--min-sep", type=float, default=0.01)
    p.add_argument("--max-sep", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("bound", help="truncation error bound")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--N", type=int, required=True)

    p = sub.add_parser("w126", help="annual W126 index from hourly ozone")
    p.add_argument("--hourly", required=True, help="CSV with header day,hour,q_ppm[,month]")
    return ap


def _run_config(args, **extra):
    over = dict(seed=args.seed, n_iter=args.n_iter, burn_in=args.burn_in, thin=args.thin, **extra)
    try:
        return resolve_config(args.config, over)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _out_dir(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    ds = generate_synthetic(args.seed, args.n_grid, args.n_holdout, args.box_side)
    write_dataset_csv(ds, args.out)
    print(f"wrote {len(ds)} points to {args.out}")


def cmd_fit(args):
    cfg = _run_config(args, n_chains=args.n_chains)
    prep = load_dataset(args.data)
    out = _out_dir(args)
    archives = run_chains(prep.dataset, cfg)
    for arc in archives:
        write_samples_csv(arc, out / f"samples_{arc.chain}.csv")
    write_acceptance_csv(archives, out / "acceptance.csv")
    for arc in archives:
        rates = ", ".join(f"{m}={r:.3f}" for m, r in arc.acceptance_rates().items())
        print(f"chain {arc.chain}: {len(arc)} draws; acceptance {rates}")


def cmd_loo(args):
    cfg = _run_config(args)
    prep = load_dataset(args.data)
    out = _out_dir(args)
    rep = loo_cross_validation(prep.dataset, cfg, args.processes)
    write_loo_csv(rep, out / "loo_report.csv")
    print(f"coverage {rep.coverage:.4f} ({rep.n_included}/{rep.n})")


def _parse_points(text):
    pts = []
    for chunk in text.split(";"):
        vals = [float(v) for v in chunk.split(",") if v.strip()]
        if len(vals) not in (3, 4):
            raise UsageError(f"point {chunk!r} needs s1,s2,t[,x_cmaq]")
        pts.append(vals)
    return pts


def cmd_predict(args):
    cfg = resolve_config(args.config, dict(seed=args.seed))
    prep = load_dataset(args.data)
    iters, var, fixed, lps = read_samples_csv(args.samples)
    arc = SampleArchive(iters=iters, var=var, fixed=fixed, log_post=lps,
                        hyper=build_hyper(prep.dataset, cfg), data=prep.dataset)
    out = _out_dir(args)
    rng = np.random.default_rng(cfg.seed)
    for i, p in enumerate(_parse_points(args.points)):
        x = prep.scaling.apply(np.array(p[:3]))
        cov = None
        if prep.dataset.regression:
            if len(p) != 4:
                raise UsageError("regression fits need x_cmaq for every point")
            cov = np.log([p[3]])
        s = posterior_predictive(arc, x, rng, cov)
        write_predictive_csv(s, out / f"predictive_{i}.csv")
        print(f"point {i}: median {s.median:.6g} 95% [{s.lower:.6g}, {s.upper:.6g}]")


def cmd_corr(args):
    if args.n_sep < 2 or not 0 < args.min_sep < args.max_sep:
        raise UsageError("need n_sep >= 2 and 0 < min_sep < max_sep")
    box = ComputationalBox(np.zeros(3), np.full(3, 4.0))
    x0 = np.array([0.5, 0.5, 3.5])
    seps = np.geomspace(args.min_sep, args.max_sep, args.n_sep)
    rows = correlation_sweep(x0, np.array([1.0, 1.0, -1.0]), seps, args.alpha, args.lam, box,
                             spacetime_kernel(args.phi), NormalG0.bivariate(), args.n_configs,
                             args.n_mc, args.seed)
    out = _out_dir(args)
    write_corr_sweep_csv(rows, out / "corr_sweep.csv")
    for r in rows:
        print(f"{r.separation:.4g}\t{r.estimate:.4f}\t{r.std_error:.4f}")


def cmd_bound(args):
    try:
        print(f"{oddp.truncation_bound(M=args.M, n=args.n, alpha=args.alpha, N=args.N):.6e}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_w126(args):
    res = w126_annual(read_hourly_csv(args.hourly))
    print(f"W126 {res.index:.6g} ppm-hours; exceeds threshold: {'yes' if res.exceeds else 'no'}")


COMMANDS = dict(simulate=cmd_simulate, fit=cmd_fit, loo=cmd_loo, predict=cmd_predict,
                corr=cmd_corr, bound=cmd_bound, w126=cmd_w126)


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"kcoddp {args.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"kcoddp {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
