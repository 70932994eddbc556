"""
Command-line interface.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O failure,
4 malformed or inconsistent data. ``CORRFUSE_LOG=debug|info`` turns on
diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import doe, gd, metrics, tuning
from .correntropy import likelihood_sweep
from .errors import (ConfigError, DataFormatError, DegenerateField, EmptyInput, InsufficientData,
                     LengthMismatch, QuadratureFailure, ZeroResidual)
from .fileio import FilterConfig, load_config, read_imu_csv, read_quat_csv, write_imu_csv, write_quat_csv
from .simulator import generate, preset_experiments

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 2, 3, 4
ALGOS = ("gd", "cgd", "doe", "cdoe")

log = logging.getLogger("corrfuse")


class UsageError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("CORRFUSE_LOG", "").strip().lower()
    if level not in ("debug", "info"):
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if level == "debug" else logging.INFO)


def _float_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _config(path) -> FilterConfig:
    if path is None:
        return FilterConfig()
    return load_config(path)


def _dt(cfg: FilterConfig, stream):
    if cfg.rate is not None:
        return 1.0 / cfg.rate
    if len(stream) < 2:
        raise DataFormatError("cannot infer the sample rate from a single row; set 'rate' in the config", line=2)
    return 1.0 / stream.rate


def run_filter(algo, stream, cfg: FilterConfig):
    """Estimated quaternions ``(N, 4)`` for ``algo`` under ``cfg``."""
    dt = _dt(cfg, stream)
    if algo in ("gd", "cgd"):
        c = cfg.gd_config(dt)
        return (gd.run_gd if algo == "gd" else gd.run_cgd)(stream, c)
    c = cfg.doe_config(dt)
    return (doe.run_doe if algo == "doe" else doe.run_cdoe)(stream, c).quats


# -- subcommands -------------------------------------------------------------

def cmd_simulate(args):
    presets = preset_experiments()
    if args.preset not in presets:
        raise UsageError(f"unknown preset {args.preset!r}; available: {', '.join(sorted(presets))}")
    spec, dist = presets[args.preset]
    sim = generate(spec, dist, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_imu_csv(out / "imu.csv", sim.stream)
    write_quat_csv(out / "truth.csv", sim.stream.t, sim.truth)
    log.info("wrote %d rows to %s", len(sim.stream), out)
    print(f"{args.preset}: {len(sim.stream)} samples -> {out / 'imu.csv'}, {out / 'truth.csv'}")
    return EXIT_OK


def cmd_estimate(args):
    cfg = _config(args.config)
    stream = read_imu_csv(args.input)
    log.debug("loaded %d samples from %s", len(stream), args.input)
    t0 = time.perf_counter()
    quats = run_filter(args.algo, stream, cfg)
    elapsed = time.perf_counter() - t0
    write_quat_csv(args.out, stream.t, quats)
    steps = max(len(stream) - 1, 1)
    print(f"{args.algo}: {steps} steps in {elapsed:.3f} s ({steps / max(elapsed, 1e-12):.0f} steps/s)")
    return EXIT_OK


def _parse_est(item):
    label, sep, path = item.partition("=")
    if not sep:
        return Path(item).stem, item
    return label, path


def cmd_evaluate(args):
    t_truth, truth = read_quat_csv(args.truth)
    ests = [_parse_est(e) for e in args.est]
    loaded = []
    for label, path in ests:
        t_est, q = read_quat_csv(path)
        if q.shape != truth.shape:
            raise LengthMismatch(f"{path} has {q.shape[0]} rows, {args.truth} has {truth.shape[0]}")
        if not np.allclose(t_est, t_truth, rtol=0, atol=1e-6):
            raise LengthMismatch(f"timestamps of {path} do not match {args.truth}")
        loaded.append((label, q))

    def one(item):
        label, q = item
        return metrics.evaluate(q, truth, label, t=t_truth, skip_initial=args.skip_initial)

    # reports are independent; threads only overlap the numpy work
    with ThreadPoolExecutor(max_workers=min(4, len(loaded))) as pool:
        reports = list(pool.map(one, loaded))
    print(metrics.format_table(reports))
    print()
    print(metrics.format_csv(reports), end="")
    return EXIT_OK


def cmd_tune(args):
    cfg = _config(args.config)
    stream = read_imu_csv(args.input)
    if args.truth:
        t_truth, traj = read_quat_csv(args.truth)
        if traj.shape[0] != len(stream):
            raise LengthMismatch(f"truth has {traj.shape[0]} rows, input has {len(stream)}")
        source = "truth"
    else:
        # the plain filter of the family stands in for the unknown attitude
        base = "gd" if tuning.family_of(args.algo) == "gd" else "doe"
        traj = run_filter(base, stream, cfg)
        source = f"{base} estimate"
    stats = tuning.collect_residuals(traj, stream, cfg.earth, args.algo, robust=args.robust)
    sa, sm = tuning.suggest_bandwidths(stats)
    log.info("residuals from %s, n=%d", source, stats.n)
    print(f"# residuals from {source}; d_a={stats.d_a:.6g} d_m={stats.d_m:.6g}")
    print(f"sigma_a = {sa:.6g}")
    print(f"sigma_m = {sm:.6g}")
    if args.histogram:
        ra, rm = tuning.residuals(traj, stream, cfg.earth, args.algo)
        centers, ca, cm = tuning.residual_histogram(ra, rm)
        with open(args.histogram, "w", encoding="utf-8") as fh:
            fh.write("center,count_acc,count_mag\n")
            for c, a, m in zip(centers, ca, cm):
                fh.write(f"{c:.9g},{a},{m}\n")
    return EXIT_OK


def cmd_analyze_likelihood(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    if any(not (0 <= p < 0.5) for p in args.p_grid):
        raise UsageError("every p must lie in [0, 0.5)")
    if any(s <= 0 for s in args.sigma_grid) or args.support_bound <= 0:
        raise UsageError("bandwidths and the support bound must be positive")
    rows = likelihood_sweep(args.p_grid, args.sigma_grid, args.n, args.seed, args.support_bound)
    lines = ["p,sigma,logL_CL,logL_LS"] + [f"{p:.9g},{s:.9g},{cl:.9g},{ls:.9g}" for p, s, cl, ls in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args):
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.repeats < 1:
        raise UsageError("--repeats must be at least 1")
    algos = ALGOS if args.algo == "all" else (args.algo,)
    print("algo,steps,best_us_per_step,mean_us_per_step,steps_per_s,mul_add,div,sqrt,exp_trig")
    for a in algos:
        r = bench_mod.bench(a, args.steps, repeats=args.repeats, seed=args.seed)
        ops = bench_mod.OP_COUNTS[a]
        print(f"{a},{r.steps},{r.best_per_step_s * 1e6:.3f},{r.mean_per_step_s * 1e6:.3f},{r.steps_per_s:.0f},"
              f"{ops['mul_add']},{ops['div']},{ops['sqrt']},{ops['exp_trig']}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="corrfuse", description="Correntropy-based IMU attitude estimation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic preset run as imu.csv + truth.csv")
    p.add_argument("--preset", required=True, help="exp1 .. exp5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run a filter over an IMU log")
    p.add_argument("--algo", required=True, choices=ALGOS)
    p.add_argument("--input", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="per-axis RMSE / max error against ground truth")
    p.add_argument("--est", required=True, action="append", help="estimate CSV, optionally label=path; repeatable")
    p.add_argument("--truth", required=True)
    p.add_argument("--skip-initial", type=float, default=0.0, help="seconds to drop at the start")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="suggest kernel bandwidths from disturbance-free data")
    p.add_argument("--algo", required=True, choices=ALGOS)
    p.add_argument("--input", required=True)
    p.add_argument("--truth", help="reference attitudes; without it the plain filter estimate is used")
    p.add_argument("--config")
    p.add_argument("--robust", action="store_true", help="use the scaled MAD instead of the RMS")
    p.add_argument("--histogram", help="write residual histograms to this CSV")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("analyze-likelihood", help="log-likelihood sweep under mixture noise")
    p.add_argument("--p-grid", type=_float_list, default=[0.1, 0.2, 0.3])
    p.add_argument("--sigma-grid", type=_float_list, default=[0.5, 1, 2, 3, 5, 10, 20, 50, 100])
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--support-bound", type=float, default=20.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze_likelihood)

    p = sub.add_parser("bench", help="per-step wall time on a synthetic stream")
    p.add_argument("--algo", default="all", choices=ALGOS + ("all",))
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, LengthMismatch, EmptyInput, InsufficientData, ZeroResidual,
            DegenerateField, UnicodeDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except QuadratureFailure as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
