"""Command line front end.

    delaypred check-delay  --config fig2
    delaypred horizon      --config fig2 --method euler --h 1e-3 --T 12
    delaypred gen-dataset  --n 2000 --seed 0 --out data.nopc
    delaypred simulate     --config fig2 --out trace.csv
    delaypred margins      --config fig2 --out margins.csv
    delaypred bench        --config fig2 --h 1e-2 --out bench.csv

Exit codes: 0 success, 1 configuration or usage error, 2 delay
assumption violation, 3 numerical failure, 4 I/O or container error.
Commands that write delimited output also render a PNG figure next to
it unless --no-plot is given. HPL_THREADS overrides --threads.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import report
from .config import (load_config, parse_horizon, parse_init, parse_pair,
                     parse_plant, parse_sim)
from .delays import check_assumptions, sample_delay
from .errors import (AssumptionViolation, ConfigError, ContainerFormatError,
                     DelayPredError, NumericError)
from .fno import load_weights
from .plant import gamma_decay_fit, simulate


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1, not argparse's default 2
    def error(self, message):
        raise ConfigError(message)


def _threads(args) -> int:
    env = os.environ.get("HPL_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HPL_THREADS must be an integer, got {env!r}")
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


def _fig_path(out) -> Path:
    return Path(out).with_suffix(".png")


def _load_weights_arg(args):
    if args.method == "fno":
        if not args.weights:
            raise ConfigError("--method fno requires --weights PATH")
        return load_weights(args.weights)
    return None


def _build_parser() -> _Parser:
    p = _Parser(prog="delaypred",
                description="predictor feedback under time-varying delays")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default="fig2",
                        help="config file path or built-in name (default: fig2)")
        sp.add_argument("--no-plot", action="store_true",
                        help="skip the PNG figure next to the delimited output")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker processes where applicable "
                             "(default: logical cores; HPL_THREADS wins)")

    sp = sub.add_parser("check-delay", help="validate the delay assumptions")
    common(sp)
    sp.add_argument("--T", type=float, default=12.0)

    sp = sub.add_parser("horizon", help="solve the prediction horizon")
    common(sp)
    sp.add_argument("--method", default="oracle",
                    choices=["oracle", "euler", "rk4", "windowed", "fno"])
    sp.add_argument("--h", type=float, default=1e-3, help="step size")
    sp.add_argument("--T", type=float, default=12.0)
    sp.add_argument("--window", type=float, default=1.0,
                    help="re-anchor interval for --method windowed")
    sp.add_argument("--weights", default=None, help="weight container for --method fno")
    sp.add_argument("--out", default="horizon.csv")

    sp = sub.add_parser("gen-dataset", help="generate a horizon dataset container")
    common(sp)
    sp.add_argument("--n", type=int, required=True, help="number of samples")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--resolution", type=int, default=1024)
    sp.add_argument("--H", type=float, default=12.0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("simulate", help="run the closed loop and report decay")
    common(sp)
    sp.add_argument("--method", default=None,
                    choices=["oracle", "euler", "rk4", "windowed", "fno"],
                    help="horizon method (default: config)")
    sp.add_argument("--h", type=float, default=None, help="horizon step (default: config)")
    sp.add_argument("--window", type=float, default=None)
    sp.add_argument("--weights", default=None)
    sp.add_argument("--psi-offset", type=float, default=0.0,
                    help="additive horizon perturbation for robustness runs")
    sp.add_argument("--out", default="trace.csv")

    sp = sub.add_parser("margins", help="compute stability margin constants")
    common(sp)
    sp.add_argument("--T", type=float, default=12.0)
    sp.add_argument("--out", default="margins.csv")

    sp = sub.add_parser("bench", help="compare horizon methods")
    common(sp)
    sp.add_argument("--methods", default="oracle,euler,rk4")
    sp.add_argument("--h", type=float, default=1e-2)
    sp.add_argument("--T", type=float, default=12.0)
    sp.add_argument("--n-delays", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--window", type=float, default=1.0)
    sp.add_argument("--weights", default=None)
    sp.add_argument("--out", default="bench.csv")
    return p


# --------------------------------------------------------------------------
# subcommands

def _cmd_check_delay(args) -> int:
    cfg = load_config(args.config)
    pair = parse_pair(cfg)
    bad = []
    for label, delay in (("d1", pair.d1), ("d2", pair.d2)):
        r = check_assumptions(delay, t_end=args.T)
        state = "ok" if r.valid else f"VIOLATED at t = {r.first_violation_time:g}"
        print(f"{label}: pi0* = {r.pi0_star:.6g}  pi1* = {r.pi1_star:.6g}  "
              f"pi2* = {r.pi2_star:.6g}  pi3* = {r.pi3_star:.6g}  [{state}]")
        if not r.valid:
            bad.append((label, r))
    if bad:
        raise AssumptionViolation(
            f"{', '.join(l for l, _ in bad)} violate the delay assumptions",
            report=bad[0][1])
    return 0


def _cmd_horizon(args) -> int:
    cfg = load_config(args.config)
    pair = parse_pair(cfg)
    weights = _load_weights_arg(args)
    series = bench_mod._run_method(args.method, pair.d1, args.h, args.T,
                                   weights=weights, window=args.window)
    series.to_csv(args.out, delay=pair.d1)
    res = series.residuals(pair.d1)
    print(f"method = {series.method}  points = {series.grid.size}  "
          f"max residual = {res.max():.3e}  mean residual = {res.mean():.3e}")
    print(f"wrote {args.out}")
    if not args.no_plot:
        report.render_horizon_figure(series, pair.d1, _fig_path(args.out))
        print(f"wrote {_fig_path(args.out)}")
    return 0


def _cmd_gen_dataset(args) -> int:
    meta = bench_mod.gen_dataset(args.n, args.seed, args.out,
                                 resolution=args.resolution, H=args.H,
                                 threads=_threads(args))
    print(f"wrote {args.out}: n = {meta['n_samples']}  resolution = "
          f"{meta['resolution']}  seed = {meta['seed']}  H = {meta['H']:g}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    plant = parse_plant(cfg)
    pair = parse_pair(cfg)
    init = parse_init(cfg, plant)
    T, dt = parse_sim(cfg)
    hcfg = parse_horizon(cfg)
    method = args.method or hcfg["method"]
    h = args.h if args.h is not None else hcfg["h"]
    window = args.window if args.window is not None else hcfg["window"]
    if method == "fno" and not args.weights:
        raise ConfigError("--method fno requires --weights PATH")
    weights = load_weights(args.weights) if method == "fno" else None

    series = bench_mod._run_method(method, pair.d1, h, T,
                                   weights=weights, window=window)
    horizon = series
    if args.psi_offset:
        horizon = (lambda t: float(series.interp(t)) + args.psi_offset)
    trace = simulate(plant, pair, init, T, dt=dt, horizon=horizon)
    trace.method = series.method

    g0, gT = float(trace.gamma[0]), float(trace.gamma[-1])
    M_fit, C_fit = gamma_decay_fit(trace)
    print(f"gamma(0) = {g0:.6g}  gamma(T) = {gT:.6g}  ratio = {gT / g0:.6e}")
    print(f"fit: M = {M_fit:.6g}  C = {C_fit:.6g}")
    print(f"noncausal clamped lookups: {trace.clamp_count}")
    trace.to_csv(args.out)
    print(f"wrote {args.out}")
    if not args.no_plot:
        report.render_trace_figure(trace, pair, _fig_path(args.out))
        print(f"wrote {_fig_path(args.out)}")
    return 0


def _cmd_margins(args) -> int:
    from .delays import AssumptionReport
    from .margins import compute_margins

    cfg = load_config(args.config)
    plant = parse_plant(cfg)
    pair = parse_pair(cfg)
    r1, r2 = pair.reports(args.T)
    combined = AssumptionReport.combine(r1, r2)
    rep = compute_margins(plant, combined)

    rows = [("pi0_star", rep.pi0_star), ("pi1_star", rep.pi1_star),
            ("pi2_star", rep.pi2_star), ("pi3_star", rep.pi3_star),
            ("b", rep.b), ("beta_star", rep.beta_star),
            ("omega1", rep.omega1), ("omega2", rep.omega2),
            ("alpha1", rep.alpha1), ("alpha2", rep.alpha2),
            ("beta1", rep.beta1), ("beta2", rep.beta2),
            ("mu", rep.mu), ("eps_star", rep.eps_star),
            ("c1_at_0", rep.c1(0.0)), ("c2_at_0", rep.c2(0.0)),
            ("c3_at_0", rep.c3(0.0)), ("c4_at_0", rep.c4(0.0)),
            ("lam_min_Q", rep.lam_min_Q), ("lam_min_R", rep.lam_min_R),
            ("lam_max_P", rep.lam_max_P), ("lam_max_S", rep.lam_max_S)]
    for name, val in rows:
        print(f"{name} = {val:.9g}")
    if rep.feasible:
        print("feasible: yes")
    else:
        print(f"feasible: no ({rep.infeasible_term} fails)")

    import csv
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["name", "value"])
        for name, val in rows:
            w.writerow([name, f"{val:.17g}"])
        w.writerow(["feasible", int(rep.feasible)])
    print(f"wrote {args.out}")
    if not args.no_plot:
        report.render_margins_figure(rep, _fig_path(args.out))
        print(f"wrote {_fig_path(args.out)}")
    return 0


def _cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    weights = None
    if "fno" in methods:
        if not args.weights:
            raise ConfigError("benching fno requires --weights PATH")
        weights = load_weights(args.weights)
    delays = []
    i = 0
    while len(delays) < args.n_delays:
        params, _ = sample_delay(args.seed + i, horizon=args.T)
        delays.append(params)
        i += 1
    results = bench_mod.bench_methods(delays, methods, h=args.h, T=args.T,
                                      weights=weights, window=args.window)
    print(f"{'method':<10} {'n':>4} {'mean_ms':>10} {'p50_ms':>10} "
          f"{'p95_ms':>10} {'mean_resid':>12} {'fail':>5}")
    for r in results:
        print(f"{r.method:<10} {r.n_evals:>4} {r.mean_ms:>10.3f} {r.p50_ms:>10.3f} "
              f"{r.p95_ms:>10.3f} {r.mean_residual:>12.3e} {r.failures:>5}")
    bench_mod.bench_to_csv(results, args.out)
    print(f"wrote {args.out}")
    if not args.no_plot:
        report.render_bench_figure(results, _fig_path(args.out))
        print(f"wrote {_fig_path(args.out)}")
    return 0


_COMMANDS = {
    "check-delay": _cmd_check_delay,
    "horizon": _cmd_horizon,
    "gen-dataset": _cmd_gen_dataset,
    "simulate": _cmd_simulate,
    "margins": _cmd_margins,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except AssumptionViolation as e:
        print(f"assumption violated: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except (ContainerFormatError, OSError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 4
    except DelayPredError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
