"""Command-line front end: attack, design, wss-check, and experiment."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .attack import solve_attack
from .core import ar1_autocorr, load_covariance_csv, toeplitz_from_autocorr
from .design import (
    brute_force_best_covariance,
    optimal_watermark_covariance,
    stationarity_residual,
)
from .errors import CovmarkError
from .harness import emit_csv, load_config, run_experiment
from .wss import ar1_psd, psd_condition_check, toeplitz_eigen_gap, with_eigenvalues


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _cmd_attack(args: argparse.Namespace) -> int:
    host = load_covariance_csv(args.host)
    watermark = load_covariance_csv(args.watermark)
    solution = solve_attack(host, watermark, args.r0)
    fields = (host.dim, solution.gamma, solution.lagrange, args.r0, solution.distortion)
    print(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in fields))
    return 0


def _cmd_design(args: argparse.Namespace) -> int:
    host = load_covariance_csv(args.host)
    solution = optimal_watermark_covariance(host, args.pw)
    residual = stationarity_residual(host, solution.c_w_opt, solution.lagrange)
    brute_best = ""
    if args.brute_trials is not None:
        _, best_energy = brute_force_best_covariance(
            host, args.pw, args.brute_trials, args.seed
        )
        brute_best = _fmt(best_energy)
    print("N,c,lambda,alpha,E_opt,E_brute_best,stationarity_residual")
    print(
        ",".join(
            (
                str(host.dim),
                _fmt(solution.c),
                _fmt(solution.lagrange),
                _fmt(solution.alpha),
                _fmt(solution.residual_energy),
                brute_best,
                _fmt(residual),
            )
        )
    )
    return 0


def _cmd_wss_check(args: argparse.Namespace) -> int:
    try:
        sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError:
        print(f"error: --sizes expects comma-separated integers, got {args.sizes!r}",
              file=sys.stderr)
        return 1
    print("N,eigen_gap,psd_ratio_error")
    for size in sizes:
        host = toeplitz_from_autocorr(ar1_autocorr(args.sigma2, args.rho, size))
        model = with_eigenvalues(ar1_psd(args.sigma2, args.rho, size), host)
        gap = toeplitz_eigen_gap(host, model)
        report = psd_condition_check(host, args.pw)
        print(f"{size},{_fmt(gap)},{_fmt(report.max_psd_ratio_error)}")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    emit_csv(run_experiment(config), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covmark",
        description="Watermark covariance design and optimal linear removal attacks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    attack = sub.add_parser("attack", help="solve the minimum-distortion attack")
    attack.add_argument("--host", required=True, help="host covariance CSV")
    attack.add_argument("--watermark", required=True, help="watermark covariance CSV")
    attack.add_argument("--r0", type=float, required=True, help="correlation target")
    attack.set_defaults(func=_cmd_attack)

    design = sub.add_parser("design", help="optimal watermark covariance for a host")
    design.add_argument("--host", required=True, help="host covariance CSV")
    design.add_argument("--pw", type=float, required=True, help="watermark power budget")
    design.add_argument("--brute-trials", type=int, default=None,
                        help="also run the random-search oracle with this many trials")
    design.add_argument("--seed", type=int, default=0, help="oracle seed")
    design.set_defaults(func=_cmd_design)

    wss = sub.add_parser("wss-check", help="stationary-limit diagnostics over sizes")
    wss.add_argument("--rho", type=float, required=True, help="AR(1) correlation")
    wss.add_argument("--sigma2", type=float, default=1.0, help="host variance")
    wss.add_argument("--pw", type=float, required=True, help="watermark power budget")
    wss.add_argument("--sizes", required=True, help="comma-separated dimensions")
    wss.set_defaults(func=_cmd_wss_check)

    experiment = sub.add_parser("experiment", help="run a configured experiment")
    experiment.add_argument("--config", required=True, help="key-value config file")
    experiment.add_argument("--out", required=True, help="output CSV path")
    experiment.add_argument("--seed", type=int, default=None,
                            help="override the config seed")
    experiment.set_defaults(func=_cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CovmarkError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
