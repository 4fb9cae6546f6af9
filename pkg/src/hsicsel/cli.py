"""Command-line entry points: select, simulate, type1, power, bench."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import CsvIngestError, HsicSelError
from .data import ingest_csv
from .hsic import EstimatorSpec, estimate_H, estimate_M
from .kernels import KernelSpec
from .nnlasso import LassoProblem, solve
from .pipeline import PipelineConfig, run_psi
from .report import emit_report
from .simulate import (
    MODELS,
    SyntheticModelSpec,
    generate,
    power_experiment,
    type_one_error_experiment,
)

EXIT_OK = 0
EXIT_INGEST = 2
EXIT_NUMERICAL = 3


def _parse_estimator(text: str) -> EstimatorSpec:
    name, _, arg = text.partition(":")
    if name == "biased":
        return EstimatorSpec.biased()
    if name == "unbiased":
        return EstimatorSpec.unbiased()
    if name == "block":
        return EstimatorSpec.block(int(arg or 10))
    if name in ("inc", "incomplete"):
        return EstimatorSpec.incomplete(int(arg or 1))
    raise argparse.ArgumentTypeError(f"cannot parse estimator {text!r}")


def _default_seed() -> int:
    return int(os.environ.get("HSICSEL_SEED", "0"))


def _add_pipeline_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--target", choices=("hsic", "partial"), default="hsic")
    sub.add_argument("--side", choices=("one", "two"), default="two")
    sub.add_argument("--split-ratio", type=float, default=0.25)
    sub.add_argument("--screen", type=int, default=None,
                     help="keep this many features after fold-1 screening")
    sub.add_argument("--screen-estimator", type=_parse_estimator,
                     default=EstimatorSpec.unbiased())
    sub.add_argument("--h-estimator", type=_parse_estimator,
                     default=EstimatorSpec.block(10))
    sub.add_argument("--m-estimator", type=_parse_estimator,
                     default=EstimatorSpec.block(10))
    sub.add_argument("--cov", choices=("oas", "empirical"), default="oas")
    sub.add_argument("--lambda-method", choices=("cv", "aic", "fixed"),
                     default="cv")
    sub.add_argument("--cv-folds", type=int, default=10)
    sub.add_argument("--fixed-lambda", type=float, default=None)
    sub.add_argument("--adaptive-gamma", type=float, default=None)
    sub.add_argument("--condition-full", action="store_true",
                     help="condition the marginal target on the full selection")
    sub.add_argument("--seed", type=int, default=_default_seed())


def _config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        split_ratio=args.split_ratio,
        screen_count=args.screen,
        alpha=args.alpha,
        target=args.target,
        side=args.side,
        screen_estimator=args.screen_estimator,
        h_estimator=args.h_estimator,
        m_estimator=args.m_estimator,
        cov_method=args.cov,
        lambda_method=args.lambda_method,
        cv_folds=args.cv_folds,
        fixed_lambda=args.fixed_lambda,
        adaptive_gamma=args.adaptive_gamma,
        condition_full_for_hsic=args.condition_full,
        seed=args.seed,
    )


def _print_summary(report) -> None:
    if report.empty_selection:
        print("selection is empty; nothing to test")
        return
    print(f"lambda={report.lam:.6g} selected={report.selected}")
    for res in report.results:
        if res.p_value is None:
            print(f"  {res.name}: {res.note}")
        else:
            mark = "*" if res.significant else " "
            print(f" {mark}{res.name}: p={res.p_value:.4g} "
                  f"ci=[{res.ci_lower:.4g}, {res.ci_upper:.4g}]")


def _cmd_select(args) -> int:
    overrides = dict(item.split("=", 1) for item in args.kernel_override or [])
    data = ingest_csv(args.data, response=args.response,
                      categorical_response=args.categorical_response,
                      feature_kernels=overrides or None)
    report = run_psi(data, _config_from_args(args))
    if args.out:
        emit_report(report, args.out, fmt=args.format)
    _print_summary(report)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = SyntheticModelSpec(model=args.model, n=args.n, theta=args.theta,
                              cov_form=args.cov_form, seed=args.seed)
    data = generate(spec)
    report = run_psi(data, _config_from_args(args))
    if args.out:
        emit_report(report, args.out, fmt=args.format)
    _print_summary(report)
    return EXIT_OK


def _cmd_type1(args) -> int:
    spec = SyntheticModelSpec(model=args.model, n=args.n, theta=args.theta,
                              cov_form=args.cov_form)
    config = _config_from_args(args)
    report = type_one_error_experiment(config, spec, args.reps)
    if args.out:
        emit_report(report, args.out)
    entry = report.entries[0]
    rate = "n/a" if entry.rate is None else f"{entry.rate:.4f}"
    print(f"type-I: rejections={entry.rejections} tests={entry.tests} rate={rate}")
    return EXIT_OK


def _cmd_power(args) -> int:
    spec = SyntheticModelSpec(model=args.model, n=args.n,
                              cov_form=args.cov_form)
    config = _config_from_args(args)
    grid = [float(t) for t in args.theta_grid.split(",")]
    report = power_experiment(config, spec, grid, args.reps)
    if args.out:
        emit_report(report, args.out)
    for entry in report.entries:
        rate = "n/a" if entry.rate is None else f"{entry.rate:.4f}"
        print(f"theta={entry.theta}: rejections={entry.rejections} "
              f"tests={entry.tests} rate={rate}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    x = rng.standard_normal((args.n, args.p))
    y = x[:, 0] + rng.standard_normal(args.n)
    kernel = KernelSpec()
    for spec in (EstimatorSpec.block(10), EstimatorSpec.incomplete(1)):
        start = time.perf_counter()
        h = estimate_H(x, y, kernel, kernel, spec)
        h_time = time.perf_counter() - start
        start = time.perf_counter()
        estimate_M(x, kernel, spec)
        m_time = time.perf_counter() - start
        print(f"{spec.label()}: H {h_time * 1e3:.1f} ms, M {m_time * 1e3:.1f} ms")
    m = np.eye(args.p) + 0.1
    start = time.perf_counter()
    solve(LassoProblem(h=rng.random(args.p), m=m, lam=0.1, w=np.ones(args.p)))
    print(f"lasso solve: {(time.perf_counter() - start) * 1e3:.1f} ms")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsicsel",
        description="Kernel-dependence feature selection with conditional inference",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="run selection and inference on a CSV")
    p_select.add_argument("--data", required=True)
    p_select.add_argument("--response", default=None)
    p_select.add_argument("--categorical-response", action="store_true")
    p_select.add_argument("--kernel-override", action="append", metavar="COL=KIND",
                          help="per-column kernel, e.g. q3=delta")
    p_select.add_argument("--out", default=None)
    p_select.add_argument("--format", choices=("json", "csv"), default="json")
    _add_pipeline_args(p_select)
    p_select.set_defaults(func=_cmd_select)

    p_sim = sub.add_parser("simulate", help="draw a toy dataset and analyse it")
    p_sim.add_argument("--model", choices=MODELS, default="M3")
    p_sim.add_argument("--n", type=int, default=400)
    p_sim.add_argument("--theta", type=float, default=1.0)
    p_sim.add_argument("--cov-form", choices=("identity", "decaying"),
                       default="identity")
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--format", choices=("json", "csv"), default="json")
    _add_pipeline_args(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_t1 = sub.add_parser("type1", help="type-I-error experiment on a toy model")
    p_t1.add_argument("--model", choices=MODELS, default="M1")
    p_t1.add_argument("--n", type=int, default=400)
    p_t1.add_argument("--theta", type=float, default=1.0)
    p_t1.add_argument("--cov-form", choices=("identity", "decaying"),
                      default="identity")
    p_t1.add_argument("--reps", type=int, default=100)
    p_t1.add_argument("--out", default=None)
    _add_pipeline_args(p_t1)
    p_t1.set_defaults(func=_cmd_type1)

    p_pw = sub.add_parser("power", help="power experiment over a theta grid")
    p_pw.add_argument("--model", choices=MODELS, default="M1p")
    p_pw.add_argument("--n", type=int, default=800)
    p_pw.add_argument("--theta-grid", default="0,1,2.33")
    p_pw.add_argument("--cov-form", choices=("identity", "decaying"),
                      default="identity")
    p_pw.add_argument("--reps", type=int, default=50)
    p_pw.add_argument("--out", default=None)
    _add_pipeline_args(p_pw)
    p_pw.set_defaults(func=_cmd_power)

    p_bench = sub.add_parser("bench", help="time the estimators and the solver")
    p_bench.add_argument("--n", type=int, default=400)
    p_bench.add_argument("--p", type=int, default=50)
    p_bench.add_argument("--seed", type=int, default=_default_seed())
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CsvIngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except HsicSelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
