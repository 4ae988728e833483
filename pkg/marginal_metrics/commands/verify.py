from __future__ import annotations

import argparse

from marginal_metrics.commands._common import add_output_flag, add_seed_flags, default_p, run_config
from marginal_metrics.models import SuiteReport
from marginal_metrics.services.io import dumps_json, emit
from marginal_metrics.services.metrics import MetricChoice
from marginal_metrics.services.verify import cor1_suite, cov_suite, theorem2_suite
from marginal_metrics.settings import settings


def _finish(report: SuiteReport, out: str | None) -> int:
    emit(dumps_json(report.model_dump()), out)
    return 0 if report.ok else 1


def run_theorem2(args: argparse.Namespace) -> int:
    config = run_config(args, "verify-theorem2")
    if not args.scale > 0:
        raise ValueError(f"--scale must be positive, got {args.scale!r}")
    report = theorem2_suite(
        trials=config.trials,
        seed=config.seed,
        dim=config.dim,
        support=config.support,
        metric=MetricChoice.parse(config.p),
        tol=config.tol,
        scale=args.scale,
        workers=config.workers,
    )
    return _finish(report, config.out)


def run_cor1(args: argparse.Namespace) -> int:
    config = run_config(args, "verify-cor1")
    report = cor1_suite(
        trials=config.trials,
        seed=config.seed,
        dim=config.dim,
        support=config.support,
        tol=config.tol,
        workers=config.workers,
    )
    return _finish(report, config.out)


def run_cov(args: argparse.Namespace) -> int:
    config = run_config(args, "verify-cov")
    report = cov_suite(
        trials=config.trials,
        seed=config.seed,
        support=config.support,
        tol=config.tol,
        workers=config.workers,
    )
    return _finish(report, config.out)


def _suite_parser(subparsers: argparse._SubParsersAction, name: str, help_text: str, support: int, tol: float):
    parser = subparsers.add_parser(name, help=help_text)
    parser.add_argument("--trials", type=int, default=settings.trials, help=f"Number of trials (default {settings.trials}).")
    parser.add_argument("--support", type=int, default=support, help=f"Largest support size per axis (default {support}).")
    parser.add_argument("--tol", type=float, default=tol, help=f"Violation tolerance (default {tol:g}).")
    add_seed_flags(parser)
    add_output_flag(parser)
    return parser


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = _suite_parser(subparsers, "verify-theorem2", "Randomized check of m1 <= theorem2_bound(bl1).", 6, settings.tol)
    parser.add_argument("--dim", type=int, default=2, help="Dimension K (default 2).")
    parser.add_argument("--p", default=default_p(), help="Ground distance exponent, >= 1 or 'inf'.")
    parser.add_argument(
        "--scale",
        type=float,
        default=1.0,
        help="Multiply every instance by this factor; values well below 1 expose the bound's scale dependence.",
    )
    parser.set_defaults(handler=run_theorem2)

    parser = _suite_parser(subparsers, "verify-cor1", "Randomized check of the product-quantile bound.", 6, settings.tol)
    parser.add_argument("--dim", type=int, default=2, help="Dimension K (default 2).")
    parser.set_defaults(handler=run_cor1)

    parser = _suite_parser(subparsers, "verify-cov", "Randomized check of the Rio and BL covariance bounds.", 4, 1e-12)
    parser.set_defaults(handler=run_cov)
