from __future__ import annotations

import argparse

from marginal_metrics.commands._common import add_output_flag, add_seed_flags, run_config
from marginal_metrics.services.io import dumps_json, emit
from marginal_metrics.services.lp import ORACLE_MAX_VARS
from marginal_metrics.services.verify import lp_suite


def run_lp_selftest(args: argparse.Namespace) -> int:
    config = run_config(args, "lp-selftest")
    if not 1 <= args.max_vars <= ORACLE_MAX_VARS:
        raise ValueError(f"--max-vars must lie in 1..{ORACLE_MAX_VARS}, got {args.max_vars}")
    report = lp_suite(trials=config.trials, seed=config.seed, max_vars=args.max_vars, workers=config.workers)
    emit(dumps_json(report.model_dump()), config.out)
    return 0 if report.ok else 1


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("lp-selftest", help="Simplex versus vertex enumeration on random LPs.")
    parser.add_argument("--trials", type=int, default=200, help="Number of random LPs (default 200).")
    parser.add_argument("--max-vars", type=int, default=6, help="Largest variable count (default 6).")
    add_seed_flags(parser)
    add_output_flag(parser)
    parser.set_defaults(handler=run_lp_selftest)
