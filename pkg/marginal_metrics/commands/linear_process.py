from __future__ import annotations

import argparse
import logging

from marginal_metrics.commands._common import add_output_flag, add_seed_flags, run_config
from marginal_metrics.models import DecayRow
from marginal_metrics.services.io import dumps_csv, emit
from marginal_metrics.services.processes import Innovation, LinearProcessSpec, decay_experiment
from marginal_metrics.settings import settings

logger = logging.getLogger(__name__)


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _lag_list(text: str) -> list[int]:
    lags: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                lags.extend(range(lo, hi + 1))
            else:
                lags.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot read lags from {text!r}") from None
    if not lags or min(lags) < 1:
        raise argparse.ArgumentTypeError("lags must be positive integers")
    return lags


def run_linear_process(args: argparse.Namespace) -> int:
    config = run_config(args, "linear-process", trials=1)
    if args.coeffs is not None:
        spec = LinearProcessSpec.explicit(args.coeffs, args.innovation)
    else:
        spec = LinearProcessSpec.geometric(args.rho, args.truncation, args.innovation)
    if args.samples < 1:
        raise ValueError(f"--samples must be >= 1, got {args.samples}")

    logger.info("linear-process: seed=%d truncation=%d samples=%d innovation=%s", config.seed, spec.truncation, args.samples, spec.innovation.value)
    rows = decay_experiment(spec, args.lags, args.samples, config.seed, workers=config.workers)
    emit(dumps_csv(rows, columns=list(DecayRow.model_fields.keys())), config.out)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("linear-process", help="Coupled moving-average experiment, one CSV row per lag.")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--rho", type=float, default=0.5, help="Geometric coefficients a_s = rho^s (default 0.5).")
    source.add_argument("--coeffs", type=_float_list, default=None, help="Explicit coefficients a_0,...,a_T.")
    parser.add_argument(
        "--innovation",
        choices=[i.value for i in Innovation],
        default=Innovation.NORMAL.value,
        help="Innovation law (default normal).",
    )
    parser.add_argument("--lags", type=_lag_list, default=list(range(1, 9)), help="Lags, e.g. 1-8 or 1,2,5 (default 1-8).")
    parser.add_argument("--samples", type=int, default=settings.samples, help=f"Draws per lag (default {settings.samples}).")
    parser.add_argument("--truncation", type=int, default=settings.truncation, help=f"Truncation T (default {settings.truncation}).")
    add_seed_flags(parser)
    add_output_flag(parser)
    parser.set_defaults(handler=run_linear_process)
