from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from marginal_metrics import __version__
from marginal_metrics.commands import cov_bounds, linear_process, lp_selftest, metrics, verify
from marginal_metrics.services.metrics import LPError
from marginal_metrics.settings import settings

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2

_COMMANDS = (metrics, verify, cov_bounds, linear_process, lp_selftest)


def _one_line(error: ValueError) -> str:
    if isinstance(error, ValidationError):
        first = error.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or error.title
        return f"{where}: {first.get('msg', 'invalid value')}"
    return str(error).splitlines()[0] if str(error) else type(error).__name__


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marginal-metrics",
        description="Integral probability metrics and covariance bounds for discrete laws with common marginals.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=settings.log_level,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help=f"Log level on standard error (default {settings.log_level}).",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for module in _COMMANDS:
        module.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return int(args.handler(args))
    except LPError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    except ValueError as e:
        print(f"error: {_one_line(e)}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
