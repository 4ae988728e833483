from __future__ import annotations

import argparse
from typing import Any

from marginal_metrics.models import RunConfig
from marginal_metrics.settings import settings


def add_output_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="Write the report to this path instead of standard output.")


def add_seed_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=settings.seed, help=f"Root seed (default {settings.seed}).")
    parser.add_argument(
        "--workers",
        type=int,
        default=settings.workers,
        help="Worker processes (default from MARGINAL_METRICS_WORKERS).",
    )


def default_p() -> str:
    return "inf" if settings.p == float("inf") else format(settings.p, "g")


def run_config(args: argparse.Namespace, command: str, **extra: Any) -> RunConfig:
    """Validate the parsed flags; out-of-range values raise a ValidationError (a ValueError)."""

    payload: dict[str, Any] = {"command": command}
    for name in ("p", "trials", "seed", "tol", "dim", "support", "out", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            payload[name] = str(value) if name == "p" else value
    payload.update(extra)
    return RunConfig.model_validate(payload)


def config_echo(config: RunConfig) -> dict[str, Any]:
    return config.model_dump(exclude={"out"})
