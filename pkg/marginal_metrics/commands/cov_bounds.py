from __future__ import annotations

import argparse

from marginal_metrics.commands._common import add_output_flag, config_echo, run_config
from marginal_metrics.models import CovBoundsReport
from marginal_metrics.services.inequalities import (
    alpha_coefficient,
    corollary2_bound,
    corollary2_theta,
    covariance,
    rio_bound,
)
from marginal_metrics.services.io import dumps_json, emit, load_measure, load_step_function
from marginal_metrics.services.measure import MeasureError, product_of_marginals
from marginal_metrics.services.metrics import MetricChoice, bl1_distance


def run_cov_bounds(args: argparse.Namespace) -> int:
    config = run_config(args, "cov-bounds", inputs=[args.joint, args.g_y, args.g_z])
    joint = load_measure(args.joint)
    if joint.dim != 2:
        raise MeasureError(f"{args.joint}: cov-bounds needs a 2-D law, got dimension {joint.dim}")
    g_y = load_step_function(args.g_y)
    g_z = load_step_function(args.g_z)

    metric = MetricChoice.parse(config.p)
    d_bl = bl1_distance(joint, product_of_marginals(joint), metric).value
    report = CovBoundsReport(
        cov=covariance(joint, g_y, g_z),
        alpha=alpha_coefficient(joint),
        rio_bound=rio_bound(joint, g_y, g_z),
        cor2_bound=corollary2_bound(joint, g_y, g_z, d_bl, metric),
        d_bl=d_bl,
        theta=corollary2_theta(d_bl, metric),
        config=config_echo(config),
    )
    emit(dumps_json(report.model_dump()), config.out)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("cov-bounds", help="Covariance, mixing coefficient and covariance bounds.")
    parser.add_argument("joint", help="2-D measure file for (Y, Z).")
    parser.add_argument("g_y", help="Step function file for gY.")
    parser.add_argument("g_z", help="Step function file for gZ.")
    parser.add_argument("--p", default="1", help="Ground distance exponent for d_bl (default 1).")
    add_output_flag(parser)
    parser.set_defaults(handler=run_cov_bounds)
