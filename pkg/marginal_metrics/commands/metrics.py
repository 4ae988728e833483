from __future__ import annotations

import argparse
import logging

from marginal_metrics.commands._common import add_output_flag, config_echo, default_p, run_config
from marginal_metrics.models import MetricsReport
from marginal_metrics.services.io import dumps_json, emit, load_measure, load_rect_mixture, rect_mixture_payload
from marginal_metrics.services.measure import MeasureError, common_marginals_check, survival_sup_distance
from marginal_metrics.services.metrics import MARGINAL_TOL, MetricChoice, bl1_distance, theorem2_bound
from marginal_metrics.services.transform import copula_sup_distance, to_copula

logger = logging.getLogger(__name__)


def run_metrics(args: argparse.Namespace) -> int:
    config = run_config(args, "metrics", inputs=[args.p_file, args.q_file])
    metric = MetricChoice.parse(config.p)
    p = load_measure(args.p_file)
    q = load_measure(args.q_file)
    if p.dim != q.dim:
        raise MeasureError(f"dimension mismatch: {args.p_file} has {p.dim}, {args.q_file} has {q.dim}")

    common = common_marginals_check(p, q, MARGINAL_TOL)
    if not common:
        logger.warning("marginals differ; reporting survival_sup as a lower bound instead of m1")
    sup = survival_sup_distance(p, q)
    bl = bl1_distance(p, q, metric)
    report = MetricsReport(
        p=metric.label,
        marginals_common=common,
        m1=sup if common else None,
        survival_sup=sup,
        survival_sup_open=survival_sup_distance(p, q, closed=False),
        bl1=bl.value,
        c0=bl.sup_part,
        c1=bl.lip_part,
        theorem2_bound=theorem2_bound(bl.value, p.dim, metric),
        support=bl.support.tolist(),
        witness=bl.witness_values.tolist(),
        config=config_echo(config),
    )
    emit(dumps_json(report.model_dump()), config.out)
    return 0


def run_copula(args: argparse.Namespace) -> int:
    copula = to_copula(load_measure(args.measure))
    payload = rect_mixture_payload(copula)
    if args.against is not None:
        other = load_rect_mixture(args.against)
        payload = {"copula": payload, "against": str(args.against), "sup_distance": copula_sup_distance(copula, other)}
    emit(dumps_json(payload), args.out)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("metrics", help="M1 and BL1 distances between two measure files.")
    parser.add_argument("p_file", help="First measure (JSON or CSV).")
    parser.add_argument("q_file", help="Second measure (JSON or CSV).")
    parser.add_argument("--p", default=default_p(), help="Ground distance exponent, >= 1 or 'inf'.")
    add_output_flag(parser)
    parser.set_defaults(handler=run_metrics)

    parser = subparsers.add_parser("copula", help="Copula of a measure file as a rectangle mixture.")
    parser.add_argument("measure", help="Measure file (JSON or CSV).")
    parser.add_argument(
        "--against",
        metavar="MIXTURE",
        help="Rectangle-mixture JSON (as this command writes) to compare with; adds the survival sup distance.",
    )
    add_output_flag(parser)
    parser.set_defaults(handler=run_copula)
