from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np

from marginal_metrics.models import SuiteReport
from marginal_metrics.services.inequalities import (
    MonotoneStep,
    corollary1_bound,
    corollary2_bound,
    covariance,
    product_gap,
    random_monotone_step,
    rio_bound,
)
from marginal_metrics.services.lp import LinearProgram, enumerate_oracle, solve
from marginal_metrics.services.measure import (
    DiscreteMeasure,
    make_measure,
    product_of_marginals,
    random_common_marginal_pair,
)
from marginal_metrics.services.metrics import MetricChoice, bl1_distance, m1_distance, theorem2_bound

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialResult:
    seed: int
    slack: float
    ratio: Optional[float] = None


def trial_seeds(seed: int, trials: int) -> list[int]:
    """Independent per-trial seeds spawned from one root seed."""

    return [int(s) for s in np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)]


def bernoulli_pair() -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Comonotone versus independent Bernoulli(1/2) pair in dimension 2."""

    p_co = make_measure([[0.0, 0.0], [1.0, 1.0]])
    p_ind = make_measure([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    return p_co, p_ind


def _rescaled(p: DiscreteMeasure, scale: float) -> DiscreteMeasure:
    return p if scale == 1.0 else make_measure(p.atoms * scale, p.weights)


def _support_size(seed: int, support: int) -> int:
    return int(np.random.default_rng([seed, 1]).integers(1, support + 1))


def theorem2_trial(seed: int, dim: int, support: int, p: float, scale: float = 1.0) -> TrialResult:
    metric = MetricChoice(p)
    left, right = random_common_marginal_pair(seed, dim, _support_size(seed, support))
    left, right = _rescaled(left, scale), _rescaled(right, scale)
    m1 = m1_distance(left, right)
    bl = bl1_distance(left, right, metric).value
    ratio = m1 / math.sqrt(bl) if bl > 0 else None
    return TrialResult(seed=seed, slack=theorem2_bound(bl, dim, metric) - m1, ratio=ratio)


def cor1_trial(seed: int, dim: int, support: int) -> TrialResult:
    left, right = random_common_marginal_pair(seed, dim, _support_size(seed, support))
    rng = np.random.default_rng([seed, 2])
    gs = []
    for axis in range(dim):
        values = left.atoms[:, axis]
        gs.append(
            random_monotone_step(
                rng,
                float(values.min()) - 0.5,
                float(values.max()) + 0.5,
                pieces=int(rng.integers(1, 5)),
                scale=float(rng.uniform(0.5, 3.0)),
            )
        )
    return TrialResult(seed=seed, slack=corollary1_bound(left, right, gs) - product_gap(left, right, gs))


def bernoulli_cor1_trial() -> TrialResult:
    p_co, p_ind = bernoulli_pair()
    gs = [MonotoneStep.make_identity(), MonotoneStep.make_identity()]
    return TrialResult(seed=-1, slack=corollary1_bound(p_co, p_ind, gs) - product_gap(p_co, p_ind, gs))


def random_joint(seed: int, support: int) -> DiscreteMeasure:
    """Random 2-D law on an integer lattice with at most `support` atoms and Dirichlet weights."""

    rng = np.random.default_rng([seed, 3])
    n = int(rng.integers(1, support + 1))
    atoms = rng.integers(0, support, size=(n, 2)).astype(float)
    return make_measure(atoms, rng.dirichlet(np.ones(n)))


def cov_trial(seed: int, support: int) -> TrialResult:
    joint = random_joint(seed, support)
    rng = np.random.default_rng([seed, 4])
    g_y, g_z = (
        random_monotone_step(rng, -0.5, support - 0.5, pieces=int(rng.integers(1, 4)), scale=float(rng.uniform(0.5, 2.0)))
        for _ in range(2)
    )
    cov = covariance(joint, g_y, g_z)
    d_bl = bl1_distance(joint, product_of_marginals(joint), MetricChoice(1.0)).value
    slack = min(rio_bound(joint, g_y, g_z) - cov, corollary2_bound(joint, g_y, g_z, d_bl) - cov)
    return TrialResult(seed=seed, slack=slack)


def random_bounded_lp(seed: int, max_vars: int = 6) -> tuple[LinearProgram, np.ndarray]:
    """Feasible bounded LP with x >= 0, a budget row, and a known feasible point."""

    rng = np.random.default_rng([seed, 5])
    k = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(k, 2 * k + 3))
    a = rng.normal(size=(m, k))
    x0 = rng.uniform(0.0, 1.0, size=k)
    b = a @ x0 + rng.uniform(0.1, 1.0, size=m)
    a = np.vstack([a, np.ones((1, k))])
    b = np.concatenate([b, [float(x0.sum()) + 2.0]])
    return LinearProgram(objective=rng.normal(size=k), a_ub=a, b_ub=b), x0


def lp_trial(seed: int, max_vars: int = 6) -> TrialResult:
    lp, feasible_point = random_bounded_lp(seed, max_vars)
    fast = solve(lp)
    oracle = enumerate_oracle(lp)
    if not (fast.optimal and oracle.optimal):
        return TrialResult(seed=seed, slack=-math.inf)
    agreement = 1e-7 - abs(fast.value - oracle.value)
    duality = fast.value + 1e-9 - float(lp.objective @ feasible_point)
    return TrialResult(seed=seed, slack=min(agreement, duality))


def _run(
    suite: str,
    trial: Callable[[int], TrialResult],
    seeds: list[int],
    tol: float,
    workers: int,
    config: dict,
    leading: Optional[list[TrialResult]] = None,
) -> SuiteReport:
    results = list(leading or [])
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results += list(pool.map(trial, seeds, chunksize=max(1, len(seeds) // (4 * workers))))
    else:
        for index, s in enumerate(seeds, start=1):
            results.append(trial(s))
            if index % 100 == 0:
                logger.info("%s: %d/%d trials", suite, index, len(seeds))

    violating = [r for r in results if r.slack < -tol]
    worst = min(results, key=lambda r: r.slack)
    ratios = [r.ratio for r in results if r.ratio is not None]
    report = SuiteReport(
        suite=suite,
        trials=len(results),
        passes=len(results) - len(violating),
        violations=len(violating),
        worst_slack=float(worst.slack),
        worst_seed=worst.seed if worst.seed >= 0 else None,
        worst_ratio=max(ratios) if ratios else None,
        violating_seeds=[r.seed for r in violating if r.seed >= 0],
        config=config,
    )
    logger.info("%s: %d/%d passed, worst slack %.3e", suite, report.passes, report.trials, report.worst_slack)
    return report


def theorem2_suite(
    trials: int,
    seed: int,
    dim: int = 2,
    support: int = 6,
    metric: MetricChoice | None = None,
    tol: float = 1e-9,
    scale: float = 1.0,
    workers: int = 1,
) -> SuiteReport:
    """
    m1 <= theorem2_bound(bl1) on random common-marginal pairs.

    Instances live on an integer lattice; `scale` shrinks them, and the bound can
    fail once atoms sit much closer than 1 apart.
    """

    metric = metric or MetricChoice()
    config = {"seed": seed, "tol": tol, "p": metric.label, "trials": trials, "dim": dim, "support": support, "scale": scale}
    trial = partial(theorem2_trial, dim=dim, support=support, p=metric.p, scale=scale)
    return _run("theorem2", trial, trial_seeds(seed, trials), tol, workers, config)


def cor1_suite(
    trials: int,
    seed: int,
    dim: int = 2,
    support: int = 6,
    tol: float = 1e-9,
    workers: int = 1,
) -> SuiteReport:
    """Product-quantile bound on random pairs; trial 0 is the Bernoulli certificate."""

    config = {"seed": seed, "tol": tol, "trials": trials, "dim": dim, "support": support}
    trial = partial(cor1_trial, dim=dim, support=support)
    leading = [bernoulli_cor1_trial()]
    return _run("cor1", trial, trial_seeds(seed, trials - 1), tol, workers, config, leading=leading)


def cov_suite(
    trials: int,
    seed: int,
    support: int = 4,
    tol: float = 1e-12,
    workers: int = 1,
) -> SuiteReport:
    config = {"seed": seed, "tol": tol, "trials": trials, "support": support}
    trial = partial(cov_trial, support=support)
    return _run("cov", trial, trial_seeds(seed, trials), tol, workers, config)


def lp_suite(trials: int, seed: int, max_vars: int = 6, workers: int = 1) -> SuiteReport:
    config = {"seed": seed, "trials": trials, "max_vars": max_vars}
    trial = partial(lp_trial, max_vars=max_vars)
    return _run("lp", trial, trial_seeds(seed, trials), 0.0, workers, config)
