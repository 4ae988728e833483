from __future__ import annotations

import itertools

import pytest

from marginal_metrics.services.metrics import MetricChoice
from marginal_metrics.services.verify import (
    bernoulli_cor1_trial,
    cor1_suite,
    cov_suite,
    random_joint,
    theorem2_suite,
    trial_seeds,
)

SEED = 20070611


def test_trial_seeds_are_reproducible_and_distinct():
    first = trial_seeds(SEED, 50)
    assert first == trial_seeds(SEED, 50)
    assert len(set(first)) == 50
    assert trial_seeds(SEED, 10) == first[:10]


def test_bernoulli_certificate_is_tight():
    assert bernoulli_cor1_trial().slack == pytest.approx(0.0, abs=1e-15)


def test_random_joint_stays_on_lattice():
    joint = random_joint(3, support=4)
    assert joint.dim == 2
    assert joint.size <= 4
    assert (joint.atoms == joint.atoms.round()).all()


@pytest.mark.parametrize(("dim", "p"), [(2, "1"), (3, "inf")])
def test_theorem2_suite_small(dim, p):
    report = theorem2_suite(trials=30, seed=SEED, dim=dim, metric=MetricChoice.parse(p))
    assert report.ok, report.violating_seeds
    assert report.trials == report.passes == 30
    assert report.config["p"] == p
    assert report.worst_ratio is not None


def test_theorem2_suite_fails_on_shrunken_lattices():
    report = theorem2_suite(trials=40, seed=SEED, scale=1e-3)
    assert report.violations > 0
    assert report.worst_slack < 0
    assert report.worst_seed in report.violating_seeds


def test_cor1_suite_small():
    report = cor1_suite(trials=40, seed=SEED)
    assert report.ok
    assert report.trials == 40
    assert report.worst_slack >= -1e-9


def test_cov_suite_small():
    report = cov_suite(trials=40, seed=SEED)
    assert report.ok
    assert report.config["support"] == 4


def test_suites_are_reproducible():
    assert cov_suite(trials=10, seed=7).model_dump() == cov_suite(trials=10, seed=7).model_dump()


def test_parallel_suite_matches_serial():
    serial = cor1_suite(trials=12, seed=SEED, workers=1)
    parallel = cor1_suite(trials=12, seed=SEED, workers=2)
    assert serial.model_dump() == parallel.model_dump()


@pytest.mark.slow
@pytest.mark.parametrize(("dim", "p"), list(itertools.product([2, 3], ["1", "2", "inf"])))
def test_theorem2_suite_full(dim, p):
    report = theorem2_suite(trials=1000, seed=SEED, dim=dim, metric=MetricChoice.parse(p))
    assert report.violations == 0


@pytest.mark.slow
def test_cor1_suite_full():
    assert cor1_suite(trials=500, seed=SEED).ok


@pytest.mark.slow
def test_cov_suite_full():
    report = cov_suite(trials=500, seed=SEED)
    assert report.ok
    assert report.worst_slack >= -1e-12
