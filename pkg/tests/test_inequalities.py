from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from marginal_metrics.services.inequalities import (
    MonotoneStep,
    StepFunctionError,
    StepProduct,
    StepQuantile,
    alpha_coefficient,
    apply_monotone,
    corollary1_bound,
    corollary2_bound,
    corollary2_theta,
    covariance,
    product_gap,
    quantile_g,
    rio_bound,
    step_product_integral,
)
from marginal_metrics.services.measure import (
    MeasureError,
    make_measure,
    marginal,
    measures_equal,
    point_mass,
    product_of_marginals,
    random_common_marginal_pair,
)
from marginal_metrics.services.metrics import MetricChoice, bl1_distance, m1_distance
from strategies import lattice_measures, monotone_steps, seeds

HALF_ONE = StepQuantile(breakpoints=np.array([0.0, 0.5]), values=np.array([1.0, 0.0]))


def test_apply_identity(bernoulli, identity):
    assert measures_equal(apply_monotone(identity, bernoulli), bernoulli)


def test_apply_constant(bernoulli):
    assert measures_equal(apply_monotone(MonotoneStep.constant(3.0), bernoulli), point_mass([3.0]))


def test_apply_threshold(bernoulli):
    assert measures_equal(apply_monotone(MonotoneStep.threshold(0.5), bernoulli), bernoulli)


def test_step_is_right_continuous():
    g = MonotoneStep.threshold(0.5, low=1.0, high=4.0)
    assert_allclose(g([0.49, 0.5, 0.51]), [1.0, 4.0, 4.0])


@pytest.mark.parametrize(
    ("breakpoints", "values"),
    [([0.0, 1.0], [0.0, 1.0]), ([1.0, 0.0], [0.0, 1.0, 2.0]), ([0.0], [2.0, 1.0]), ([np.inf], [0.0, 1.0])],
)
def test_malformed_steps(breakpoints, values):
    with pytest.raises(StepFunctionError):
        MonotoneStep(breakpoints=np.array(breakpoints), values=np.array(values))


def test_quantile_of_bernoulli(bernoulli, identity):
    q = quantile_g(bernoulli, identity)
    assert_allclose(q.breakpoints, [0.0, 0.5])
    assert_allclose(q.values, [1.0, 0.0])
    assert_allclose(q([0.0, 0.49, 0.5, 0.99, 1.0]), [1.0, 1.0, 0.0, 0.0, 0.0])


def test_quantile_of_constant(bernoulli):
    q = quantile_g(bernoulli, MonotoneStep.constant(2.5))
    assert_allclose(q.values, [2.5])
    assert_allclose(q([0.0, 0.7]), [2.5, 2.5])


def test_quantile_of_point_mass(identity):
    q = quantile_g(point_mass([0.75]), identity)
    assert_allclose(q([0.1, 0.9]), [0.75, 0.75])


def test_quantile_rejects_negative_values(identity):
    with pytest.raises(StepFunctionError, match="negative"):
        quantile_g(make_measure([-1.0, 1.0]), identity)


def test_quantile_needs_1d(p_co, identity):
    with pytest.raises(MeasureError):
        quantile_g(p_co, identity)


def test_step_product_integral_examples(bernoulli, identity):
    assert step_product_integral([HALF_ONE], 1.0 / 8.0) == pytest.approx(0.125)
    q = quantile_g(bernoulli, identity)
    assert step_product_integral([q, q], 1.0) == pytest.approx(0.5)
    assert step_product_integral([q, q], 0.0) == 0.0


def test_step_product_integral_theta_range():
    with pytest.raises(StepFunctionError):
        step_product_integral([HALF_ONE], 1.5)


def test_step_quantile_validation():
    with pytest.raises(StepFunctionError):
        StepQuantile(breakpoints=np.array([0.1]), values=np.array([1.0]))
    with pytest.raises(StepFunctionError):
        StepQuantile(breakpoints=np.array([0.0, 0.5]), values=np.array([1.0, 2.0]))


def test_step_product():
    f = StepProduct((MonotoneStep.threshold(0.5), MonotoneStep.constant(2.0)))
    assert_allclose(f(np.array([[0.0, 9.0], [1.0, 9.0]])), [0.0, 2.0])


def test_corollary1_certificate_needs_factor_two(p_co, p_ind, identity):
    gs = [identity, identity]
    bound = corollary1_bound(p_co, p_ind, gs)
    gap = product_gap(p_co, p_ind, gs)
    assert gap == pytest.approx(0.25)
    assert bound == pytest.approx(0.25)
    qs = [quantile_g(marginal(p_co, k), identity) for k in range(2)]
    # without the factor 2 the bound undershoots the actual gap
    assert step_product_integral(qs, m1_distance(p_co, p_ind) / 2.0) == pytest.approx(0.125)


def test_corollary1_identical_laws(p_co, identity):
    assert corollary1_bound(p_co, p_co, [identity, identity]) == 0.0


def test_corollary1_constant_functions(p_co, p_ind):
    ones = [MonotoneStep.constant(1.0)] * 2
    assert corollary1_bound(p_co, p_ind, ones) == pytest.approx(m1_distance(p_co, p_ind))
    assert product_gap(p_co, p_ind, ones) == pytest.approx(0.0, abs=1e-15)


def test_corollary1_needs_one_function_per_axis(p_co, p_ind, identity):
    with pytest.raises(StepFunctionError):
        corollary1_bound(p_co, p_ind, [identity])


def test_alpha_examples(p_co, p_ind, p_anti):
    assert alpha_coefficient(p_ind) == pytest.approx(0.0, abs=1e-15)
    assert alpha_coefficient(p_co) == pytest.approx(0.5)
    assert alpha_coefficient(p_anti) == pytest.approx(0.5)
    assert alpha_coefficient(point_mass([1.0, 2.0])) == 0.0


def test_alpha_needs_2d_law(bernoulli):
    with pytest.raises(MeasureError, match="2-D"):
        alpha_coefficient(bernoulli)


def test_rio_bound_examples(p_co, p_ind, identity):
    assert rio_bound(p_co, identity, identity) == pytest.approx(1.0)
    assert rio_bound(p_ind, MonotoneStep.threshold(0.5), identity) == 0.0
    assert rio_bound(point_mass([1.0, 1.0]), identity, identity) == 0.0


def test_corollary2_examples(p_co, identity):
    d_bl = bl1_distance(p_co, product_of_marginals(p_co)).value
    assert corollary2_theta(d_bl) == pytest.approx(2.0)
    assert corollary2_bound(p_co, identity, identity, d_bl) == pytest.approx(1.0)
    assert corollary2_bound(p_co, identity, identity, 0.0) == 0.0
    c1, c2 = MonotoneStep.constant(1.5), MonotoneStep.constant(0.4)
    assert corollary2_bound(p_co, c1, c2, d_bl) == pytest.approx(2 * 1.5 * 0.4)


def test_corollary2_theta_rejects_negative_distance():
    with pytest.raises(ValueError):
        corollary2_theta(-1e-3)


def test_covariance_examples(p_co, p_ind, identity):
    assert covariance(p_co, identity, identity) == pytest.approx(0.25)
    assert covariance(p_ind, identity, MonotoneStep.threshold(0.5, 0.0, 3.0)) == pytest.approx(0.0, abs=1e-15)
    assert covariance(p_co, MonotoneStep.constant(2.0), identity) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(lattice_measures(dim=1), monotone_steps())
def test_quantile_integrates_to_mean(p1, g):
    q = quantile_g(p1, g)
    assert step_product_integral([q], 1.0) == pytest.approx(p1.expectation(g(p1.atoms[:, 0])), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(lattice_measures())
def test_alpha_is_at_most_twice_m1_to_product(joint):
    assert alpha_coefficient(joint) <= 2.0 * m1_distance(joint, product_of_marginals(joint)) + 1e-12


@settings(max_examples=100, deadline=None)
@given(lattice_measures(), monotone_steps(), monotone_steps())
def test_alpha_does_not_grow_under_monotone_maps(joint, g_y, g_z):
    mapped = make_measure(np.stack([g_y(joint.atoms[:, 0]), g_z(joint.atoms[:, 1])], axis=1), joint.weights)
    assert alpha_coefficient(mapped) <= alpha_coefficient(joint) + 1e-12


@settings(max_examples=50, deadline=None)
@given(lattice_measures(), monotone_steps(), monotone_steps())
def test_covariance_bounds_hold(joint, g_y, g_z):
    cov = abs(covariance(joint, g_y, g_z))
    assert cov <= rio_bound(joint, g_y, g_z) + 1e-12
    d_bl = bl1_distance(joint, product_of_marginals(joint), MetricChoice(1.0)).value
    assert cov <= corollary2_bound(joint, g_y, g_z, d_bl) + 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 6), monotone_steps(high=24.0), monotone_steps(high=24.0))
def test_corollary1_bounds_product_gap_on_common_marginals(seed, n, g_1, g_2):
    p, q = random_common_marginal_pair(seed, 2, n)
    assert product_gap(p, q, [g_1, g_2]) <= corollary1_bound(p, q, [g_1, g_2]) + 1e-12


def test_corollary2_theta_follows_the_ground_distance():
    assert corollary2_theta(0.01) == pytest.approx(2 * np.sqrt(0.08))
    assert corollary2_theta(0.01, MetricChoice.parse("inf")) == pytest.approx(0.8)


@settings(max_examples=50, deadline=None)
@given(
    lattice_measures(dim=1),
    lattice_measures(dim=1),
    monotone_steps(),
    monotone_steps(),
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=8),
)
def test_step_product_integral_grows_with_theta(p1, q1, g_1, g_2, thetas):
    qs = [quantile_g(p1, g_1), quantile_g(q1, g_2)]
    values = [step_product_integral(qs, theta) for theta in sorted(thetas)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
