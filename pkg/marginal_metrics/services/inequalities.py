from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from marginal_metrics.services.measure import (
    DiscreteMeasure,
    MeasureError,
    make_measure,
    marginal,
)
from marginal_metrics.services.metrics import MetricChoice, m1_distance, theorem2_bound

logger = logging.getLogger(__name__)


class StepFunctionError(ValueError):
    """A step function is malformed or leaves the class it is used for."""


def _as_array(values: Sequence[float] | np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True).reshape(-1)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MonotoneStep:
    """
    Nondecreasing right-continuous step function on R.

    values[0] holds left of breakpoints[0] and values[i] on [breakpoints[i-1], breakpoints[i]).
    The identity map has no step representation and is carried by `identity=True`.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    identity: bool = False

    def __post_init__(self) -> None:
        breakpoints, values = _as_array(self.breakpoints), _as_array(self.values)
        if self.identity:
            if breakpoints.size or values.size:
                raise StepFunctionError("the identity step takes no breakpoints or values")
        else:
            if values.shape[0] != breakpoints.shape[0] + 1:
                raise StepFunctionError(
                    f"{breakpoints.shape[0]} breakpoints need {breakpoints.shape[0] + 1} values, got {values.shape[0]}"
                )
            if not (np.all(np.isfinite(breakpoints)) and np.all(np.isfinite(values))):
                raise StepFunctionError("breakpoints and values must be finite")
            if np.any(np.diff(breakpoints) <= 0):
                raise StepFunctionError("breakpoints must be strictly increasing")
            if np.any(np.diff(values) < 0):
                raise StepFunctionError("values must be nondecreasing")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    @classmethod
    def make_identity(cls) -> "MonotoneStep":
        return cls(breakpoints=np.empty(0), values=np.empty(0), identity=True)

    @classmethod
    def constant(cls, value: float) -> "MonotoneStep":
        return cls(breakpoints=np.empty(0), values=np.array([value]))

    @classmethod
    def threshold(cls, at: float, low: float = 0.0, high: float = 1.0) -> "MonotoneStep":
        return cls(breakpoints=np.array([at]), values=np.array([low, high]))

    def __call__(self, x: Sequence[float] | np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.identity:
            return x.copy()
        return self.values[np.searchsorted(self.breakpoints, x, side="right")]

    def __repr__(self) -> str:
        if self.identity:
            return "MonotoneStep(identity)"
        return f"MonotoneStep(pieces={self.values.shape[0]})"


@dataclass(frozen=True)
class StepProduct:
    """x -> prod_k steps[k](x_k), coordinatewise nondecreasing when every factor is nonnegative."""

    steps: tuple[MonotoneStep, ...]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != len(self.steps):
            raise StepFunctionError(f"{len(self.steps)} factors for points of dimension {points.shape[1]}")
        out = np.ones(points.shape[0])
        for axis, g in enumerate(self.steps):
            out *= g(points[:, axis])
        return out


@dataclass(frozen=True, eq=False)
class StepQuantile:
    """
    Nonincreasing step function on [0, 1): values[i] on [breakpoints[i], breakpoints[i+1]).

    breakpoints[0] is 0 and the last piece runs up to 1. Beyond 1 the function is 0.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        breakpoints, values = _as_array(self.breakpoints), _as_array(self.values)
        if breakpoints.shape != values.shape or breakpoints.size == 0:
            raise StepFunctionError("a quantile step needs matching nonempty breakpoints and values")
        if breakpoints[0] != 0.0 or breakpoints[-1] >= 1.0 or np.any(np.diff(breakpoints) <= 0):
            raise StepFunctionError("breakpoints must increase strictly from 0 and stay below 1")
        if np.any(values < 0) or np.any(np.diff(values) > 0):
            raise StepFunctionError("values must be nonnegative and nonincreasing")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    def __call__(self, s: Sequence[float] | np.ndarray | float) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.breakpoints, s, side="right") - 1
        out = self.values[np.clip(idx, 0, None)]
        return np.where(s >= 1.0, 0.0, out)


def _require_1d(p1: DiscreteMeasure) -> None:
    if p1.dim != 1:
        raise MeasureError(f"expected a 1-D measure, got dimension {p1.dim}")


def _require_nonnegative(g: MonotoneStep, x: np.ndarray, name: str = "g") -> np.ndarray:
    values = g(x)
    if np.any(values < 0):
        raise StepFunctionError(f"{name} takes negative values on the support")
    return values


def apply_monotone(g: MonotoneStep, p1: DiscreteMeasure) -> DiscreteMeasure:
    """Law of g(X) for X ~ p1."""

    _require_1d(p1)
    return make_measure(g(p1.atoms[:, 0]), p1.weights)


def quantile_g(p1: DiscreteMeasure, g: MonotoneStep) -> StepQuantile:
    """
    s -> inf{x : Pr(g(X) > x) <= s} as an exact step function.

    With y_1 < ... < y_r the distinct values of g(X), the function equals y_j on
    [Pr(g(X) > y_j), Pr(g(X) > y_{j-1})).
    """

    _require_1d(p1)
    _require_nonnegative(g, p1.atoms[:, 0])
    law = apply_monotone(g, p1)
    ys = law.atoms[:, 0]
    tails = np.concatenate([np.cumsum(law.weights[::-1])[::-1][1:], [0.0]])

    breakpoints = tails[::-1]
    values = ys[::-1]
    keep = np.concatenate([np.diff(breakpoints) > 0, [True]]) & (breakpoints < 1.0)
    return StepQuantile(breakpoints=breakpoints[keep], values=values[keep])


def step_product_integral(qs: Sequence[StepQuantile], theta: float) -> float:
    """Exact integral of prod_k qs[k](s) over [0, theta] on the merged partition."""

    if not 0.0 <= theta <= 1.0:
        raise StepFunctionError(f"theta must lie in [0, 1], got {theta!r}")
    if theta == 0.0:
        return 0.0
    cuts = np.unique(np.concatenate([[0.0, theta]] + [q.breakpoints for q in qs]))
    cuts = cuts[cuts <= theta]
    left, widths = cuts[:-1], np.diff(cuts)
    heights = np.ones(left.shape[0])
    for q in qs:
        heights *= q(left)
    return float(widths @ heights)


def product_gap(p: DiscreteMeasure, q: DiscreteMeasure, gs: Sequence[MonotoneStep]) -> float:
    """|E_P prod g_k(X_k) - E_Q prod g_k(X_k)|."""

    f = StepProduct(tuple(gs))
    return abs(p.expectation(f(p.atoms)) - q.expectation(f(q.atoms)))


def corollary1_bound(p: DiscreteMeasure, q: DiscreteMeasure, gs: Sequence[MonotoneStep]) -> float:
    """
    2 * integral over [0, m1/2] of prod_k Q_{g_k}, bounding `product_gap`.

    The factor 2 is required: for the comonotone versus independent Bernoulli(1/2)
    pair with identity maps the gap is 1/4, which the bound attains, while the
    integral alone is 1/8.
    """

    if len(gs) != p.dim:
        raise StepFunctionError(f"need {p.dim} step functions, got {len(gs)}")
    theta = m1_distance(p, q) / 2.0
    qs = [quantile_g(marginal(p, axis), g) for axis, g in enumerate(gs)]
    return 2.0 * step_product_integral(qs, theta)


def _require_2d(joint: DiscreteMeasure) -> None:
    if joint.dim != 2:
        raise MeasureError(f"expected a 2-D joint law, got dimension {joint.dim}")


def alpha_coefficient(joint: DiscreteMeasure) -> float:
    """
    2 * sup_{y,z} |Pr(Y > y, Z > z) - Pr(Y > y) Pr(Z > z)|.

    The strict tails only move at atom values; probing just below each atom value
    gives the closed tails at those values, so the sup is a max over that grid.
    """

    _require_2d(joint)
    y, z = joint.atoms[:, 0], joint.atoms[:, 1]
    ys, zs = np.unique(y), np.unique(z)
    above_y = (y[:, None] >= ys[None, :]).astype(float)
    above_z = (z[:, None] >= zs[None, :]).astype(float)
    both = np.einsum("i,ia,ib->ab", joint.weights, above_y, above_z)
    tail_y = joint.weights @ above_y
    tail_z = joint.weights @ above_z
    alpha = 2.0 * float(np.max(np.abs(both - np.outer(tail_y, tail_z))))
    return min(alpha, 0.5)


def _pair_quantiles(joint: DiscreteMeasure, g_y: MonotoneStep, g_z: MonotoneStep) -> list[StepQuantile]:
    return [quantile_g(marginal(joint, 0), g_y), quantile_g(marginal(joint, 1), g_z)]


def rio_bound(joint: DiscreteMeasure, g_y: MonotoneStep, g_z: MonotoneStep) -> float:
    """2 * integral over [0, alpha] of Q_{gY} Q_{gZ}; alpha does not grow under monotone maps."""

    _require_2d(joint)
    alpha = alpha_coefficient(joint)
    return 2.0 * step_product_integral(_pair_quantiles(joint, g_y, g_z), alpha)


def corollary2_theta(d_bl: float, metric: MetricChoice | None = None) -> float:
    """Twice the m1 bound implied by d_bl in dimension 2; sqrt(8 d_bl) capped at 1 under r_1."""

    return 2.0 * theorem2_bound(d_bl, 2, metric)


def corollary2_bound(
    joint: DiscreteMeasure,
    g_y: MonotoneStep,
    g_z: MonotoneStep,
    d_bl: float,
    metric: MetricChoice | None = None,
) -> float:
    """
    Covariance bound from the BL distance between the joint law and the product of its marginals.

    theta can reach 2; the quantile functions vanish past s = 1, so the integral
    is taken over [0, min(theta, 1)].
    """

    _require_2d(joint)
    theta = corollary2_theta(d_bl, metric)
    return 2.0 * step_product_integral(_pair_quantiles(joint, g_y, g_z), min(theta, 1.0))


def covariance(joint: DiscreteMeasure, g_y: MonotoneStep, g_z: MonotoneStep) -> float:
    _require_2d(joint)
    a = g_y(joint.atoms[:, 0])
    b = g_z(joint.atoms[:, 1])
    return joint.expectation(a * b) - joint.expectation(a) * joint.expectation(b)


def random_monotone_step(
    rng: np.random.Generator,
    low: float,
    high: float,
    pieces: int = 3,
    scale: float = 1.0,
) -> MonotoneStep:
    """Random nonnegative step with up to `pieces` breakpoints in [low, high] and max value `scale`."""

    breakpoints = np.unique(rng.uniform(low, high, size=pieces))
    increments = rng.random(breakpoints.shape[0] + 1)
    increments[0] *= rng.random()
    values = np.cumsum(increments)
    if values[-1] > 0:
        values = values * (scale / values[-1])
    return MonotoneStep(breakpoints=breakpoints, values=values)
