from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from marginal_metrics.services.lp import LinearProgram, LPStatus, solve
from marginal_metrics.services.measure import (
    Coupling,
    DiscreteMeasure,
    MeasureError,
    common_marginals_check,
    survival_sup_distance,
    union_support,
)
from marginal_metrics.settings import settings

logger = logging.getLogger(__name__)

CERT_TOL = 1e-9
MARGINAL_TOL = 1e-9

# Past this many ordered pairs the Lipschitz rows are added lazily, most violated first.
_FULL_PAIR_LIMIT = 2000


class MarginalMismatchError(ValueError):
    """The two laws do not share their univariate marginals."""


class LPError(RuntimeError):
    def __init__(self, status: LPStatus, num_vars: int, num_constraints: int) -> None:
        super().__init__(
            f"bounded-Lipschitz LP ended {status.value} ({num_vars} variables, {num_constraints} constraints)"
        )
        self.status = status
        self.num_vars = num_vars
        self.num_constraints = num_constraints


@dataclass(frozen=True)
class MetricChoice:
    """Ground distance r_p on R^K; p = inf is the max-coordinate distance."""

    p: float = 1.0

    def __post_init__(self) -> None:
        p = float(self.p)
        if not p >= 1.0:
            raise ValueError(f"p must be >= 1, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, text: str | float) -> "MetricChoice":
        if isinstance(text, str) and text.strip().lower() in {"inf", "infinity", "max", "∞"}:
            return cls(math.inf)
        try:
            return cls(float(text))
        except (TypeError, ValueError):
            raise ValueError(f"cannot read p from {text!r}") from None

    @property
    def is_max(self) -> bool:
        return math.isinf(self.p)

    @property
    def label(self) -> str:
        return "inf" if self.is_max else format(self.p, "g")

    def distance(self, x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return float(np.linalg.norm(diff.reshape(-1), ord=self.p))

    def rowwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(xs, dtype=float) - np.asarray(ys, dtype=float), ord=self.p, axis=-1)

    def pairwise(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return self.rowwise(points[:, None, :], points[None, :, :])


@dataclass(frozen=True, eq=False)
class BLReport:
    """
    Optimal bounded-Lipschitz test function on the union support.

    `witness_values[i]` is f at `support[i]`; `sup_part` and `lip_part` are the
    budgets c0 >= ||f||_inf and c1 >= ||f||_L with c0 + c1 <= 1.
    """

    value: float
    witness_values: np.ndarray
    sup_part: float
    lip_part: float
    support: np.ndarray
    metric: MetricChoice = field(default_factory=MetricChoice)
    lp_iterations: int = 0


def m1_distance(p: DiscreteMeasure, q: DiscreteMeasure, tol: float = MARGINAL_TOL) -> float:
    """
    Monotone-class distance between laws with common marginals.

    Under common marginals it equals the survival-copula sup distance, which in
    turn is attained at the marginal CDF grid, i.e. at orthants anchored on atom
    coordinates. Without common marginals that chain breaks; use
    `survival_sup_distance` directly as a lower bound instead.
    """

    if not common_marginals_check(p, q, tol):
        raise MarginalMismatchError("m1_distance requires laws with common marginals")
    if p.dim == 1:
        # a 1-D law is its own marginal
        return 0.0
    return survival_sup_distance(p, q)


def _bl_program(
    signed: np.ndarray,
    dist: np.ndarray,
    rows_i: np.ndarray,
    rows_j: np.ndarray,
) -> LinearProgram:
    n = signed.shape[0]
    nv = n + 2
    c0, c1 = n, n + 1
    eye = np.eye(n)

    bound_rows = np.zeros((2 * n, nv))
    bound_rows[:n, :n] = eye
    bound_rows[n:, :n] = -eye
    bound_rows[:, c0] = -1.0

    pair_rows = np.zeros((rows_i.shape[0], nv))
    k = np.arange(rows_i.shape[0])
    pair_rows[k, rows_i] = 1.0
    pair_rows[k, rows_j] = -1.0
    pair_rows[k, c1] = -dist[rows_i, rows_j]

    budget = np.zeros((1, nv))
    budget[0, [c0, c1]] = 1.0

    a = np.vstack([bound_rows, pair_rows, budget])
    b = np.concatenate([np.zeros(2 * n + rows_i.shape[0]), [1.0]])
    lower = np.concatenate([np.full(n, -math.inf), [0.0, 0.0]])
    return LinearProgram(objective=np.concatenate([signed, [0.0, 0.0]]), a_ub=a, b_ub=b, lower=lower)


def bl1_distance(
    p: DiscreteMeasure,
    q: DiscreteMeasure,
    metric: MetricChoice | None = None,
    max_support: int | None = None,
) -> BLReport:
    """
    Exact bounded-Lipschitz distance as a linear program over the union support.

    Variables are f at each support point plus the budgets c0 and c1. A feasible f
    on the support extends to all of R^K with the same norms (McShane extension,
    then clipping to [-c0, c0]), so the LP optimum is the distance itself. The
    absolute value needs no extra work since -f is feasible whenever f is.
    """

    metric = metric or MetricChoice()
    limit = settings.bl_max_support if max_support is None else max_support
    support, pw, qw = union_support(p, q)
    n = support.shape[0]
    if n > limit:
        raise MeasureError(f"union support has {n} points, bl1_distance accepts at most {limit}")

    signed = pw - qw
    dist = metric.pairwise(support)
    all_i, all_j = np.nonzero(~np.eye(n, dtype=bool))
    active = np.ones(all_i.shape[0], dtype=bool) if all_i.shape[0] <= _FULL_PAIR_LIMIT else np.zeros(all_i.shape[0], dtype=bool)

    iterations = 0
    rounds = 0
    while True:
        rounds += 1
        program = _bl_program(signed, dist, all_i[active], all_j[active])
        solution = solve(program)
        iterations += solution.iterations
        if not solution.optimal:
            raise LPError(solution.status, program.num_vars, program.num_constraints)
        f = solution.x[:n]
        c1 = solution.x[n + 1]
        slack = f[all_i] - f[all_j] - dist[all_i, all_j] * c1
        violated = np.flatnonzero((slack > CERT_TOL) & ~active)
        if violated.size == 0:
            break
        worst = violated[np.argsort(-slack[violated], kind="stable")[: max(n, 64)]]
        active[worst] = True

    logger.debug(
        "bl1 LP: %d support points, %d pair rows, %d rounds, %d pivots",
        n,
        int(active.sum()),
        rounds,
        iterations,
    )
    return BLReport(
        value=max(float(solution.value), 0.0),
        witness_values=f.copy(),
        sup_part=float(solution.x[n]),
        lip_part=float(c1),
        support=support,
        metric=metric,
        lp_iterations=iterations,
    )


def check_bl_certificate(
    report: BLReport,
    p: DiscreteMeasure,
    q: DiscreteMeasure,
    tol: float = CERT_TOL,
) -> bool:
    """Re-check a witness against every constraint and the claimed value, without the solver."""

    support, pw, qw = union_support(p, q)
    if support.shape != report.support.shape or not np.array_equal(support, report.support):
        return False
    f = report.witness_values
    c0, c1 = report.sup_part, report.lip_part
    if c0 < -tol or c1 < -tol or c0 + c1 > 1.0 + tol:
        return False
    if np.any(np.abs(f) > c0 + tol):
        return False
    gaps = f[:, None] - f[None, :] - c1 * report.metric.pairwise(support)
    if np.any(gaps > tol):
        return False
    return abs(float(f @ (pw - qw)) - report.value) <= tol


def bl1_coupling_bound(coupling: Coupling, metric: MetricChoice | None = None) -> float:
    """E r_p(X, X') under the coupling; dominates the BL distance of its two laws."""

    metric = metric or MetricChoice()
    xs, ys = coupling.pairs()
    return float(coupling.base.weights @ metric.rowwise(xs, ys))


def theorem2_bound(d_bl: float, dim: int, metric: MetricChoice | None = None) -> float:
    """min(2^{3/2} K^{(p-1)/(2p)} sqrt(d_bl), 1); the exponent is 1/2 at p = inf."""

    metric = metric or MetricChoice()
    if d_bl < 0:
        raise ValueError(f"d_bl must be >= 0, got {d_bl!r}")
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    exponent = 0.5 if metric.is_max else (metric.p - 1.0) / (2.0 * metric.p)
    return min(2.0**1.5 * dim**exponent * math.sqrt(d_bl), 1.0)


class MonotoneFunction(Protocol):
    def __call__(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class OrthantIndicator:
    """1 on the orthant [corner, inf) (closed) or (corner, inf) (open)."""

    corner: tuple[float, ...]
    closed: bool = True

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        corner = np.asarray(self.corner, dtype=float)
        hits = points >= corner if self.closed else points > corner
        return np.all(hits, axis=1).astype(float)


@dataclass(frozen=True)
class ConstantFunction:
    value: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(points).shape[0], float(self.value))


def _check_monotone(values: np.ndarray, support: np.ndarray, tol: float) -> bool:
    for start in range(0, support.shape[0], 512):
        block = support[start : start + 512]
        below = np.all(block[:, None, :] <= support[None, :, :], axis=2)
        drops = values[start : start + 512][:, None] - values[None, :]
        if np.any(below & (drops > tol)):
            return False
    return True


def monotone_lb(
    p: DiscreteMeasure,
    q: DiscreteMeasure,
    functions: Iterable[MonotoneFunction],
    tol: float = 1e-12,
) -> float:
    """
    max over the given coordinatewise nondecreasing [0,1]-valued f of |E_P f - E_Q f|.

    Each f is checked on the union support; any member of the monotone class gives
    a lower bound on the monotone-class distance.
    """

    support, pw, qw = union_support(p, q)
    signed = pw - qw
    best = 0.0
    for index, f in enumerate(functions):
        values = np.asarray(f(support), dtype=float).reshape(-1)
        if values.shape[0] != support.shape[0]:
            raise ValueError(f"test function {index} returned {values.shape[0]} values for {support.shape[0]} points")
        if np.any(values < -tol) or np.any(values > 1.0 + tol):
            raise ValueError(f"test function {index} leaves [0, 1] on the support")
        if not _check_monotone(values, support, tol):
            raise ValueError(f"test function {index} is not coordinatewise nondecreasing on the support")
        best = max(best, abs(float(values @ signed)))
    return best
