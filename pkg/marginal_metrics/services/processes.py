from __future__ import annotations

import logging
import math
import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from marginal_metrics.models import DecayRow
from marginal_metrics.services.measure import make_measure, survival_sup_distance
from marginal_metrics.services.metrics import MetricChoice, theorem2_bound

logger = logging.getLogger(__name__)

# Draws per worker task when simulating in parallel.
_CHUNK = 2048

InnovationSource = Callable[[np.random.Generator, int], np.ndarray]


class Innovation(str, Enum):
    NORMAL = "normal"
    UNIFORM = "uniform"
    RADEMACHER = "rademacher"

    @property
    def mean_abs(self) -> float:
        """E|Z| for one innovation."""

        if self is Innovation.NORMAL:
            return math.sqrt(2.0 / math.pi)
        if self is Innovation.UNIFORM:
            return 0.5
        return 1.0

    @property
    def bounded(self) -> bool:
        return self is not Innovation.NORMAL

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self is Innovation.NORMAL:
            return rng.standard_normal(size)
        if self is Innovation.UNIFORM:
            return rng.uniform(-1.0, 1.0, size)
        return rng.choice(np.array([-1.0, 1.0]), size=size)


@dataclass(frozen=True, eq=False)
class LinearProcessSpec:
    """
    Truncated moving average Y_t = sum_{s=0}^{T} a_s Z_{t-s}.

    `coefficients` holds a_0..a_T with T >= 1; lags past T are zero.
    """

    coefficients: np.ndarray
    innovation: Innovation = Innovation.NORMAL

    def __post_init__(self) -> None:
        a = np.array(self.coefficients, dtype=float, copy=True).reshape(-1)
        if a.shape[0] < 2:
            raise ValueError("need coefficients a_0..a_T with T >= 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "innovation", Innovation(self.innovation))

    @classmethod
    def geometric(cls, rho: float, truncation: int, innovation: Innovation | str = Innovation.NORMAL) -> "LinearProcessSpec":
        if not abs(rho) < 1.0:
            raise ValueError(f"geometric coefficients need |rho| < 1, got {rho!r}")
        if truncation < 1:
            raise ValueError(f"truncation must be >= 1, got {truncation}")
        return cls(coefficients=rho ** np.arange(truncation + 1, dtype=float), innovation=Innovation(innovation))

    @classmethod
    def explicit(cls, coefficients: Sequence[float], innovation: Innovation | str = Innovation.NORMAL) -> "LinearProcessSpec":
        a = list(coefficients)
        if not a:
            raise ValueError("need at least a_0")
        if len(a) == 1:
            a.append(0.0)
        return cls(coefficients=np.asarray(a, dtype=float), innovation=Innovation(innovation))

    @property
    def truncation(self) -> int:
        return int(self.coefficients.shape[0] - 1)

    def tail_sum(self, n: int) -> float:
        """sum_{n <= s <= T} |a_s|."""

        return float(np.abs(self.coefficients[n:]).sum())


def _draw_block(
    spec: LinearProcessSpec,
    n: int,
    seed: int,
    start: int,
    stop: int,
    source: Optional[InnovationSource],
) -> tuple[np.ndarray, np.ndarray]:
    a = spec.coefficients
    big_t = spec.truncation
    lags = np.arange(big_t + 1)
    recent = lags < n
    # Innovations cover times -T..n; the copy covers the shared past -T..0.
    now_idx = n + big_t - lags
    y0_idx = big_t - lags

    draw = source or spec.innovation.draw
    xs = np.empty((stop - start, 2))
    xs_copy = np.empty((stop - start, 2))
    for row, i in enumerate(range(start, stop)):
        rng = np.random.default_rng([seed, i])
        z = np.asarray(draw(rng, big_t + n + 1), dtype=float)
        z_copy = np.asarray(draw(rng, big_t + 1), dtype=float)

        y0 = a @ z[y0_idx]
        head = a[recent] @ z[now_idx[recent]]
        tail = a[~recent] @ z[now_idx[~recent]]
        tail_copy = a[~recent] @ z_copy[now_idx[~recent]]
        xs[row] = (y0, head + tail)
        xs_copy[row] = (y0, head + tail_copy)
    return xs, xs_copy


def _picklable(obj: object) -> bool:
    try:
        pickle.dumps(obj)
    except (pickle.PicklingError, AttributeError, TypeError):
        return False
    return True


def simulate_pair(
    spec: LinearProcessSpec,
    n: int,
    samples: int,
    seed: int,
    innovation_source: Optional[InnovationSource] = None,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Paired draws of X = (Y_0, Y_n) and X' = (Y_0, Y'_n).

    Y'_n keeps the innovations at times 1..n and swaps those at times <= 0 for an
    independent copy, so X' has an independent tail while sharing Y_0. Draw i uses
    its own generator seeded by (seed, i), so results do not depend on `workers`.
    `innovation_source(rng, size)` replaces the innovation law when given.
    A hook that cannot be pickled is drawn in this process whatever `workers` says.
    """

    if n < 1 or samples < 1:
        raise ValueError(f"need n >= 1 and samples >= 1, got n={n}, samples={samples}")

    if workers > 1 and innovation_source is not None and not _picklable(innovation_source):
        logger.warning("innovation source %r cannot be sent to workers; drawing serially", innovation_source)
        workers = 1
    if workers <= 1 or samples <= _CHUNK:
        return _draw_block(spec, n, seed, 0, samples, innovation_source)

    bounds = [(lo, min(lo + _CHUNK, samples)) for lo in range(0, samples, _CHUNK)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_draw_block, spec, n, seed, lo, hi, innovation_source) for lo, hi in bounds]
        blocks = [f.result() for f in futures]
    logger.debug("simulated %d draws in %d blocks on %d workers", samples, len(blocks), workers)
    return np.vstack([b[0] for b in blocks]), np.vstack([b[1] for b in blocks])


def analytic_bound(spec: LinearProcessSpec, n: int) -> float:
    """2 E|Z| sum_{n <= s <= T} |a_s|, the coupling bound on the BL distance at lag n."""

    if n < 1:
        raise ValueError(f"lag must be >= 1, got {n}")
    return 2.0 * spec.innovation.mean_abs * spec.tail_sum(n)


def decay_experiment(
    spec: LinearProcessSpec,
    lags: Sequence[int],
    samples: int,
    seed: int,
    workers: int = 1,
    innovation_source: Optional[InnovationSource] = None,
) -> list[DecayRow]:
    if not lags:
        raise ValueError("need at least one lag")
    r1 = MetricChoice(1.0)
    rows: list[DecayRow] = []
    for n in lags:
        xs, xs_copy = simulate_pair(spec, n, samples, seed, innovation_source=innovation_source, workers=workers)
        shift = r1.rowwise(xs, xs_copy)
        coupling = float(shift.mean())
        se = float(shift.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        sup = survival_sup_distance(make_measure(xs), make_measure(xs_copy))
        row = DecayRow(
            n=int(n),
            coupling_bound_emp=coupling,
            coupling_bound_se=se,
            analytic_bound=analytic_bound(spec, n),
            survival_sup=sup,
            theorem2_of_coupling=theorem2_bound(coupling, 2, r1),
        )
        logger.info("lag %d: coupling %.6g (se %.2g), analytic %.6g, survival sup %.6g", n, coupling, se, row.analytic_bound, sup)
        rows.append(row)
    return rows
