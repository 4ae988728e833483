from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from marginal_metrics.services.measure import WEIGHT_TOL, DiscreteMeasure, make_measure, marginals

logger = logging.getLogger(__name__)

GRID_TOL = 1e-12
UNIFORM_MARGINAL_TOL = 1e-9


class CopulaError(ValueError):
    """A rectangle mixture or a transform argument is malformed."""


def _readonly(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _axis_cdf(lower: np.ndarray, upper: np.ndarray, weights: np.ndarray, t: np.ndarray) -> np.ndarray:
    frac = np.clip((t[None, :] - lower[:, None]) / (upper - lower)[:, None], 0.0, 1.0)
    return weights @ frac


@dataclass(frozen=True, eq=False)
class RectMixture:
    """
    Copula of a discrete law: a mixture of uniform laws on boxes in [0,1]^K.

    Component i is uniform on prod_k [lower[i,k], upper[i,k]] with mass weights[i].
    Every axis must integrate to the uniform law on [0,1]; the marginal CDF is
    piecewise linear between box endpoints, so that is checked exactly there.
    """

    lower: np.ndarray
    upper: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        lower, upper, weights = _readonly(self.lower), _readonly(self.upper), _readonly(self.weights)
        if lower.ndim != 2 or lower.shape != upper.shape or lower.shape[0] == 0:
            raise CopulaError(f"bounds must be matching nonempty (m, K) arrays, got {lower.shape} and {upper.shape}")
        if weights.shape != (lower.shape[0],):
            raise CopulaError(f"expected {lower.shape[0]} weights, got shape {weights.shape}")
        if np.any(lower < 0) or np.any(upper > 1) or np.any(lower >= upper):
            raise CopulaError("every box needs 0 <= lower < upper <= 1 on every axis")
        if np.any(weights < 0) or abs(float(weights.sum()) - 1.0) > WEIGHT_TOL:
            raise CopulaError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "weights", weights)

        error = self.uniform_marginal_error()
        if error > UNIFORM_MARGINAL_TOL:
            raise CopulaError(f"marginals are not uniform (max deviation {error:.3e})")

    @property
    def dim(self) -> int:
        return int(self.lower.shape[1])

    @property
    def size(self) -> int:
        return int(self.lower.shape[0])

    def axis_cdf(self, axis: int, t: Sequence[float] | np.ndarray) -> np.ndarray:
        return _axis_cdf(self.lower[:, axis], self.upper[:, axis], self.weights, np.asarray(t, dtype=float))

    def uniform_marginal_error(self, t: Sequence[float] | np.ndarray | None = None) -> float:
        """Largest |F_k(t) - t| over axes, at box endpoints unless a grid is given."""

        worst = 0.0
        for axis in range(self.dim):
            if t is None:
                grid = np.unique(np.concatenate([self.lower[:, axis], self.upper[:, axis], [0.0, 1.0]]))
            else:
                grid = np.asarray(t, dtype=float)
            worst = max(worst, float(np.max(np.abs(self.axis_cdf(axis, grid) - grid))))
        return worst

    def __repr__(self) -> str:
        return f"RectMixture(dim={self.dim}, size={self.size})"


def _require_1d(p1: DiscreteMeasure) -> None:
    if p1.dim != 1:
        raise CopulaError(f"expected a 1-D measure, got dimension {p1.dim}")


def cdf_jumps(p1: DiscreteMeasure) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Atom values with F(x-) and F(x) at each; consecutive intervals share endpoints exactly."""

    _require_1d(p1)
    right = np.cumsum(p1.weights)
    right[-1] = 1.0
    left = np.concatenate([[0.0], right[:-1]])
    return p1.atoms[:, 0], left, right


def dtransform(p1: DiscreteMeasure, x: float, v: float) -> float:
    """Distributional transform Pr(X < x) + v Pr(X = x)."""

    _require_1d(p1)
    if not 0.0 <= v <= 1.0:
        raise CopulaError(f"v must lie in [0, 1], got {v!r}")
    values = p1.atoms[:, 0]
    below = float(p1.weights[values < x].sum())
    at = float(p1.weights[values == x].sum())
    return below + v * at


def pseudo_inverse(p1: DiscreteMeasure, u: float) -> float:
    """inf{x : Pr(X <= x) >= u} for u in (0, 1]."""

    if not 0.0 < u <= 1.0:
        raise CopulaError(f"u must lie in (0, 1], got {u!r}")
    values, _, right = cdf_jumps(p1)
    idx = int(np.searchsorted(right, u, side="left"))
    return float(values[min(idx, values.shape[0] - 1)])


def to_copula(p: DiscreteMeasure) -> RectMixture:
    """
    Exact law of the distributional transform of X ~ p.

    Given an atom x, the k-th coordinate is uniform on [F_k(x_k-), F_k(x_k)] and the
    randomizers are independent, so each atom becomes one uniform box.
    """

    lower = np.empty(p.atoms.shape)
    upper = np.empty(p.atoms.shape)
    for axis, margin in enumerate(marginals(p)):
        values, left, right = cdf_jumps(margin)
        idx = np.searchsorted(values, p.atoms[:, axis])
        lower[:, axis] = left[idx]
        upper[:, axis] = right[idx]
    return RectMixture(lower=lower, upper=upper, weights=p.weights)


def independence_copula(dim: int) -> RectMixture:
    if dim < 1:
        raise CopulaError(f"dimension must be >= 1, got {dim}")
    return RectMixture(lower=np.zeros((1, dim)), upper=np.ones((1, dim)), weights=np.ones(1))


def _points(c: RectMixture, u: Sequence[float] | np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(u, dtype=float))
    if pts.shape[1] != c.dim:
        raise CopulaError(f"point has dimension {pts.shape[1]}, copula has {c.dim}")
    if np.any(pts < 0) or np.any(pts > 1):
        raise CopulaError("points must lie in the unit cube")
    return pts


def _box_fractions(c: RectMixture, pts: np.ndarray, upper_tail: bool) -> np.ndarray:
    width = (c.upper - c.lower)[None, :, :]
    if upper_tail:
        frac = (c.upper[None, :, :] - pts[:, None, :]) / width
    else:
        frac = (pts[:, None, :] - c.lower[None, :, :]) / width
    return np.clip(frac, 0.0, 1.0).prod(axis=2) @ c.weights


def copula_cdf(c: RectMixture, u: Sequence[float] | np.ndarray) -> float | np.ndarray:
    """Pr(U <= u); a 2-D array of points returns one value per row."""

    values = _box_fractions(c, _points(c, u), upper_tail=False)
    return float(values[0]) if np.ndim(u) == 1 else values


def survival_copula(c: RectMixture, u: Sequence[float] | np.ndarray) -> float | np.ndarray:
    """Pr(U >= u); a 2-D array of points returns one value per row."""

    values = _box_fractions(c, _points(c, u), upper_tail=True)
    return float(values[0]) if np.ndim(u) == 1 else values


def copula_sup_distance(c: RectMixture, d: RectMixture) -> float:
    """
    sup over the unit cube of |survival_copula(c) - survival_copula(d)|.

    Inside each cell of the grid of box endpoints the difference is affine in every
    coordinate separately, so its extremes sit on cell vertices and the max over
    the vertex grid is exact.
    """

    if c.dim != d.dim:
        raise CopulaError(f"dimension mismatch: {c.dim} vs {d.dim}")
    grids = [
        np.unique(np.concatenate([c.lower[:, axis], c.upper[:, axis], d.lower[:, axis], d.upper[:, axis], [0.0, 1.0]]))
        for axis in range(c.dim)
    ]
    diff = _upper_tail_table(c, grids) - _upper_tail_table(d, grids)
    return min(float(np.max(np.abs(diff))), 1.0)


def _upper_tail_table(c: RectMixture, grids: list[np.ndarray]) -> np.ndarray:
    operands: list = [c.weights, [0]]
    for axis, grid in enumerate(grids):
        width = (c.upper[:, axis] - c.lower[:, axis])[:, None]
        frac = np.clip((c.upper[:, axis][:, None] - grid[None, :]) / width, 0.0, 1.0)
        operands += [frac, [0, axis + 1]]
    return np.einsum(*operands, list(range(1, len(grids) + 1)), optimize=True)


def quantile_map(u: Sequence[float] | np.ndarray, margins: Sequence[DiscreteMeasure]) -> np.ndarray:
    point = np.asarray(u, dtype=float).reshape(-1)
    if point.shape[0] != len(margins):
        raise CopulaError(f"got {point.shape[0]} coordinates for {len(margins)} marginals")
    return np.array([pseudo_inverse(m, float(uk)) for m, uk in zip(margins, point)])


def _edge_index(edges: np.ndarray, value: float, axis: int) -> int:
    idx = int(np.argmin(np.abs(edges - value)))
    if abs(edges[idx] - value) > GRID_TOL:
        raise CopulaError(f"box endpoint {value!r} on axis {axis} is not on the marginal CDF grid")
    return idx


def push_back(c: RectMixture, margins: Sequence[DiscreteMeasure]) -> DiscreteMeasure:
    """
    Law of (P_1^{-1}(U_1), ..., P_K^{-1}(U_K)) for U ~ c.

    Box endpoints must sit on the jump grids of the marginal CDFs. A box side that
    spans several jumps splits its mass across those atoms in proportion to the
    jump sizes.
    """

    if len(margins) != c.dim:
        raise CopulaError(f"got {len(margins)} marginals for a {c.dim}-dimensional copula")
    jumps = [cdf_jumps(m) for m in margins]
    edges = [np.concatenate([[0.0], right]) for _, _, right in jumps]

    points: list[tuple[float, ...]] = []
    weights: list[float] = []
    for i in range(c.size):
        per_axis: list[list[tuple[float, float]]] = []
        for axis, (values, _, _) in enumerate(jumps):
            lo, hi = c.lower[i, axis], c.upper[i, axis]
            a = _edge_index(edges[axis], lo, axis)
            b = _edge_index(edges[axis], hi, axis)
            share = np.diff(edges[axis][a : b + 1]) / (hi - lo)
            per_axis.append([(float(values[j]), float(s)) for j, s in zip(range(a, b), share)])
        for combo in itertools.product(*per_axis):
            points.append(tuple(x for x, _ in combo))
            weights.append(float(c.weights[i] * np.prod([s for _, s in combo])))

    logger.debug("pushed %d boxes back onto %d atoms", c.size, len(points))
    return make_measure(points, weights)
