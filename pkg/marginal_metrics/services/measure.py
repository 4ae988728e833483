from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12
INPUT_WEIGHT_TOL = 1e-9

# Above this many grid points a 2-D sup is computed by the plane sweep instead.
_GRID_POINT_LIMIT = 250_000


class MeasureError(ValueError):
    """Atoms or weights do not describe a finitely supported probability law."""


def _readonly(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """
    Finitely supported probability law on R^K.

    `atoms` is an (n, K) array of distinct points in lexicographic order and
    `weights` the matching (n,) array of positive probabilities. Build values with
    `make_measure`, which merges duplicates and canonicalizes the order.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        atoms = _readonly(self.atoms)
        weights = _readonly(self.weights)
        if atoms.ndim != 2 or atoms.shape[0] == 0 or atoms.shape[1] == 0:
            raise MeasureError(f"atoms must be a nonempty (n, K) array, got shape {atoms.shape}")
        if weights.shape != (atoms.shape[0],):
            raise MeasureError(f"expected {atoms.shape[0]} weights, got shape {weights.shape}")
        if not np.all(np.isfinite(atoms)):
            raise MeasureError("atoms must be finite")
        if np.any(weights < 0):
            raise MeasureError("weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise MeasureError(f"weights sum to {total!r}, expected 1")
        if np.unique(atoms, axis=0).shape[0] != atoms.shape[0]:
            raise MeasureError("atoms must be pairwise distinct; use make_measure to merge duplicates")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return int(self.atoms.shape[1])

    @property
    def size(self) -> int:
        return int(self.atoms.shape[0])

    def expectation(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dim={self.dim}, size={self.size})"


@dataclass(frozen=True)
class Coupling:
    """Joint law of (X, X') on R^{2K} whose halves project onto `left` and `right`."""

    base: DiscreteMeasure
    left: DiscreteMeasure
    right: DiscreteMeasure

    def __post_init__(self) -> None:
        k = self.left.dim
        if self.right.dim != k or self.base.dim != 2 * k:
            raise MeasureError(
                f"coupling of dim {self.base.dim} cannot join laws of dims {self.left.dim} and {self.right.dim}"
            )
        if not measures_equal(project(self.base, range(k)), self.left, WEIGHT_TOL):
            raise MeasureError("coupling does not project onto its left marginal")
        if not measures_equal(project(self.base, range(k, 2 * k)), self.right, WEIGHT_TOL):
            raise MeasureError("coupling does not project onto its right marginal")

    @property
    def dim(self) -> int:
        return self.left.dim

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.dim
        return self.base.atoms[:, :k], self.base.atoms[:, k:]


def make_measure(points: Sequence | np.ndarray, weights: Sequence[float] | np.ndarray | None = None) -> DiscreteMeasure:
    """
    Build a measure from atoms and (optional, default uniform) weights.

    Duplicate atoms are merged by summing their weights and zero-weight atoms are
    dropped. A flat sequence of scalars is read as a list of 1-D atoms. Weights
    must sum to 1 within 1e-9; they are then renormalized exactly.
    """

    try:
        atoms = np.asarray(points, dtype=float)
    except ValueError as e:
        raise MeasureError(f"points must all have the same dimension ({e})") from None
    if atoms.ndim == 1:
        atoms = atoms.reshape(-1, 1)
    if atoms.ndim != 2 or atoms.shape[0] == 0:
        raise MeasureError("points must be a nonempty list of K-vectors")
    if atoms.shape[1] == 0:
        raise MeasureError("points must have dimension K >= 1")
    if not np.all(np.isfinite(atoms)):
        raise MeasureError("points must be finite")

    n = atoms.shape[0]
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != n:
            raise MeasureError(f"got {n} points but {w.shape[0]} weights")
        if not np.all(np.isfinite(w)):
            raise MeasureError("weights must be finite")
        if np.any(w < 0):
            raise MeasureError(f"negative weight {float(w.min())!r}")
        total = float(w.sum())
        if abs(total - 1.0) > INPUT_WEIGHT_TOL:
            raise MeasureError(f"weight sum {total!r} is not 1")

    # +0.0 folds -0.0 into 0.0 so signed zeros merge.
    uniq, inverse = np.unique(atoms + 0.0, axis=0, return_inverse=True)
    merged = np.bincount(inverse.reshape(-1), weights=w, minlength=uniq.shape[0])
    keep = merged > 0
    uniq, merged = uniq[keep], merged[keep]
    return DiscreteMeasure(atoms=uniq, weights=merged / merged.sum())


def point_mass(point: Sequence[float] | float) -> DiscreteMeasure:
    return make_measure([np.atleast_1d(np.asarray(point, dtype=float))], [1.0])


def measures_equal(p: DiscreteMeasure, q: DiscreteMeasure, tol: float = WEIGHT_TOL) -> bool:
    return (
        p.atoms.shape == q.atoms.shape
        and np.array_equal(p.atoms, q.atoms)
        and bool(np.allclose(p.weights, q.weights, rtol=0.0, atol=tol))
    )


def _require_same_dim(p: DiscreteMeasure, q: DiscreteMeasure) -> None:
    if p.dim != q.dim:
        raise MeasureError(f"dimension mismatch: {p.dim} vs {q.dim}")


def project(p: DiscreteMeasure, axes: Sequence[int] | range) -> DiscreteMeasure:
    axes = list(axes)
    for axis in axes:
        if not 0 <= axis < p.dim:
            raise MeasureError(f"axis {axis} out of range for dimension {p.dim}")
    return make_measure(p.atoms[:, axes], p.weights)


def marginal(p: DiscreteMeasure, axis: int) -> DiscreteMeasure:
    """Law of the coordinate `axis` (0-based) as a 1-D measure."""

    return project(p, [axis])


def marginals(p: DiscreteMeasure) -> list[DiscreteMeasure]:
    return [marginal(p, axis) for axis in range(p.dim)]


def product_of_marginals(p: DiscreteMeasure) -> DiscreteMeasure:
    margins = marginals(p)
    grids = np.meshgrid(*[m.atoms[:, 0] for m in margins], indexing="ij")
    atoms = np.stack([g.reshape(-1) for g in grids], axis=1)
    weights = reduce(np.multiply.outer, [m.weights for m in margins]).reshape(-1)
    return make_measure(atoms, weights)


def common_marginals_check(p: DiscreteMeasure, q: DiscreteMeasure, tol: float = WEIGHT_TOL) -> bool:
    _require_same_dim(p, q)
    for axis in range(p.dim):
        a, b = marginal(p, axis), marginal(q, axis)
        if a.size != b.size or not np.array_equal(a.atoms, b.atoms):
            return False
        if not np.allclose(a.weights, b.weights, rtol=0.0, atol=tol):
            return False
    return True


def survival(p: DiscreteMeasure, u: Sequence[float] | np.ndarray, closed: bool = True) -> float:
    """P([u, inf)) for closed orthants, P((u, inf)) otherwise."""

    point = np.asarray(u, dtype=float).reshape(-1)
    if point.shape[0] != p.dim:
        raise MeasureError(f"threshold has dimension {point.shape[0]}, measure has {p.dim}")
    mask = np.all(p.atoms >= point, axis=1) if closed else np.all(p.atoms > point, axis=1)
    return float(p.weights[mask].sum())


def union_support(p: DiscreteMeasure, q: DiscreteMeasure) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Union of both supports with the weight each law puts on every point."""

    _require_same_dim(p, q)
    support, inverse = np.unique(np.vstack([p.atoms, q.atoms]), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    pw = np.zeros(support.shape[0])
    qw = np.zeros(support.shape[0])
    pw[inverse[: p.size]] = p.weights
    qw[inverse[p.size :]] = q.weights
    return support, pw, qw


def _axis_grid(values: np.ndarray) -> np.ndarray:
    levels = np.unique(values)
    return np.concatenate([[levels[0] - 1.0], levels])


def _orthant_table(atoms: np.ndarray, weights: np.ndarray, grids: list[np.ndarray], closed: bool) -> np.ndarray:
    operands: list = [weights, [0]]
    for axis, grid in enumerate(grids):
        column = atoms[:, axis][:, None]
        hits = column >= grid[None, :] if closed else column > grid[None, :]
        operands += [hits.astype(float), [0, axis + 1]]
    return np.einsum(*operands, list(range(1, len(grids) + 1)), optimize=True)


def _grid_sup(p: DiscreteMeasure, q: DiscreteMeasure, closed: bool) -> float:
    # One table per law on the shared grid, so equal laws give bitwise-equal tables.
    grids = [_axis_grid(np.concatenate([p.atoms[:, axis], q.atoms[:, axis]])) for axis in range(p.dim)]
    table_p = _orthant_table(p.atoms, p.weights, grids, closed)
    table_q = _orthant_table(q.atoms, q.weights, grids, closed)
    return float(np.max(np.abs(table_p - table_q)))


class _PrefixAddTree:
    """Prefix range-add with the running max and min over all positions."""

    def __init__(self, n: int) -> None:
        size = 1
        while size < n:
            size *= 2
        self._size = size
        self._mx = [0.0] * (2 * size)
        self._mn = [0.0] * (2 * size)
        self._lz = [0.0] * size
        for leaf in range(size + n, 2 * size):
            self._mx[leaf] = -math.inf
            self._mn[leaf] = math.inf
        for node in range(size - 1, 0, -1):
            self._mx[node] = max(self._mx[2 * node], self._mx[2 * node + 1])
            self._mn[node] = min(self._mn[2 * node], self._mn[2 * node + 1])

    def _apply(self, node: int, w: float) -> None:
        self._mx[node] += w
        self._mn[node] += w
        if node < self._size:
            self._lz[node] += w

    def _rebuild(self, node: int) -> None:
        mx, mn, lz = self._mx, self._mn, self._lz
        node >>= 1
        while node >= 1:
            mx[node] = max(mx[2 * node], mx[2 * node + 1]) + lz[node]
            mn[node] = min(mn[2 * node], mn[2 * node + 1]) + lz[node]
            node >>= 1

    def add_prefix(self, length: int, w: float) -> None:
        if length <= 0:
            return
        lo, hi = self._size, self._size + length
        lo0, hi0 = lo, hi
        while lo < hi:
            if lo & 1:
                self._apply(lo, w)
                lo += 1
            if hi & 1:
                hi -= 1
                self._apply(hi, w)
            lo >>= 1
            hi >>= 1
        self._rebuild(lo0)
        self._rebuild(hi0 - 1)

    @property
    def max(self) -> float:
        return self._mx[1]

    @property
    def min(self) -> float:
        return self._mn[1]


def _sweep_sup_2d(atoms: np.ndarray, signed: np.ndarray, closed: bool) -> float:
    # Position 0 is the threshold below every second coordinate, position j+1 the j-th level.
    levels = np.unique(atoms[:, 1])
    rank = np.searchsorted(levels, atoms[:, 1])
    prefix = rank + 2 if closed else rank + 1

    order = np.argsort(-atoms[:, 0], kind="stable")
    first = atoms[order, 0].tolist()
    lengths = prefix[order].tolist()
    ws = signed[order].tolist()

    tree = _PrefixAddTree(levels.shape[0] + 1)
    best = 0.0
    last = len(first) - 1
    for idx in range(len(first)):
        tree.add_prefix(lengths[idx], ws[idx])
        if idx == last or first[idx + 1] != first[idx]:
            best = max(best, tree.max, -tree.min)
    return float(best)


def survival_sup_distance(
    p: DiscreteMeasure,
    q: DiscreteMeasure,
    closed: bool = True,
    method: str = "auto",
) -> float:
    """
    sup_u |P(orthant at u) - Q(orthant at u)|, computed exactly.

    Orthant probabilities of discrete laws only change at atom coordinates, so the
    sup over R^K is a max over the grid of atom coordinate values (plus one point
    below all values per axis). For K = 2 and large grids a plane sweep visits the
    same grid in O(N log N).
    """

    _require_same_dim(p, q)
    atoms, pw, qw = union_support(p, q)

    if method == "auto":
        grid_points = math.prod(np.unique(atoms[:, axis]).shape[0] + 1 for axis in range(p.dim))
        method = "sweep" if p.dim == 2 and grid_points > _GRID_POINT_LIMIT else "grid"
    logger.debug("survival sup over %d atoms, dim %d, method %s", atoms.shape[0], p.dim, method)

    if method == "sweep":
        if p.dim != 2:
            raise MeasureError("the plane sweep handles dimension 2 only")
        value = _sweep_sup_2d(atoms, pw - qw, closed)
    elif method == "grid":
        value = _grid_sup(p, q, closed)
    else:
        raise MeasureError(f"unknown method {method!r}")
    return min(max(value, 0.0), 1.0)


def random_common_marginal_pair(seed: int, dim: int, n: int) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """
    Two uniform n-atom laws on R^dim with identical marginals.

    Each axis gets n distinct integers; both laws pair the first axis with
    independent random permutations of the others, so the marginals agree exactly.
    Integer values keep distinct atoms at least 1 apart in every r_p.
    """

    if n < 1 or dim < 1:
        raise MeasureError(f"need n >= 1 and dim >= 1, got n={n}, dim={dim}")
    rng = np.random.default_rng(seed)
    values = [np.sort(rng.choice(4 * n, size=n, replace=False)).astype(float) for _ in range(dim)]

    def _draw() -> DiscreteMeasure:
        columns = [values[0]] + [rng.permutation(v) for v in values[1:]]
        return make_measure(np.stack(columns, axis=1))

    return _draw(), _draw()


def independent_coupling(p: DiscreteMeasure, q: DiscreteMeasure) -> Coupling:
    _require_same_dim(p, q)
    left = np.repeat(p.atoms, q.size, axis=0)
    right = np.tile(q.atoms, (p.size, 1))
    weights = np.multiply.outer(p.weights, q.weights).reshape(-1)
    return Coupling(base=make_measure(np.hstack([left, right]), weights), left=p, right=q)


def diagonal_coupling(p: DiscreteMeasure) -> Coupling:
    return Coupling(base=make_measure(np.hstack([p.atoms, p.atoms]), p.weights), left=p, right=p)


def empirical_coupling(xs: np.ndarray, ys: np.ndarray) -> Coupling:
    """Coupling carried by paired samples: the i-th rows of xs and ys are one draw."""

    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim == 1:
        xs, ys = xs.reshape(-1, 1), ys.reshape(-1, 1)
    if xs.shape != ys.shape:
        raise MeasureError(f"paired samples differ in shape: {xs.shape} vs {ys.shape}")
    return Coupling(base=make_measure(np.hstack([xs, ys])), left=make_measure(xs), right=make_measure(ys))
