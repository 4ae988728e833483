from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-9
ORACLE_MAX_VARS = 10
_ORACLE_CHUNK = 4096
_DET_TOL = 1e-10


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """
    maximize objective @ x  subject to  a_ub @ x <= b_ub,  lower <= x <= upper.

    Bounds default to x >= 0; pass -inf / +inf entries for free directions.
    Equalities are written by the caller as two opposite inequalities.
    """

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.shape[0]
        a = np.asarray(self.a_ub, dtype=float).reshape(-1, n) if n else np.zeros((0, 0))
        b = np.asarray(self.b_ub, dtype=float).reshape(-1)
        if n == 0:
            raise ValueError("a linear program needs at least one variable")
        if a.shape[0] != b.shape[0]:
            raise ValueError(f"{a.shape[0]} constraint rows but {b.shape[0]} bounds")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("objective and constraint coefficients must be finite")
        lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.full(n, math.inf) if self.upper is None else np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != (n,) or upper.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(lower == math.inf) or np.any(upper == -math.inf) or np.any(lower > upper):
            raise ValueError("each variable needs lower <= upper with lower < +inf and upper > -inf")
        for name, value in (("objective", c), ("a_ub", a), ("b_ub", b), ("lower", lower), ("upper", upper)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_rows(
        cls,
        objective: Sequence[float],
        constraints: Iterable[tuple[Sequence[float], float]],
        lower: Sequence[float] | None = None,
        upper: Sequence[float] | None = None,
    ) -> "LinearProgram":
        rows = list(constraints)
        n = len(objective)
        a = np.array([row for row, _ in rows], dtype=float).reshape(-1, n)
        b = np.array([bound for _, bound in rows], dtype=float)
        return cls(objective=np.asarray(objective, dtype=float), a_ub=a, b_ub=b, lower=lower, upper=upper)

    @property
    def num_vars(self) -> int:
        return int(self.objective.shape[0])

    @property
    def num_constraints(self) -> int:
        return int(self.a_ub.shape[0])

    def max_violation(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        parts = [np.zeros(1), self.lower - x, x - self.upper]
        if self.num_constraints:
            parts.append(self.a_ub @ x - self.b_ub)
        return float(np.max(np.concatenate([np.nan_to_num(p, neginf=0.0) for p in parts])))


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: np.ndarray | None = None
    value: float | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _standard_form(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Substitute x = x0 + T y with y >= 0 and fold finite boxes into extra rows.

    Returns (T, x0, A_y, b_y, c_y) for: maximize c_y @ y s.t. A_y @ y <= b_y, y >= 0.
    """

    n = lp.num_vars
    columns: list[np.ndarray] = []
    x0 = np.zeros(n)
    box_rows: list[tuple[int, float]] = []
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        unit = np.zeros(n)
        unit[j] = 1.0
        if math.isfinite(lo):
            x0[j] = lo
            columns.append(unit)
            if math.isfinite(hi):
                box_rows.append((len(columns) - 1, hi - lo))
        elif math.isfinite(hi):
            x0[j] = hi
            columns.append(-unit)
        else:
            columns.append(unit)
            columns.append(-unit)

    t = np.stack(columns, axis=1)
    a_y = lp.a_ub @ t
    b_y = lp.b_ub - lp.a_ub @ x0
    if box_rows:
        extra = np.zeros((len(box_rows), t.shape[1]))
        for r, (col, width) in enumerate(box_rows):
            extra[r, col] = 1.0
        a_y = np.vstack([a_y, extra])
        b_y = np.concatenate([b_y, [w for _, w in box_rows]])
    return t, x0, a_y, b_y, lp.objective @ t


class _Tableau:
    """Dense simplex tableau; the last row holds reduced costs and -(objective value)."""

    def __init__(self, rows: np.ndarray, basis: list[int], tol: float) -> None:
        self.t = rows
        self.basis = basis
        self.tol = tol
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.t.shape[0] - 1

    def set_objective(self, costs: np.ndarray) -> None:
        row = np.zeros(self.t.shape[1])
        row[: costs.shape[0]] = costs
        for i, b in enumerate(self.basis):
            if row[b] != 0.0:
                row -= row[b] * self.t[i]
        self.t[-1] = row

    def pivot(self, row: int, col: int) -> None:
        t = self.t
        t[row] /= t[row, col]
        factors = t[:, col].copy()
        factors[row] = 0.0
        t -= np.outer(factors, t[row])
        rhs = t[:-1, -1]
        rhs[(rhs < 0) & (rhs > -self.tol)] = 0.0
        self.basis[row] = col
        self.iterations += 1

    def run(self, allowed: int, max_iterations: int) -> LPStatus:
        """Bland's rule: lowest-index improving column, lowest-index basic variable on ratio ties."""

        tol = self.tol
        while True:
            if self.iterations >= max_iterations:
                raise RuntimeError(f"simplex did not terminate within {max_iterations} pivots")
            reduced = self.t[-1, :allowed]
            candidates = np.flatnonzero(reduced > tol)
            if candidates.size == 0:
                return LPStatus.OPTIMAL
            col = int(candidates[0])
            column = self.t[:-1, col]
            positive = np.flatnonzero(column > tol)
            if positive.size == 0:
                return LPStatus.UNBOUNDED
            ratios = self.t[positive, -1] / column[positive]
            best = ratios.min()
            ties = positive[ratios <= best + tol * max(1.0, abs(best))]
            row = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(row, col)


def solve(lp: LinearProgram, tol: float = FEAS_TOL) -> LPSolution:
    """
    Two-phase dense simplex with Bland's anti-cycling rule.

    Infeasible and unbounded problems are reported through the status, never raised.
    """

    t, x0, a, b, c = _standard_form(lp)
    m, ny = a.shape

    flip = b < 0
    a = np.where(flip[:, None], -a, a)
    b = np.abs(b)
    slack_sign = np.where(flip, -1.0, 1.0)
    art_rows = np.flatnonzero(flip)
    n_art = art_rows.shape[0]

    width = ny + m + n_art
    rows = np.zeros((m + 1, width + 1))
    rows[:m, :ny] = a
    rows[np.arange(m), ny + np.arange(m)] = slack_sign
    rows[art_rows, ny + m + np.arange(n_art)] = 1.0
    rows[:m, -1] = b

    basis = [ny + i for i in range(m)]
    for k, i in enumerate(art_rows):
        basis[i] = ny + m + k
    tab = _Tableau(rows, basis, tol)
    max_iterations = 50 * (m + width + 10)

    if n_art:
        phase1 = np.zeros(width)
        phase1[ny + m :] = -1.0
        tab.set_objective(phase1)
        tab.run(allowed=ny + m, max_iterations=max_iterations)
        infeasibility = tab.t[-1, -1]
        if infeasibility > tol * max(1.0, float(b.max(initial=0.0))):
            logger.debug("phase 1 ended with infeasibility %.3e", infeasibility)
            return LPSolution(status=LPStatus.INFEASIBLE, iterations=tab.iterations)

        keep = []
        for i in range(tab.m):
            if tab.basis[i] >= ny + m:
                nonzero = np.flatnonzero(np.abs(tab.t[i, : ny + m]) > tol)
                if nonzero.size == 0:
                    continue
                tab.pivot(i, int(nonzero[0]))
            keep.append(i)
        tab.t = np.vstack([tab.t[keep], tab.t[-1:]])
        tab.t = np.delete(tab.t, np.s_[ny + m : width], axis=1)
        tab.basis = [tab.basis[i] for i in keep]

    tab.set_objective(np.concatenate([c, np.zeros(m)]))
    status = tab.run(allowed=ny + m, max_iterations=max_iterations)
    logger.debug("simplex finished: %s after %d pivots (%d rows, %d columns)", status.value, tab.iterations, m, ny + m)
    if status is LPStatus.UNBOUNDED:
        return LPSolution(status=status, iterations=tab.iterations)

    y = np.zeros(ny + m)
    for i, var in enumerate(tab.basis):
        y[var] = tab.t[i, -1]
    x = x0 + t @ y[:ny]
    return LPSolution(status=LPStatus.OPTIMAL, x=x, value=float(lp.objective @ x), iterations=tab.iterations)


def _inequality_system(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray]:
    n = lp.num_vars
    rows = [lp.a_ub]
    rhs = [lp.b_ub]
    eye = np.eye(n)
    finite_lo = np.isfinite(lp.lower)
    finite_hi = np.isfinite(lp.upper)
    rows += [-eye[finite_lo], eye[finite_hi]]
    rhs += [-lp.lower[finite_lo], lp.upper[finite_hi]]
    return np.vstack(rows), np.concatenate(rhs)


def _chunks(iterable: Iterable[tuple[int, ...]], size: int) -> Iterable[list[tuple[int, ...]]]:
    it = iter(iterable)
    while chunk := list(itertools.islice(it, size)):
        yield chunk


def enumerate_oracle(lp: LinearProgram, tol: float = FEAS_TOL) -> LPSolution:
    """
    Exhaustive vertex and extreme-ray enumeration; a ground truth for tiny problems.

    Any lineality space of the feasible set is pinned to zero first (the optimum is
    constant along it unless the objective moves with it, which means unbounded),
    after which a nonempty feasible set has a vertex and every unbounded direction
    is a nonnegative combination of extreme rays.
    """

    n = lp.num_vars
    if n > ORACLE_MAX_VARS:
        raise ValueError(f"instance too large for enumeration: {n} variables (limit {ORACLE_MAX_VARS})")

    g, h = _inequality_system(lp)
    norms = np.linalg.norm(g, axis=1)
    zero = norms <= tol
    if np.any(h[zero] < -tol):
        return LPSolution(status=LPStatus.INFEASIBLE)
    g, h = g[~zero] / norms[~zero, None], h[~zero] / norms[~zero]
    c = lp.objective

    if g.shape[0]:
        _, s, vt = np.linalg.svd(g)
        rank = int(np.sum(s > tol * max(1.0, float(s.max()))))
    else:
        vt, rank = np.eye(n), 0
    lineality = vt[rank:]
    moves_along_line = bool(lineality.shape[0]) and bool(np.any(np.abs(lineality @ c) > tol))

    best_value = -math.inf
    best_x: np.ndarray | None = None
    for chunk in _chunks(itertools.combinations(range(g.shape[0]), rank), _ORACLE_CHUNK):
        idx = np.array(chunk, dtype=int).reshape(len(chunk), rank)
        mats = np.concatenate([np.broadcast_to(lineality, (len(chunk), n - rank, n)), g[idx]], axis=1)
        rhs = np.concatenate([np.zeros((len(chunk), n - rank)), h[idx]], axis=1)
        ok = np.abs(np.linalg.det(mats)) > _DET_TOL
        if not np.any(ok):
            continue
        xs = np.linalg.solve(mats[ok], rhs[ok][:, :, None])[:, :, 0]
        feasible = np.all(xs @ g.T - h <= tol * (1.0 + np.abs(h)), axis=1)
        if not np.any(feasible):
            continue
        values = xs[feasible] @ c
        top = int(np.argmax(values))
        if values[top] > best_value + tol:
            best_value, best_x = float(values[top]), xs[feasible][top]

    if best_x is None:
        return LPSolution(status=LPStatus.INFEASIBLE)
    if moves_along_line:
        return LPSolution(status=LPStatus.UNBOUNDED)

    if rank >= 1:
        for chunk in _chunks(itertools.combinations(range(g.shape[0]), rank - 1), _ORACLE_CHUNK):
            idx = np.array(chunk, dtype=int).reshape(len(chunk), rank - 1)
            mats = np.concatenate([np.broadcast_to(lineality, (len(chunk), n - rank, n)), g[idx]], axis=1)
            # Generalized cross product: the null direction of an (n-1) x n system.
            dirs = np.stack(
                [(-1.0) ** j * np.linalg.det(np.delete(mats, j, axis=2)) for j in range(n)],
                axis=1,
            )
            lengths = np.linalg.norm(dirs, axis=1)
            dirs = dirs[lengths > _DET_TOL] / lengths[lengths > _DET_TOL, None]
            for sign in (1.0, -1.0):
                rays = sign * dirs
                is_ray = np.all(rays @ g.T <= tol, axis=1)
                if np.any(rays[is_ray] @ c > tol):
                    return LPSolution(status=LPStatus.UNBOUNDED)

    return LPSolution(status=LPStatus.OPTIMAL, x=best_x, value=float(c @ best_x))
