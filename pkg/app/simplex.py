"""Dense two-phase tableau simplex with Bland's anti-cycling rule"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from app.errors import BudgetExceededError, InfeasibleError, UnboundedError


PIVOT_EPS = 1e-12
FEASIBILITY_TOL = 1e-9
MAX_PIVOTS = 100_000

Bound = Tuple[Optional[float], Optional[float]]


@dataclass(frozen=True)
class LPResult:
    value: float
    x: np.ndarray
    pivots: int


class _Tableau:
    """Canonical-form tableau [B^-1 A | B^-1 b] with an explicit basis"""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: List[int]):
        self.T = np.hstack([A, b.reshape(-1, 1)]).astype(float)
        self.basis = list(basis)
        self.pivots = 0

    @property
    def rhs(self) -> np.ndarray:
        return self.T[:, -1]

    def pivot(self, row: int, col: int):
        self.T[row] /= self.T[row, col]
        for k in range(self.T.shape[0]):
            if k != row and self.T[k, col] != 0.0:
                self.T[k] -= self.T[k, col] * self.T[row]
        self.basis[row] = col
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise BudgetExceededError(f"simplex exceeded {MAX_PIVOTS} pivots")

    def run(self, cost: np.ndarray, allowed: int):
        """Maximize cost over columns [0, allowed) using Bland's rule"""
        while True:
            reduced = cost[:allowed] - cost[self.basis] @ self.T[:, :allowed]
            entering = next((j for j in range(allowed) if reduced[j] > PIVOT_EPS), None)
            if entering is None:
                return
            column = self.T[:, entering]
            best: Optional[Tuple[float, int, int]] = None
            for i in range(self.T.shape[0]):
                if column[i] > PIVOT_EPS:
                    candidate = (self.rhs[i] / column[i], self.basis[i], i)
                    if best is None or candidate[:2] < best[:2]:
                        best = candidate
            if best is None:
                raise UnboundedError("objective is unbounded over the feasible region")
            self.pivot(best[2], entering)


def _standardize(
    n: int,
    bounds: Optional[Sequence[Bound]],
) -> Tuple[np.ndarray, np.ndarray, List[Tuple[int, float]]]:
    """
    Map x to nonnegative y: x = offset + M y.
    Returns (offset, M, extra upper rows as (y column, cap)).
    """
    bounds = list(bounds) if bounds is not None else [(0.0, None)] * n
    columns: List[np.ndarray] = []
    offset = np.zeros(n)
    caps: List[Tuple[int, float]] = []
    for k, (lo, hi) in enumerate(bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            raise InfeasibleError(f"variable {k} has empty bounds [{lo}, {hi}]")
        unit = np.zeros(n)
        unit[k] = 1.0
        if np.isfinite(lo):
            offset[k] = lo
            columns.append(unit)
            if np.isfinite(hi):
                caps.append((len(columns) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[k] = hi
            columns.append(-unit)
        else:
            columns.append(unit)
            columns.append(-unit)
    return offset, np.column_stack(columns), caps


def simplex_lp_max(
    c: Sequence[float],
    A_eq: Optional[np.ndarray] = None,
    b_eq: Optional[Sequence[float]] = None,
    bounds: Optional[Sequence[Bound]] = None,
    A_ub: Optional[np.ndarray] = None,
    b_ub: Optional[Sequence[float]] = None,
) -> LPResult:
    """
    Maximize c.x subject to A_eq x = b_eq, A_ub x <= b_ub and per-variable
    bounds (None means unbounded on that side; default x >= 0).

    Raises InfeasibleError / UnboundedError.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)

    offset, M, caps = _standardize(n, bounds)
    n_y = M.shape[1]

    ub_rows = [A_ub @ M] if A_ub.size else []
    ub_rhs = [b_ub - A_ub @ offset] if A_ub.size else []
    if caps:
        cap_rows = np.zeros((len(caps), n_y))
        for r, (col, cap) in enumerate(caps):
            cap_rows[r, col] = 1.0
        ub_rows.append(cap_rows)
        ub_rhs.append(np.array([cap for _, cap in caps]))
    G = np.vstack(ub_rows) if ub_rows else np.zeros((0, n_y))
    h = np.concatenate(ub_rhs) if ub_rhs else np.zeros(0)
    E = A_eq @ M
    e = b_eq - A_eq @ offset

    m_ub, m_eq = G.shape[0], E.shape[0]
    m = m_ub + m_eq
    # Columns: y | slacks | artificials
    A = np.zeros((m, n_y + m_ub))
    A[:m_ub, :n_y] = G
    A[:m_ub, n_y:] = np.eye(m_ub)
    A[m_ub:, :n_y] = E
    b = np.concatenate([h, e])
    negative = b < 0
    A[negative] *= -1.0
    b[negative] *= -1.0

    n_struct = A.shape[1]
    A_full = np.hstack([A, np.eye(m)])
    tableau = _Tableau(A_full, b, basis=list(range(n_struct, n_struct + m)))

    # Phase 1
    phase1_cost = np.concatenate([np.zeros(n_struct), -np.ones(m)])
    tableau.run(phase1_cost, allowed=n_struct + m)
    infeasibility = float(tableau.rhs[[i for i, v in enumerate(tableau.basis) if v >= n_struct]].sum())
    if infeasibility > FEASIBILITY_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
        raise InfeasibleError(f"no feasible point (phase-one residual {infeasibility:.3e})")

    # Drive artificials out of the basis; drop rows that are redundant
    keep_rows = []
    for i in range(m):
        if tableau.basis[i] < n_struct:
            keep_rows.append(i)
            continue
        row = tableau.T[i, :n_struct]
        j = next((k for k in range(n_struct) if abs(row[k]) > 1e-9), None)
        if j is None:
            continue
        tableau.pivot(i, j)
        keep_rows.append(i)
    tableau.T = np.hstack([tableau.T[keep_rows, :n_struct], tableau.T[keep_rows, -1:]])
    tableau.basis = [tableau.basis[i] for i in keep_rows]

    # Phase 2
    cost = np.concatenate([M.T @ c, np.zeros(m_ub)])
    tableau.run(cost, allowed=n_struct)

    z = np.zeros(n_struct)
    z[tableau.basis] = tableau.rhs
    x = offset + M @ z[:n_y]
    logger.debug(f"simplex: {tableau.pivots} pivots, {m} rows, {n_struct} columns")
    return LPResult(value=float(c @ x), x=x, pivots=tableau.pivots)
