"""
Brute-force reference solvers for checking the fast ones on small instances.
Exponential in the number of states or policies; refuses work past fixed budgets.
"""
import itertools
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from loguru import logger

from app.caimdp import Caimdp
from app.errors import BudgetExceededError, CapabilityError, InvalidArgumentError
from app.inner_opt import IntervalSimplex


MAX_INNER_STATES = 10
MAX_GRID_DIM = 3
MAX_POLICIES = 1_000_000
FEASIBILITY_TOL = 1e-12
CHUNK_ENTRIES = 1 << 21


@dataclass
class OracleBackup:
    values: np.ndarray
    actions: np.ndarray
    mesh: float = 0.0
    lipschitz_slack: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.lipschitz_slack is None:
            self.lipschitz_slack = np.zeros_like(self.values)


def _patterns(n_free: int) -> np.ndarray:
    return np.array(list(itertools.product([False, True], repeat=n_free)), dtype=bool).reshape(-1, n_free)


def _inner_min_rows(lo: np.ndarray, hi: np.ndarray, V: np.ndarray) -> np.ndarray:
    """
    Minimum of p.V over each row's interval simplex by enumerating its
    vertices: every coordinate but one sits at a bound, the last one closes
    the sum.
    """
    m, n = lo.shape
    if n > MAX_INNER_STATES:
        raise BudgetExceededError(f"inner oracle enumerates at most {MAX_INNER_STATES} states, got {n}")
    if n == 1:
        return np.full(m, V[0])
    patterns = _patterns(n - 1)
    chunk = max(1, CHUNK_ENTRIES // (patterns.size or 1))
    best = np.full(m, np.inf)
    for start in range(0, m, chunk):
        rows = slice(start, start + chunk)
        for k in range(n):
            others = np.delete(np.arange(n), k)
            fixed = np.where(patterns[None, :, :], hi[rows][:, None, others], lo[rows][:, None, others])
            p_k = 1.0 - fixed.sum(axis=2)
            feasible = (p_k >= lo[rows, k][:, None] - FEASIBILITY_TOL) & (p_k <= hi[rows, k][:, None] + FEASIBILITY_TOL)
            objective = fixed @ V[others] + p_k * V[k]
            best[rows] = np.minimum(best[rows], np.where(feasible, objective, np.inf).min(axis=1))
    return best


def oracle_inner_min(gamma: IntervalSimplex, V: Sequence[float]) -> float:
    """Exact min of p.V over the interval simplex, n <= 10"""
    V = np.asarray(V, dtype=float)
    return float(_inner_min_rows(gamma.lo[None, :], gamma.hi[None, :], V)[0])


def _grid(imdp: Caimdp, density: int) -> np.ndarray:
    lo, hi = imdp.action_set.bounding_box()
    axes = [np.linspace(l, h, density) if h > l else np.array([l]) for l, h in zip(lo, hi)]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    inside = imdp.action_set.contains_batch(points)
    points = points[inside]
    if imdp.action_set.is_polytope:
        points = np.vstack([points, imdp.action_set.vertices()])
    return points


def _lipschitz(imdp: Caimdp, q: int, V: np.ndarray, points: np.ndarray) -> float:
    """Sampled Lipschitz constant of a -> max_j f_j(a) for state q"""
    n = imdp.n_states
    slopes = np.zeros(n)
    for q2 in range(n):
        lower = np.linalg.norm(imdp.lower[q][q2].gradient_batch(points), axis=1).max(initial=0.0)
        upper = np.linalg.norm(imdp.upper[q][q2].gradient_batch(points), axis=1).max(initial=0.0)
        slopes[q2] = max(lower, upper)
    return float(max(np.abs(V - V[j]) @ slopes for j in range(n)))


def oracle_backup(
    imdp: Caimdp,
    V: Sequence[float],
    gamma: float,
    mode: Literal["vertices", "grid"] = "vertices",
    density: int = 21,
) -> OracleBackup:
    """
    R + gamma * max over candidate actions of the exact inner minimum.
    Vertex mode is exact for linear and convex/concave models. Grid mode is a
    lower bound on the true backup; `lipschitz_slack` bounds how far below.
    """
    V = np.asarray(V, dtype=float)
    action_set = imdp.action_set
    if mode == "vertices":
        points = action_set.vertices()
        mesh = 0.0
    elif mode == "grid":
        if action_set.dim > MAX_GRID_DIM:
            raise CapabilityError(f"grid oracle supports at most {MAX_GRID_DIM} action dimensions")
        if density < 2:
            raise InvalidArgumentError("grid density must be at least 2")
        points = _grid(imdp, density)
        lo, hi = action_set.bounding_box()
        mesh = float(np.linalg.norm((hi - lo) / (density - 1)))
    else:
        raise InvalidArgumentError(f"unknown oracle mode {mode!r}")

    lo, hi = imdp.evaluate_batch(points)
    values = np.empty(imdp.n_states)
    actions = np.empty((imdp.n_states, action_set.dim))
    slack = np.zeros(imdp.n_states)
    for q in range(imdp.n_states):
        inner = _inner_min_rows(lo[:, q, :], hi[:, q, :], V)
        best = int(np.argmax(inner))
        values[q] = imdp.reward[q] + gamma * inner[best]
        actions[q] = points[best]
        if mode == "grid":
            slack[q] = gamma * _lipschitz(imdp, q, V, points) * mesh
    logger.debug(f"Oracle backup over {len(points)} actions ({mode})")
    return OracleBackup(values, actions, mesh, slack)


def oracle_synthesize(
    imdp: Caimdp,
    actions: Sequence[Sequence[float]],
    horizon: int,
    gamma: float,
    budget: Optional[int] = None,
) -> np.ndarray:
    """Best V_0 over every Markov policy on a finite action list, per state"""
    budget = MAX_POLICIES if budget is None else budget
    actions = imdp.action_array(actions)
    if actions.shape[0] == 0:
        raise InvalidArgumentError("oracle synthesis needs at least one action")
    n = imdp.n_states
    choices = n * horizon
    if float(len(actions)) ** choices > budget:
        raise BudgetExceededError(
            f"{len(actions)}^{choices} Markov policies exceed the enumeration budget of {budget}"
        )
    if horizon == 0:
        return imdp.reward.copy()

    lo, hi = imdp.evaluate_batch(actions)
    best = np.full(n, -np.inf)
    for assignment in itertools.product(range(len(actions)), repeat=choices):
        plan = np.asarray(assignment).reshape(horizon, n)
        V = imdp.reward.copy()
        for t in range(horizon - 1, -1, -1):
            picked = plan[t]
            inner = np.array([_inner_min_rows(lo[picked[q], q][None, :], hi[picked[q], q][None, :], V)[0]
                              for q in range(n)])
            V = imdp.reward + gamma * inner
        best = np.maximum(best, V)
    return best
