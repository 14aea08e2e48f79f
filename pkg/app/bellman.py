"""
Robust value iteration over caIMDPs.

Each max-min backup is split into |Q| pure maximizations over the action
set, one per position j of the descending-sorted value vector:

    f_j(a) = sum_{i<j} (V_i - V_j) lower_i(a) + sum_{i>j} (V_i - V_j) upper_i(a) + V_j

and max_a min_p p.V = max_j max_a f_j(a). The optimistic (max-max) backup
mirrors this with h_j (upper on high-value states, lower on low ones) and
max_a min_j h_j(a).
"""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Literal, Optional, Sequence, Union

import numpy as np
from loguru import logger
from tqdm import tqdm

from app.action_sets import ActionSet
from app.bounds import Shape, linear_combination
from app.caimdp import Caimdp, ShapeClass, classify, offending_entries
from app.config.settings import Settings, get_settings
from app.errors import InvalidArgumentError, MembershipError, UnsupportedClassError
from app.inner_opt import best_case_value, best_case_values, worst_case_value, worst_case_values
from app.models import BoundReport, SolverStats, SynthesisReport
from app.optimizers import (
    OptimizeResult,
    OptimizerConfig,
    SmoothObjective,
    max_over_vertices,
    maximize_concave,
    project_simplex,
    simplex_lp_max,
)
from app.utils import accumulated_slack, stable_order


PESSIMISTIC_SHAPE = {
    ShapeClass.LINEAR: Shape.LINEAR,
    ShapeClass.CONCAVE_CONVEX: Shape.CONCAVE,
    ShapeClass.CONVEX_CONCAVE: Shape.CONVEX,
    ShapeClass.GENERAL: Shape.UNKNOWN,
}
OPTIMISTIC_SHAPE = {
    ShapeClass.LINEAR: Shape.LINEAR,
    ShapeClass.CONCAVE_CONVEX: Shape.CONVEX,
    ShapeClass.CONVEX_CONCAVE: Shape.CONCAVE,
    ShapeClass.GENERAL: Shape.UNKNOWN,
}


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """V_k over the states"""

    values: np.ndarray
    k: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("value function must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class MarkovPolicy:
    """actions[t][q] is the action taken in state q at time t"""

    actions: np.ndarray

    def __post_init__(self):
        try:
            actions = np.asarray(self.actions, dtype=float)
        except (TypeError, ValueError) as e:
            raise InvalidArgumentError(f"policy actions must be a rectangular [t][q][dim] array ({e})") from e
        if actions.size == 0:
            actions = actions.reshape(0, 0, 0) if actions.ndim != 3 else actions
        if actions.ndim != 3:
            raise InvalidArgumentError("policy actions must be indexed [t][q][dim]")
        object.__setattr__(self, "actions", actions)

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    @classmethod
    def constant(cls, action: Sequence[float], n_states: int, horizon: int) -> "MarkovPolicy":
        action = np.asarray(action, dtype=float)
        return cls(np.broadcast_to(action, (horizon, n_states, action.size)).copy())

    @classmethod
    def from_report(cls, report: SynthesisReport) -> "MarkovPolicy":
        return cls(np.asarray(report.policy, dtype=float))

    def check(self, imdp: Caimdp):
        if self.horizon and self.actions.shape[1] != imdp.n_states:
            raise InvalidArgumentError(f"policy covers {self.actions.shape[1]} states, model has {imdp.n_states}")
        if self.horizon and self.actions.shape[2] != imdp.action_dim:
            raise InvalidArgumentError(
                f"policy actions have dimension {self.actions.shape[2]}, action set has {imdp.action_dim}"
            )
        for t in range(self.horizon):
            for q in range(self.actions.shape[1]):
                if not imdp.action_set.contains(self.actions[t, q]):
                    raise MembershipError(
                        f"policy action at t={t}, q={q} lies outside the action set", index=t * imdp.n_states + q
                    )


@dataclass
class BackupResult:
    """
    One backup over all states.

    Pessimistic: `per_index[q, j]` is the solver optimum of the j-th
    subproblem and `winners[q]` is the j whose maximizer scored best after
    exact re-scoring, which need not be the argmax of `per_index[q]`.
    `values[q]` is R(q) + gamma * (worst case at `actions[q]`), so
    values >= reward + gamma * subproblem_max, with equality for the
    vertex-solved classes.

    Optimistic: `per_index[q, j]` is h_j at `actions[q]`, `winners[q]` its
    argmin and `values[q]` is R(q) + gamma * min_j per_index[q, j].
    """

    values: np.ndarray
    actions: np.ndarray
    winners: np.ndarray
    per_index: np.ndarray
    stats: SolverStats = field(default_factory=SolverStats)
    certified: bool = True
    upper: Optional[np.ndarray] = None

    @property
    def subproblem_max(self) -> np.ndarray:
        """max_j per_index[q, j] per state"""
        return self.per_index.max(axis=1)


def _as_array(V: Union[ValueFunction, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(V, ValueFunction):
        return V.values
    return ValueFunction(V).values


def _check_gamma(gamma: float):
    if not gamma >= 0:
        raise InvalidArgumentError(f"gamma must be nonnegative, got {gamma}")


def _map_states(fn: Callable[[int], object], n: int, max_workers: int) -> List[object]:
    """Per-state work, in state order regardless of schedule"""
    if max_workers <= 1:
        return [fn(q) for q in range(n)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, range(n)))


def _require_tractable(imdp: Caimdp, shape_class: ShapeClass):
    if shape_class == ShapeClass.GENERAL:
        entries = offending_entries(imdp)
        listed = ", ".join(f"{name}[{q}][{q2}]" for name, q, q2 in entries[:10])
        raise UnsupportedClassError(f"model fits no tractable shape class; offending bounds: {listed}", entries)


# ---------------------------------------------------------------------------
# Subproblem objectives
# ---------------------------------------------------------------------------

def mp_objective(
    q: int,
    j: int,
    sorted_values: np.ndarray,
    perm: np.ndarray,
    imdp: Caimdp,
    shape_class: Optional[ShapeClass] = None,
) -> SmoothObjective:
    """
    f_j for state q; j indexes the descending-sorted values (0-based) and
    perm[i] is the state holding sorted_values[i].
    """
    n = imdp.n_states
    if not 0 <= j < n:
        raise IndexError(f"subproblem index {j} out of range for {n} states")
    shape_class = shape_class or classify(imdp)
    terms = [(sorted_values[i] - sorted_values[j], imdp.lower[q][perm[i]]) for i in range(j)]
    terms += [(sorted_values[i] - sorted_values[j], imdp.upper[q][perm[i]]) for i in range(j + 1, n)]
    shape = PESSIMISTIC_SHAPE[shape_class]
    bound = linear_combination(terms, float(sorted_values[j]), shape, imdp.action_dim)
    return SmoothObjective.from_bound(bound)


def optimistic_objective(
    q: int,
    j: int,
    sorted_values: np.ndarray,
    perm: np.ndarray,
    imdp: Caimdp,
    shape_class: Optional[ShapeClass] = None,
) -> SmoothObjective:
    """h_j for state q: the best-case value is min_j h_j(a)"""
    n = imdp.n_states
    if not 0 <= j < n:
        raise IndexError(f"subproblem index {j} out of range for {n} states")
    shape_class = shape_class or classify(imdp)
    terms = [(sorted_values[i] - sorted_values[j], imdp.upper[q][perm[i]]) for i in range(j)]
    terms += [(sorted_values[i] - sorted_values[j], imdp.lower[q][perm[i]]) for i in range(j + 1, n)]
    shape = OPTIMISTIC_SHAPE[shape_class]
    bound = linear_combination(terms, float(sorted_values[j]), shape, imdp.action_dim)
    return SmoothObjective.from_bound(bound)


# ---------------------------------------------------------------------------
# Pessimistic backup
# ---------------------------------------------------------------------------

def _robust_value(imdp: Caimdp, q: int, a: np.ndarray, V: np.ndarray) -> float:
    lo, hi = imdp.evaluate_row(q, a)
    return worst_case_value(lo, hi, V)


def _optimistic_value(imdp: Caimdp, q: int, a: np.ndarray, V: np.ndarray) -> float:
    lo, hi = imdp.evaluate_row(q, a)
    return best_case_value(lo, hi, V)


def _solve_state_pessimistic(
    imdp: Caimdp,
    q: int,
    V: np.ndarray,
    perm: np.ndarray,
    shape_class: ShapeClass,
    cfg: OptimizerConfig,
    vertices: Optional[np.ndarray],
):
    n = imdp.n_states
    sorted_values = V[perm]
    per_index = np.empty(n)
    results: List[OptimizeResult] = []
    stats = SolverStats()
    for j in range(n):
        # Tied values give identical objectives
        if j > 0 and sorted_values[j] == sorted_values[j - 1]:
            per_index[j] = per_index[j - 1]
            results.append(results[-1])
            continue
        f = mp_objective(q, j, sorted_values, perm, imdp, shape_class)
        if shape_class in (ShapeClass.LINEAR, ShapeClass.CONVEX_CONCAVE):
            result = max_over_vertices(f, vertices)
        else:
            result = maximize_concave(f, imdp.action_set, cfg, vertices)
        stats = stats.merge(SolverStats(
            optimizer_calls=1,
            nonconverged=0 if result.converged else 1,
            max_certificate=result.certificate,
        ))
        per_index[j] = result.value
        results.append(result)

    candidates = [_robust_value(imdp, q, r.x, V) for r in results]
    winner = int(np.argmax(candidates))
    return candidates[winner], results[winner].x, winner, per_index, stats


def pessimistic_backup(
    imdp: Caimdp,
    V: Union[ValueFunction, Sequence[float], np.ndarray],
    gamma: float,
    cfg: Optional[OptimizerConfig] = None,
    shape_class: Optional[ShapeClass] = None,
    max_workers: int = 1,
) -> BackupResult:
    """V_{k-1}(q) = R(q) + gamma * max_a min_{p in Gamma_{q,a}} p.V_k for every q"""
    cfg = cfg or OptimizerConfig()
    _check_gamma(gamma)
    V = _as_array(V)
    shape_class = shape_class or classify(imdp)
    _require_tractable(imdp, shape_class)

    perm = stable_order(V, descending=True)
    vertices = imdp.action_set.vertices() if imdp.action_set.is_polytope else None
    solved = _map_states(
        lambda q: _solve_state_pessimistic(imdp, q, V, perm, shape_class, cfg, vertices),
        imdp.n_states,
        max_workers,
    )
    stats = SolverStats()
    for item in solved:
        stats = stats.merge(item[4])
    robust = np.array([item[0] for item in solved])
    result = BackupResult(
        values=imdp.reward + gamma * robust,
        actions=np.array([item[1] for item in solved]),
        winners=np.array([item[2] for item in solved]),
        per_index=np.array([item[3] for item in solved]),
        stats=stats,
        certified=stats.nonconverged == 0,
    )
    logger.debug(f"Pessimistic backup: {stats.optimizer_calls} subproblems, {stats.nonconverged} not converged")
    return result


# ---------------------------------------------------------------------------
# Optimistic backup
# ---------------------------------------------------------------------------

def _optimistic_linear(objectives: List[SmoothObjective], vertices: np.ndarray):
    """Epigraph LP: max t s.t. t <= h_j(sum_v lam_v v), lam in the simplex"""
    k = vertices.shape[0]
    at_vertices = np.array([[h.value(v) for v in vertices] for h in objectives])
    c = np.concatenate([[1.0], np.zeros(k)])
    A_ub = np.hstack([np.ones((len(objectives), 1)), -at_vertices])
    b_ub = np.zeros(len(objectives))
    A_eq = np.concatenate([[0.0], np.ones(k)]).reshape(1, -1)
    bounds = [(None, None)] + [(0.0, None)] * k
    lp = simplex_lp_max(c, A_eq=A_eq, b_eq=[1.0], bounds=bounds, A_ub=A_ub, b_ub=b_ub)
    weights = np.clip(lp.x[1:], 0.0, None)
    weights /= weights.sum()
    return weights @ vertices, lp.value, True, lp.pivots


def _min_objective(objectives: List[SmoothObjective], a: np.ndarray):
    values = np.array([h.value(a) for h in objectives])
    j = int(np.argmin(values))
    return float(values[j]), j


def _optimistic_concave(objectives: List[SmoothObjective], vertices: np.ndarray, cfg: OptimizerConfig):
    """
    max_a min_j h_j(a) for concave h_j over conv(vertices): projected
    supergradient ascent on the vertex weights, then cutting planes until the
    LP upper bound is within tolerance of the best point found.
    """
    k = vertices.shape[0]
    cuts: List[tuple] = []

    def add_cuts(point: np.ndarray):
        # t - sum_v lam_v grad_j.v <= h_j(point) - grad_j.point, for every j
        for h in objectives:
            grad = h.gradient(point)
            cuts.append((np.concatenate([[1.0], -(vertices @ grad)]), h.value(point) - grad @ point))

    best_value, best_a = -np.inf, vertices[0]
    for v in vertices:
        add_cuts(v)
        value, _ = _min_objective(objectives, v)
        if value > best_value:
            best_value, best_a = value, v

    weights = np.full(k, 1.0 / k)
    a = weights @ vertices
    for it in range(1, min(cfg.max_iterations, 200) + 1):
        value, j = _min_objective(objectives, a)
        if value > best_value:
            best_value, best_a = value, a
        supergradient = vertices @ objectives[j].gradient(a)
        norm = np.linalg.norm(supergradient)
        if norm == 0.0:
            break
        weights = project_simplex(weights + supergradient / (norm * np.sqrt(it)))
        a = weights @ vertices
    add_cuts(best_a)

    upper = np.inf
    pivots = 0
    c = np.concatenate([[1.0], np.zeros(k)])
    A_eq = np.concatenate([[0.0], np.ones(k)]).reshape(1, -1)
    bounds = [(None, None)] + [(0.0, None)] * k
    for _ in range(min(cfg.max_iterations, 500)):
        lp = simplex_lp_max(c, A_eq=A_eq, b_eq=[1.0], bounds=bounds,
                            A_ub=np.array([row for row, _ in cuts]), b_ub=np.array([rhs for _, rhs in cuts]))
        pivots += lp.pivots
        upper = min(upper, lp.value)
        lam = np.clip(lp.x[1:], 0.0, None)
        candidate = (lam / lam.sum()) @ vertices
        value, _ = _min_objective(objectives, candidate)
        if value > best_value:
            best_value, best_a = value, candidate
        if upper - best_value <= cfg.tolerance:
            break
        add_cuts(candidate)
    return best_a, upper, upper - best_value <= cfg.tolerance, pivots


def _optimistic_heuristic(
    imdp: Caimdp,
    q: int,
    V: np.ndarray,
    objectives: List[SmoothObjective],
    cfg: OptimizerConfig,
):
    """
    Non-certified estimate for the concave/convex case, whose max-max problem
    is nonconvex: dense quasi-random screening, then local ascent along the
    active h_j from the best few points.
    """
    action_set: ActionSet = imdp.action_set
    points = [action_set.interior_point()[None, :], action_set.quasi_random_points(512, seed=cfg.seed)]
    if action_set.is_polytope:
        points.append(action_set.vertices())
    grid = np.vstack(points)
    lo, hi = imdp.evaluate_batch(grid)
    screened = best_case_values(lo[:, q, :], hi[:, q, :], V)
    order = np.argsort(-screened, kind="stable")[: cfg.multistart]

    best_a = grid[order[0]]
    best_value = _optimistic_value(imdp, q, best_a, V)
    if action_set.supports_projection:
        for start in order:
            a = grid[start]
            value = _optimistic_value(imdp, q, a, V)
            step = 0.1 * action_set.bounding_diameter()
            for _ in range(200):
                _, j = _min_objective(objectives, a)
                g = objectives[j].gradient(a)
                norm = np.linalg.norm(g)
                if norm == 0.0 or step < cfg.tolerance * 1e-3:
                    break
                trial = action_set.project(a + step * g / norm)
                trial_value = _optimistic_value(imdp, q, trial, V)
                if trial_value > value:
                    a, value = trial, trial_value
                else:
                    step *= cfg.backtracking_factor
            if value > best_value:
                best_a, best_value = a, value
    return best_a, np.nan, False, 0


def _solve_state_optimistic(
    imdp: Caimdp,
    q: int,
    V: np.ndarray,
    perm: np.ndarray,
    shape_class: ShapeClass,
    cfg: OptimizerConfig,
    vertices: Optional[np.ndarray],
):
    sorted_values = V[perm]
    objectives = [optimistic_objective(q, j, sorted_values, perm, imdp, shape_class) for j in range(imdp.n_states)]
    if shape_class == ShapeClass.LINEAR:
        a, upper, certified, pivots = _optimistic_linear(objectives, vertices)
    elif shape_class == ShapeClass.CONVEX_CONCAVE:
        a, upper, certified, pivots = _optimistic_concave(objectives, vertices, cfg)
    else:
        a, upper, certified, pivots = _optimistic_heuristic(imdp, q, V, objectives, cfg)
    per_index = np.array([h.value(a) for h in objectives])
    value = _optimistic_value(imdp, q, a, V)
    stats = SolverStats(
        optimizer_calls=1,
        nonconverged=0 if certified else 1,
        max_certificate=float(upper - value) if np.isfinite(upper) else 0.0,
        lp_pivots=pivots,
    )
    return value, a, int(np.argmin(per_index)), per_index, stats, certified, upper


def optimistic_backup(
    imdp: Caimdp,
    V: Union[ValueFunction, Sequence[float], np.ndarray],
    gamma: float,
    cfg: Optional[OptimizerConfig] = None,
    shape_class: Optional[ShapeClass] = None,
    max_workers: int = 1,
) -> BackupResult:
    """V_{k-1}(q) = R(q) + gamma * max_a max_{p in Gamma_{q,a}} p.V_k for every q"""
    cfg = cfg or OptimizerConfig()
    _check_gamma(gamma)
    V = _as_array(V)
    shape_class = shape_class or classify(imdp)
    _require_tractable(imdp, shape_class)
    if shape_class == ShapeClass.CONCAVE_CONVEX:
        logger.warning("⚠ Optimistic backup of a concave/convex model is a non-certified estimate")

    perm = stable_order(V, descending=True)
    vertices = imdp.action_set.vertices() if imdp.action_set.is_polytope else None
    solved = _map_states(
        lambda q: _solve_state_optimistic(imdp, q, V, perm, shape_class, cfg, vertices),
        imdp.n_states,
        max_workers,
    )
    stats = SolverStats()
    for item in solved:
        stats = stats.merge(item[4])
    robust = np.array([item[0] for item in solved])
    upper = np.array([item[6] for item in solved])
    return BackupResult(
        values=imdp.reward + gamma * robust,
        actions=np.array([item[1] for item in solved]),
        winners=np.array([item[2] for item in solved]),
        per_index=np.array([item[3] for item in solved]),
        stats=stats,
        certified=all(item[5] for item in solved),
        upper=imdp.reward + gamma * upper,
    )


# ---------------------------------------------------------------------------
# Value iteration
# ---------------------------------------------------------------------------

def _iterate(
    imdp: Caimdp,
    horizon: int,
    gamma: float,
    cfg: OptimizerConfig,
    backup: Callable[..., BackupResult],
    mode: Literal["pessimistic", "optimistic"],
    settings: Settings,
) -> SynthesisReport:
    if horizon < 0:
        raise InvalidArgumentError(f"horizon must be nonnegative, got {horizon}")
    _check_gamma(gamma)
    shape_class = classify(imdp)

    values: List[np.ndarray] = [np.empty(0)] * (horizon + 1)
    values[horizon] = imdp.reward.copy()
    policy = np.zeros((horizon, imdp.n_states, imdp.action_dim))
    seconds: List[float] = []
    stats = SolverStats()
    certified = True

    logger.info(f"🔁 {mode.capitalize()} value iteration: {imdp.n_states} states, N={horizon}, "
                f"gamma={gamma}, class={shape_class.value}")
    steps = tqdm(range(horizon - 1, -1, -1), desc=f"🔁 {mode} VI", unit="step", ncols=100,
                 disable=not settings.show_progress)
    for t in steps:
        start = time.perf_counter()
        result = backup(imdp, values[t + 1], gamma, cfg, shape_class, settings.max_workers)
        seconds.append(time.perf_counter() - start)
        values[t] = result.values
        policy[t] = result.actions
        stats = stats.merge(result.stats)
        certified = certified and result.certified

    exact = shape_class == ShapeClass.LINEAR or (
        mode == "pessimistic" and shape_class == ShapeClass.CONVEX_CONCAVE
    )
    report = SynthesisReport(
        mode=mode,
        shape_class=shape_class.value,
        horizon=horizon,
        gamma=gamma,
        tolerance=cfg.tolerance,
        values=[v.tolist() for v in values],
        policy=policy.tolist(),
        slack=0.0 if exact else accumulated_slack(cfg.tolerance, gamma, horizon),
        certified=certified,
        stats=stats,
        iteration_seconds=seconds[::-1],
    )
    logger.success(f"✓ {mode.capitalize()} synthesis done in {sum(seconds):.2f}s "
                   f"({stats.optimizer_calls} subproblems, certified={certified})")
    return report


def synthesize(
    imdp: Caimdp,
    horizon: int,
    gamma: float,
    cfg: Optional[OptimizerConfig] = None,
    settings: Optional[Settings] = None,
) -> SynthesisReport:
    """
    Pessimistic value iteration from V_N = R down to V_0. policy[t][q] is the
    maximizing action of the backup that produced V_t.
    """
    settings = settings or get_settings()
    cfg = cfg or OptimizerConfig.from_settings(settings)
    return _iterate(imdp, horizon, gamma, cfg, pessimistic_backup, "pessimistic", settings)


def optimistic_synthesize(
    imdp: Caimdp,
    horizon: int,
    gamma: float,
    cfg: Optional[OptimizerConfig] = None,
    settings: Optional[Settings] = None,
) -> SynthesisReport:
    """Max-max value iteration (best-case adversary)"""
    settings = settings or get_settings()
    cfg = cfg or OptimizerConfig.from_settings(settings)
    return _iterate(imdp, horizon, gamma, cfg, optimistic_backup, "optimistic", settings)


def evaluate_policy(
    imdp: Caimdp,
    policy: MarkovPolicy,
    gamma: float,
    mode: Literal["worst", "best"] = "worst",
) -> np.ndarray:
    """V_0 of a fixed Markov policy against a per-step worst- or best-case adversary"""
    _check_gamma(gamma)
    policy.check(imdp)
    inner = worst_case_value if mode == "worst" else best_case_value
    V = imdp.reward.copy()
    for t in range(policy.horizon - 1, -1, -1):
        step = np.empty(imdp.n_states)
        for q in range(imdp.n_states):
            lo, hi = imdp.evaluate_row(q, policy.actions[t, q])
            step[q] = inner(lo, hi, V)
        V = imdp.reward + gamma * step
    return V


def discrete_vi(
    imdp: Caimdp,
    actions: Sequence[Sequence[float]],
    horizon: int,
    gamma: float,
    settings: Optional[Settings] = None,
) -> SynthesisReport:
    """Value iteration restricted to a finite action list (first index wins ties)"""
    settings = settings or get_settings()
    if horizon < 0:
        raise InvalidArgumentError(f"horizon must be nonnegative, got {horizon}")
    _check_gamma(gamma)
    actions = imdp.action_array(actions)
    if actions.shape[0] == 0:
        raise InvalidArgumentError("discrete value iteration needs at least one action")

    lo, hi = imdp.evaluate_batch(actions)
    values: List[np.ndarray] = [np.empty(0)] * (horizon + 1)
    values[horizon] = imdp.reward.copy()
    policy = np.zeros((horizon, imdp.n_states, imdp.action_dim))
    seconds: List[float] = []
    for t in range(horizon - 1, -1, -1):
        start = time.perf_counter()
        V = values[t + 1]
        step = np.empty(imdp.n_states)
        for q in range(imdp.n_states):
            per_action = worst_case_values(lo[:, q, :], hi[:, q, :], V)
            best = int(np.argmax(per_action))
            step[q] = per_action[best]
            policy[t, q] = actions[best]
        values[t] = imdp.reward + gamma * step
        seconds.append(time.perf_counter() - start)

    return SynthesisReport(
        mode="discrete",
        shape_class=classify(imdp).value,
        horizon=horizon,
        gamma=gamma,
        tolerance=0.0,
        values=[v.tolist() for v in values],
        policy=policy.tolist(),
        slack=0.0,
        certified=True,
        stats=SolverStats(optimizer_calls=horizon * imdp.n_states),
        iteration_seconds=seconds[::-1],
    )


def suboptimality_bound(
    model_lower: Caimdp,
    model_upper: Caimdp,
    horizon: int,
    gamma: float,
    cfg: Optional[OptimizerConfig] = None,
    settings: Optional[Settings] = None,
) -> BoundReport:
    """
    Optimistic V_0 of the sup-reward model minus pessimistic V_0 of the
    inf-reward model. Both models must share states, action set and bounds.
    """
    if not model_lower.same_structure(model_upper):
        raise InvalidArgumentError("bound models must share states, action set and transition bounds")
    settings = settings or get_settings()
    cfg = cfg or OptimizerConfig.from_settings(settings)
    pessimistic = synthesize(model_lower, horizon, gamma, cfg, settings)
    optimistic = optimistic_synthesize(model_upper, horizon, gamma, cfg, settings)
    gaps = np.asarray(optimistic.v0) - np.asarray(pessimistic.v0)
    logger.info(f"📊 Suboptimality gap: max {gaps.max(initial=0.0):.6g}, mean {gaps.mean():.6g}")
    return BoundReport(
        horizon=horizon,
        gamma=gamma,
        optimistic=optimistic.v0,
        pessimistic=pessimistic.v0,
        gaps=gaps.tolist(),
        slack=optimistic.slack + pessimistic.slack,
        certified=optimistic.certified and pessimistic.certified,
    )
