"""Continuous-action maximization engines for the per-index subproblems of a backup"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from scipy.optimize import minimize_scalar

from app.action_sets import ActionSet
from app.bounds import BoundFunction, Shape
from app.config.settings import Settings, get_settings
from app.errors import CapabilityError
from app.simplex import LPResult, simplex_lp_max


__all__ = [
    "OptimizerConfig",
    "SmoothObjective",
    "OptimizeResult",
    "LPResult",
    "simplex_lp_max",
    "max_over_vertices",
    "project",
    "project_simplex",
    "projected_gradient_max",
    "frank_wolfe_max",
    "frank_wolfe_oracle_max",
    "maximize_concave",
]


class OptimizerConfig(BaseModel):
    tolerance: float = Field(default=1e-4, gt=0)
    max_iterations: int = Field(default=5000, ge=1)
    multistart: int = Field(default=5, ge=1)
    backtracking_factor: float = Field(default=0.5, gt=0, lt=1)
    sufficient_increase: float = Field(default=1e-4, gt=0, lt=1)
    seed: int = 0

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None, **overrides) -> "OptimizerConfig":
        settings = settings or get_settings()
        values = dict(
            tolerance=settings.tolerance,
            max_iterations=settings.max_iterations,
            multistart=settings.multistart,
            backtracking_factor=settings.backtracking_factor,
            sufficient_increase=settings.sufficient_increase,
            seed=settings.seed,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class SmoothObjective:
    """f(a) with its gradient and a curvature tag"""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    shape: Shape = Shape.UNKNOWN
    curvature: float = np.inf

    @classmethod
    def from_bound(cls, bound: BoundFunction, shape: Optional[Shape] = None) -> "SmoothObjective":
        return cls(bound.value, bound.gradient, shape or bound.shape, bound.curvature)


@dataclass(frozen=True)
class OptimizeResult:
    value: float
    x: np.ndarray
    converged: bool = True
    iterations: int = 0
    certificate: float = 0.0  # residual or duality gap at termination
    method: str = ""


def max_over_vertices(f: SmoothObjective, vertices: Sequence[np.ndarray]) -> OptimizeResult:
    """Best vertex; ties go to the lowest index"""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.size == 0:
        raise CapabilityError("vertex enumeration needs a nonempty vertex list")
    vertices = np.atleast_2d(vertices)
    values = np.array([f.value(v) for v in vertices])
    best = int(np.argmax(values))
    return OptimizeResult(float(values[best]), vertices[best].copy(), True, vertices.shape[0], 0.0, "vertices")


def project(action_set: ActionSet, x: np.ndarray) -> np.ndarray:
    """Euclidean projection; V-polytopes raise CapabilityError"""
    return action_set.project(np.asarray(x, dtype=float))


def project_simplex(v: np.ndarray, s: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum(w) = s} by sorting"""
    v = np.asarray(v, dtype=float)
    if np.all(v >= 0) and np.isclose(v.sum(), s, rtol=0, atol=1e-15):
        return v.copy()
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, v.size + 1) > (cssv - s))[0][-1]
    theta = (cssv[rho] - s) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@lru_cache(maxsize=64)
def _starting_points(action_set: ActionSet, count: int, seed: int) -> np.ndarray:
    starts = [action_set.interior_point()]
    if count > 1:
        starts.extend(action_set.quasi_random_points(count - 1, seed=seed))
    return np.array(starts)


def _require_concave(f: SmoothObjective):
    if f.shape not in (Shape.CONCAVE, Shape.LINEAR):
        raise CapabilityError(f"first-order ascent needs a concave objective, got {f.shape.value}")


def _ascend(f: SmoothObjective, action_set: ActionSet, x0: np.ndarray, cfg: OptimizerConfig) -> OptimizeResult:
    x = project(action_set, x0)
    fx = f.value(x)
    step = 1.0 / f.curvature if np.isfinite(f.curvature) and f.curvature > 0 else 1.0
    residual = np.inf
    for it in range(1, cfg.max_iterations + 1):
        g = f.gradient(x)
        residual = float(np.linalg.norm(x - project(action_set, x + g)))
        if residual <= cfg.tolerance:
            return OptimizeResult(fx, x, True, it, residual, "projected_gradient")
        t = step
        while True:
            x_new = project(action_set, x + t * g)
            f_new = f.value(x_new)
            if f_new >= fx + cfg.sufficient_increase * float(g @ (x_new - x)):
                break
            t *= cfg.backtracking_factor
            if t < 1e-14:
                return OptimizeResult(fx, x, False, it, residual, "projected_gradient")
        x, fx = x_new, f_new
        step = t / cfg.backtracking_factor
    return OptimizeResult(fx, x, False, cfg.max_iterations, residual, "projected_gradient")


def projected_gradient_max(
    f: SmoothObjective,
    action_set: ActionSet,
    cfg: Optional[OptimizerConfig] = None,
    starts: Optional[np.ndarray] = None,
) -> OptimizeResult:
    """
    Projected gradient ascent with backtracking, best over multistart.
    Stops when ||a - project(a + grad f(a))|| <= tolerance.
    """
    cfg = cfg or OptimizerConfig()
    _require_concave(f)
    if not action_set.supports_projection:
        raise CapabilityError(f"{type(action_set).__name__} has no projection oracle; use Frank-Wolfe")
    if starts is None:
        starts = _starting_points(action_set, cfg.multistart, cfg.seed)
    best: Optional[OptimizeResult] = None
    for x0 in starts:
        result = _ascend(f, action_set, x0, cfg)
        if best is None or result.value > best.value:
            best = result
    if not best.converged:
        logger.warning(f"⚠ Projected gradient stopped with residual {best.certificate:.2e} > {cfg.tolerance:.0e}")
    return best


def _line_search(f: SmoothObjective, x: np.ndarray, direction: np.ndarray, s_max: float):
    """Best step in [0, s_max] along direction, endpoint included"""
    search = minimize_scalar(
        lambda s: -f.value(x + s * direction), bounds=(0.0, s_max), method="bounded",
        options={"xatol": 1e-12},
    )
    s, f_s = float(search.x), -float(search.fun)
    f_end = f.value(x + s_max * direction)
    if f_end >= f_s:
        s, f_s = s_max, f_end
    return s, f_s


def frank_wolfe_oracle_max(
    f: SmoothObjective,
    lmo: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cfg: Optional[OptimizerConfig] = None,
) -> OptimizeResult:
    """
    Frank-Wolfe with exact line search over any set given by its
    linear-maximization oracle. The gap g_k = max_v grad.(v - a_k) bounds
    the suboptimality f* - f(a_k).
    """
    cfg = cfg or OptimizerConfig()
    _require_concave(f)
    x = np.asarray(x0, dtype=float)
    fx = f.value(x)
    gap = np.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        g = f.gradient(x)
        direction = lmo(g) - x
        gap = float(g @ direction)
        if gap <= cfg.tolerance:
            return OptimizeResult(fx, x, True, it, max(gap, 0.0), "frank_wolfe")
        s, f_s = _line_search(f, x, direction, 1.0)
        if f_s <= fx:
            break
        x, fx = x + s * direction, f_s
    logger.warning(f"⚠ Frank-Wolfe stopped with gap {gap:.2e} > {cfg.tolerance:.0e}")
    return OptimizeResult(fx, x, False, it, gap, "frank_wolfe")


def frank_wolfe_max(
    f: SmoothObjective,
    vertices: Sequence[np.ndarray],
    cfg: Optional[OptimizerConfig] = None,
) -> OptimizeResult:
    """
    Away-step Frank-Wolfe over the convex hull of a vertex list.

    The iterate is kept as convex weights on the vertices. Each step either
    moves toward the best vertex or takes mass off the worst active one,
    whichever direction has the larger gap; away steps that empty a vertex
    drop it from the active set. This keeps convergence linear when the
    maximizer sits on a face. The certificate is the Frank-Wolfe gap.
    """
    cfg = cfg or OptimizerConfig()
    _require_concave(f)
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    if vertices.size == 0:
        raise CapabilityError("Frank-Wolfe needs a nonempty vertex list")
    weights = np.full(vertices.shape[0], 1.0 / vertices.shape[0])
    x = weights @ vertices
    fx = f.value(x)
    gap = np.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        g = f.gradient(x)
        scores = vertices @ g
        toward = int(np.argmax(scores))
        gap = float(scores[toward] - g @ x)
        if gap <= cfg.tolerance:
            return OptimizeResult(fx, x, True, it, max(gap, 0.0), "frank_wolfe")

        active = np.flatnonzero(weights > 0.0)
        away = int(active[np.argmin(scores[active])])
        away_gap = float(g @ x - scores[away])
        use_away = away_gap > gap and weights[away] < 1.0
        if use_away:
            direction = x - vertices[away]
            s_max = weights[away] / (1.0 - weights[away])
        else:
            direction, s_max = vertices[toward] - x, 1.0
        s, f_s = _line_search(f, x, direction, s_max)
        if f_s <= fx:
            break

        if use_away:
            weights *= 1.0 + s
            weights[away] = 0.0 if s >= s_max else weights[away] - s
        else:
            weights *= 1.0 - s
            weights[toward] += s
        weights = np.clip(weights, 0.0, None)
        weights /= weights.sum()
        x, fx = weights @ vertices, f_s
    logger.warning(f"⚠ Frank-Wolfe stopped with gap {gap:.2e} > {cfg.tolerance:.0e}")
    return OptimizeResult(fx, x, False, it, gap, "frank_wolfe")


def maximize_concave(
    f: SmoothObjective,
    action_set: ActionSet,
    cfg: Optional[OptimizerConfig] = None,
    vertices: Optional[np.ndarray] = None,
) -> OptimizeResult:
    """
    Route a concave (or linear) objective to the cheapest exact engine:
    vertices for linear objectives over polytopes, the linear oracle for
    linear objectives elsewhere, projection when the set has one, and
    Frank-Wolfe otherwise.
    """
    cfg = cfg or OptimizerConfig()
    _require_concave(f)
    if f.shape == Shape.LINEAR:
        if action_set.is_polytope:
            return max_over_vertices(f, vertices if vertices is not None else action_set.vertices())
        x = action_set.linear_max(f.gradient(action_set.interior_point()))
        return OptimizeResult(f.value(x), x, True, 1, 0.0, "linear_oracle")
    if action_set.supports_projection:
        return projected_gradient_max(f, action_set, cfg)
    if action_set.is_polytope:
        return frank_wolfe_max(f, vertices if vertices is not None else action_set.vertices(), cfg)
    return frank_wolfe_oracle_max(f, action_set.linear_max, action_set.interior_point(), cfg)
