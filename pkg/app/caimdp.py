"""caIMDP data model: interval consistency checks and shape classification"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from app.action_sets import ActionSet
from app.bounds import BoundFunction, OpaqueBound, QuadraticBound, Shape, warn_on_shape
from app.errors import CapabilityError, InvalidArgumentError, MembershipError, ModelValidationError
from app.models import ActionViolation, ValidationReport
from app.utils import derive_rng


BoundMatrix = Tuple[Tuple[BoundFunction, ...], ...]


class ShapeClass(str, Enum):
    LINEAR = "linear"
    CONCAVE_CONVEX = "concave_convex"
    CONVEX_CONCAVE = "convex_concave"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class Caimdp:
    """
    Finite states, a continuous action set, action-dependent interval bounds
    lower[q][q'](a) <= P(q, a, q') <= upper[q][q'](a) and a state reward.
    Immutable once built.
    """

    n_states: int
    action_set: ActionSet
    lower: BoundMatrix
    upper: BoundMatrix
    reward: np.ndarray

    def __post_init__(self):
        n = int(self.n_states)
        if n < 1:
            raise ModelValidationError("n_states must be positive")
        lower = tuple(tuple(row) for row in self.lower)
        upper = tuple(tuple(row) for row in self.upper)
        for name, matrix in (("lower", lower), ("upper", upper)):
            if len(matrix) != n or any(len(row) != n for row in matrix):
                raise ModelValidationError(f"{name} must be a {n} x {n} matrix of bounds")
        reward = np.asarray(self.reward, dtype=float).ravel()
        if reward.size != n:
            raise ModelValidationError(f"reward has {reward.size} entries, expected {n}")
        if not np.all(np.isfinite(reward)):
            raise ModelValidationError("reward must be finite")
        if np.any(reward < 0):
            raise ModelValidationError("reward must be nonnegative")

        dim = self.action_set.dim
        for name, matrix in (("lower", lower), ("upper", upper)):
            for q, row in enumerate(matrix):
                for q2, bound in enumerate(row):
                    c = getattr(bound, "c", None)
                    if c is not None and c.size != dim:
                        raise ModelValidationError(
                            f"{name}[{q}][{q2}] acts on dimension {c.size}, action set has {dim}"
                        )
                    if isinstance(bound, QuadraticBound) and not bound.shape_is_consistent():
                        raise ModelValidationError(
                            f"{name}[{q}][{q2}] is tagged {bound.shape.value} but its quadratic "
                            f"term fails the eigenvalue sign check"
                        )

        object.__setattr__(self, "n_states", n)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "reward", reward)

    @property
    def action_dim(self) -> int:
        return self.action_set.dim

    def action_array(self, actions) -> np.ndarray:
        """
        Actions as an (m, action_dim) array with every row inside the action
        set. A single flat action of the right length counts as one row.
        """
        try:
            arr = np.asarray(actions, dtype=float)
        except (TypeError, ValueError) as e:
            raise InvalidArgumentError(f"actions must be a rectangular list of vectors ({e})") from e
        if arr.size == 0:
            return arr.reshape(0, self.action_dim)
        if arr.ndim == 1 and arr.size == self.action_dim:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.action_dim:
            raise InvalidArgumentError(
                f"actions have shape {arr.shape}, expected (m, {self.action_dim})"
            )
        for idx, a in enumerate(arr):
            if not self.action_set.contains(a):
                raise MembershipError(f"action {idx} lies outside the action set", index=idx)
        return arr

    def evaluate_row(self, q: int, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(lower, upper) bound vectors of state q at action a"""
        lo = np.array([b.value(a) for b in self.lower[q]])
        hi = np.array([b.value(a) for b in self.upper[q]])
        return lo, hi

    def evaluate(self, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Full bound matrices at action a"""
        rows = [self.evaluate_row(q, a) for q in range(self.n_states)]
        return np.array([r[0] for r in rows]), np.array([r[1] for r in rows])

    def evaluate_batch(self, actions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Bound tensors of shape (n_actions, n_states, n_states)"""
        actions = np.atleast_2d(actions)
        n = self.n_states
        lo = np.empty((actions.shape[0], n, n))
        hi = np.empty_like(lo)
        for q in range(n):
            for q2 in range(n):
                lo[:, q, q2] = self.lower[q][q2].value_batch(actions)
                hi[:, q, q2] = self.upper[q][q2].value_batch(actions)
        return lo, hi

    def with_reward(self, reward: Sequence[float]) -> "Caimdp":
        return Caimdp(self.n_states, self.action_set, self.lower, self.upper, np.asarray(reward, dtype=float))

    def relabel(self, perm: Sequence[int]) -> "Caimdp":
        """Model whose state i is this model's state perm[i]"""
        perm = list(perm)
        lower = tuple(tuple(self.lower[p][p2] for p2 in perm) for p in perm)
        upper = tuple(tuple(self.upper[p][p2] for p2 in perm) for p in perm)
        return Caimdp(self.n_states, self.action_set, lower, upper, self.reward[perm])

    def same_structure(self, other: "Caimdp") -> bool:
        """Same states, action set and bounds; rewards may differ"""
        if self.n_states != other.n_states or not self.action_set.equals(other.action_set):
            return False
        return all(
            a.equals(b)
            for mine, theirs in ((self.lower, other.lower), (self.upper, other.upper))
            for row_a, row_b in zip(mine, theirs)
            for a, b in zip(row_a, row_b)
        )

    def entries(self):
        """Yield (matrix name, q, q', bound) for every bound"""
        for name, matrix in (("lower", self.lower), ("upper", self.upper)):
            for q, row in enumerate(matrix):
                for q2, bound in enumerate(row):
                    yield name, q, q2, bound


def classify(imdp: Caimdp) -> ShapeClass:
    """Most specific tractable shape class, General if none applies"""
    lower_shapes = {b.shape for row in imdp.lower for b in row}
    upper_shapes = {b.shape for row in imdp.upper for b in row}
    polytopic = imdp.action_set.is_polytope

    if lower_shapes <= {Shape.LINEAR} and upper_shapes <= {Shape.LINEAR} and polytopic:
        return ShapeClass.LINEAR
    # Every ActionSet variant is convex
    if lower_shapes <= {Shape.LINEAR, Shape.CONCAVE} and upper_shapes <= {Shape.LINEAR, Shape.CONVEX}:
        return ShapeClass.CONCAVE_CONVEX
    if lower_shapes <= {Shape.LINEAR, Shape.CONVEX} and upper_shapes <= {Shape.LINEAR, Shape.CONCAVE} and polytopic:
        return ShapeClass.CONVEX_CONCAVE
    return ShapeClass.GENERAL


def offending_entries(imdp: Caimdp) -> List[Tuple[str, int, int]]:
    """Bounds that keep a model out of every tractable class"""
    unknown = [(name, q, q2) for name, q, q2, b in imdp.entries() if b.shape == Shape.UNKNOWN]
    if unknown:
        return unknown
    # Mixed curvature: report entries breaking the concave/convex pattern
    wrong = {"lower": Shape.CONVEX, "upper": Shape.CONCAVE}
    return [(name, q, q2) for name, q, q2, b in imdp.entries() if b.shape == wrong[name]]


def _violations(lo: np.ndarray, hi: np.ndarray) -> Tuple[float, float, float, float, float]:
    return (
        float(np.max(lo - hi, initial=0.0)),
        float(np.max(-lo, initial=0.0)),
        float(np.max(hi - 1.0, initial=0.0)),
        float(np.max(lo.sum(axis=-1) - 1.0, initial=0.0)),
        float(np.max(1.0 - hi.sum(axis=-1), initial=0.0)),
    )


def validate_pointwise(imdp: Caimdp, actions: np.ndarray, tolerance: float = 1e-9) -> ValidationReport:
    """
    Worst violation, per action, of lower <= upper, 0 <= lower, upper <= 1 and
    sum(lower) <= 1 <= sum(upper) for every state.
    """
    actions = imdp.action_array(actions)
    lo, hi = imdp.evaluate_batch(actions)
    entries = []
    for idx in range(actions.shape[0]):
        ordering, lower_neg, upper_one, lower_sum, upper_sum = _violations(lo[idx], hi[idx])
        entries.append(ActionViolation(
            index=idx,
            ordering=ordering,
            lower_nonnegative=lower_neg,
            upper_at_most_one=upper_one,
            lower_sum=lower_sum,
            upper_sum=upper_sum,
            worst=max(ordering, lower_neg, upper_one, lower_sum, upper_sum),
        ))
    worst = max((e.worst for e in entries), default=0.0)
    return ValidationReport(
        n_actions=len(entries),
        tolerance=tolerance,
        passed=worst <= tolerance,
        worst_violation=worst,
        violations=entries,
    )


def default_validation_actions(action_set: ActionSet, n_samples: int = 256, seed: int = 0) -> np.ndarray:
    """Quasi-random points of the set plus all vertices of polytopic sets"""
    if not action_set.is_polytope:
        return action_set.quasi_random_points(n_samples, seed=seed)
    vertices = action_set.vertices()
    try:
        points = action_set.quasi_random_points(n_samples, seed=seed)
    except CapabilityError:
        # Flat hulls catch no box points; their vertices span them
        return vertices
    return np.vstack([points, vertices])


def check_model(
    imdp: Caimdp,
    n_samples: int = 256,
    tolerance: float = 1e-9,
    chords: int = 1000,
    shape_tolerance: float = 1e-8,
    seed: int = 0,
    actions: Optional[np.ndarray] = None,
) -> ValidationReport:
    """Sampled interval validation plus Opaque shape spot checks; raises on violation"""
    if actions is None:
        actions = default_validation_actions(imdp.action_set, n_samples, seed)
    report = validate_pointwise(imdp, actions, tolerance)
    if not report.passed:
        raise ModelValidationError(
            f"interval constraints violated by {report.worst_violation:.3e} "
            f"(tolerance {tolerance:.0e}) on {report.n_actions} sampled actions"
        )

    opaque = [(name, q, q2, b) for name, q, q2, b in imdp.entries() if isinstance(b, OpaqueBound)]
    if opaque:
        rng = derive_rng(seed, 1)
        for name, q, q2, bound in opaque:
            warn_on_shape(bound, f"{name}[{q}][{q2}]", actions, rng, chords, shape_tolerance)
    logger.debug(f"✓ Model validated on {report.n_actions} actions (worst violation {report.worst_violation:.2e})")
    return report
