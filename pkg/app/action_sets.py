"""Compact convex action sets with membership, projection, vertex and linear-maximization oracles"""
import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from app.errors import CapabilityError, ModelValidationError
from app.simplex import simplex_lp_max
from app.utils import halton_points


MEMBERSHIP_TOL = 1e-9


class ActionSet(ABC):
    """
    Geometric description of the action set.

    Each variant implements the oracles it supports; asking for a missing
    one raises CapabilityError so solvers can fail fast.
    """

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @property
    def is_polytope(self) -> bool:
        return False

    @property
    def supports_projection(self) -> bool:
        return False

    @abstractmethod
    def contains(self, x: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool: ...

    def contains_batch(self, points: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """Row-wise membership of an (m, dim) array"""
        return np.array([self.contains(p, tol) for p in np.atleast_2d(points)], dtype=bool)

    def project(self, x: np.ndarray) -> np.ndarray:
        raise CapabilityError(f"{type(self).__name__} has no projection oracle")

    def vertices(self) -> np.ndarray:
        raise CapabilityError(f"{type(self).__name__} is not a polytope and has no vertex list")

    @abstractmethod
    def linear_max(self, g: np.ndarray) -> np.ndarray:
        """A maximizer of g.x over the set"""

    @abstractmethod
    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]: ...

    @abstractmethod
    def interior_point(self) -> np.ndarray:
        """A point of the set used as a default starting point"""

    def bounding_diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def sample_uniform(self, rng: np.random.Generator, n: int, max_rounds: int = 10_000) -> np.ndarray:
        """Rejection sampling from the bounding box"""
        lo, hi = self.bounding_box()
        accepted: List[np.ndarray] = []
        for _ in range(max_rounds):
            batch = rng.uniform(lo, hi, size=(max(n, 16), self.dim))
            accepted.extend(batch[self.contains_batch(batch)])
            if len(accepted) >= n:
                return np.array(accepted[:n])
        raise CapabilityError("rejection sampling failed to find enough points inside the set")

    def quasi_random_points(self, n: int, seed: int = 0) -> np.ndarray:
        """Halton points of the bounding box that fall inside the set"""
        lo, hi = self.bounding_box()
        batch = 2 * n
        for _ in range(12):
            candidates = halton_points(batch, lo, hi, seed=seed)
            inside = candidates[self.contains_batch(candidates)]
            if len(inside) >= n:
                return np.array(inside[:n])
            batch *= 2
        raise CapabilityError("could not place quasi-random points inside the set")

    @abstractmethod
    def equals(self, other: "ActionSet") -> bool: ...


@dataclass(frozen=True, eq=False)
class Box(ActionSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).ravel())
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).ravel())
        if self.lo.shape != self.hi.shape or self.lo.size == 0:
            raise ModelValidationError("box bounds must be nonempty vectors of equal length")
        if np.any(self.lo > self.hi):
            raise ModelValidationError("box requires lo <= hi componentwise")

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def is_polytope(self) -> bool:
        return True

    @property
    def supports_projection(self) -> bool:
        return True

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def contains_batch(self, points, tol=MEMBERSHIP_TOL):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((points >= self.lo - tol) & (points <= self.hi + tol), axis=1)

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def vertices(self):
        return np.array(list(itertools.product(*zip(self.lo, self.hi))), dtype=float)

    def linear_max(self, g):
        return np.where(np.asarray(g) > 0, self.hi, self.lo)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def interior_point(self):
        return 0.5 * (self.lo + self.hi)

    def equals(self, other):
        return isinstance(other, Box) and np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)


@dataclass(frozen=True, eq=False)
class Ball(ActionSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).ravel())
        if not self.radius > 0:
            raise ModelValidationError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def supports_projection(self) -> bool:
        return True

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return bool(np.linalg.norm(np.asarray(x, dtype=float) - self.center) <= self.radius + tol)

    def contains_batch(self, points, tol=MEMBERSHIP_TOL):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(points - self.center, axis=1) <= self.radius + tol

    def project(self, x):
        offset = np.asarray(x, dtype=float) - self.center
        norm = np.linalg.norm(offset)
        if norm <= self.radius:
            return self.center + offset
        return self.center + offset * (self.radius / norm)

    def linear_max(self, g):
        g = np.asarray(g, dtype=float)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            return self.center.copy()
        return self.center + self.radius * g / norm

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def interior_point(self):
        return self.center.copy()

    def equals(self, other):
        return isinstance(other, Ball) and np.array_equal(self.center, other.center) and self.radius == other.radius


@dataclass(frozen=True, eq=False)
class PolytopeV(ActionSet):
    """Convex hull of a vertex list"""

    points: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[0] < 1 or points.shape[1] < 1:
            raise ModelValidationError("polytope needs at least one vertex")
        object.__setattr__(self, "points", points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_polytope(self) -> bool:
        return True

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        lo, hi = self.bounding_box()
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            return False
        # min sum |V^T lam - x| over the weight simplex
        k, d = self.points.shape
        c = np.concatenate([np.zeros(k), -np.ones(2 * d)])
        A_eq = np.zeros((d + 1, k + 2 * d))
        A_eq[:d, :k] = self.points.T
        A_eq[:d, k:k + d] = np.eye(d)
        A_eq[:d, k + d:] = -np.eye(d)
        A_eq[d, :k] = 1.0
        b_eq = np.concatenate([x, [1.0]])
        residual = -simplex_lp_max(c, A_eq=A_eq, b_eq=b_eq).value
        return residual <= tol * (1.0 + float(np.abs(x).max()))

    def vertices(self):
        return self.points.copy()

    def linear_max(self, g):
        return self.points[int(np.argmax(self.points @ np.asarray(g, dtype=float)))].copy()

    def bounding_box(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def interior_point(self):
        return self.points.mean(axis=0)

    def equals(self, other):
        return isinstance(other, PolytopeV) and np.array_equal(self.points, other.points)


@dataclass(frozen=True, eq=False)
class Product(ActionSet):
    """Cartesian product; coordinates are the factors' coordinates concatenated"""

    factors: Tuple[ActionSet, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ModelValidationError("product needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    @property
    def is_polytope(self) -> bool:
        return all(f.is_polytope for f in self.factors)

    @property
    def supports_projection(self) -> bool:
        return all(f.supports_projection for f in self.factors)

    def _split(self, x: np.ndarray) -> List[np.ndarray]:
        cuts = np.cumsum([f.dim for f in self.factors])[:-1]
        return np.split(np.asarray(x, dtype=float), cuts)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return all(f.contains(part, tol) for f, part in zip(self.factors, self._split(x)))

    def contains_batch(self, points, tol=MEMBERSHIP_TOL):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cuts = np.cumsum([f.dim for f in self.factors])[:-1]
        inside = np.ones(points.shape[0], dtype=bool)
        for f, part in zip(self.factors, np.split(points, cuts, axis=1)):
            inside &= f.contains_batch(part, tol)
        return inside

    def project(self, x):
        return np.concatenate([f.project(part) for f, part in zip(self.factors, self._split(x))])

    def vertices(self):
        per_factor = [f.vertices() for f in self.factors]
        return np.array([np.concatenate(combo) for combo in itertools.product(*per_factor)])

    def linear_max(self, g):
        return np.concatenate([f.linear_max(part) for f, part in zip(self.factors, self._split(g))])

    def bounding_box(self):
        boxes = [f.bounding_box() for f in self.factors]
        return np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes])

    def interior_point(self):
        return np.concatenate([f.interior_point() for f in self.factors])

    def equals(self, other):
        return (
            isinstance(other, Product)
            and len(self.factors) == len(other.factors)
            and all(a.equals(b) for a, b in zip(self.factors, other.factors))
        )


def cylinder(center=(0.5, 0.5), squared_radius: float = 0.2, height=(0.0, 1.0)) -> Product:
    """Disk times interval: {(a1-c1)^2 + (a2-c2)^2 <= r^2, a3 in [h0, h1]}"""
    return Product((Ball(np.asarray(center), float(np.sqrt(squared_radius))), Box([height[0]], [height[1]])))
