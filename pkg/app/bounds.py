"""Transition-bound functions of the action variable with declared shape tags"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Sequence, Tuple

import numpy as np
from loguru import logger

from app.errors import ModelValidationError


EIGEN_TOL = 1e-10


class Shape(str, Enum):
    LINEAR = "linear"
    CONCAVE = "concave"
    CONVEX = "convex"
    UNKNOWN = "unknown"


class BoundFunction(ABC):
    """One entry of the lower or upper transition-bound matrix, a -> P(q, a, q')"""

    shape: Shape

    @abstractmethod
    def value(self, a: np.ndarray) -> float: ...

    @abstractmethod
    def gradient(self, a: np.ndarray) -> np.ndarray: ...

    def value_batch(self, actions: np.ndarray) -> np.ndarray:
        return np.array([self.value(a) for a in np.atleast_2d(actions)])

    def gradient_batch(self, actions: np.ndarray) -> np.ndarray:
        return np.array([self.gradient(a) for a in np.atleast_2d(actions)])

    @property
    def curvature(self) -> float:
        """Lipschitz constant of the gradient, inf when unknown"""
        return np.inf

    def equals(self, other: "BoundFunction") -> bool:
        return self is other


@dataclass(frozen=True, eq=False)
class AffineBound(BoundFunction):
    c: np.ndarray
    d: float

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).ravel())
        object.__setattr__(self, "d", float(self.d))

    @property
    def shape(self) -> Shape:
        return Shape.LINEAR

    def value(self, a):
        return float(self.c @ a + self.d)

    def gradient(self, a):
        return self.c.copy()

    def value_batch(self, actions):
        return np.atleast_2d(actions) @ self.c + self.d

    def gradient_batch(self, actions):
        return np.tile(self.c, (np.atleast_2d(actions).shape[0], 1))

    @property
    def curvature(self) -> float:
        return 0.0

    def equals(self, other):
        return isinstance(other, AffineBound) and np.array_equal(self.c, other.c) and self.d == other.d


@dataclass(frozen=True, eq=False)
class QuadraticBound(BoundFunction):
    """a^T H a + c^T a + d with H symmetric"""

    H: np.ndarray
    c: np.ndarray
    d: float
    shape: Shape

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        object.__setattr__(self, "H", 0.5 * (H + H.T))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).ravel())
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "shape", Shape(self.shape))
        if self.H.shape != (self.c.size, self.c.size):
            raise ModelValidationError(
                f"quadratic term has shape {self.H.shape}, expected {(self.c.size, self.c.size)}"
            )

    def value(self, a):
        a = np.asarray(a, dtype=float)
        return float(a @ self.H @ a + self.c @ a + self.d)

    def gradient(self, a):
        return 2.0 * self.H @ np.asarray(a, dtype=float) + self.c

    def value_batch(self, actions):
        A = np.atleast_2d(actions)
        return np.einsum("ni,ij,nj->n", A, self.H, A) + A @ self.c + self.d

    def gradient_batch(self, actions):
        return 2.0 * np.atleast_2d(actions) @ self.H + self.c

    @property
    def curvature(self) -> float:
        return 2.0 * float(np.abs(np.linalg.eigvalsh(self.H)).max(initial=0.0))

    def shape_is_consistent(self) -> bool:
        """Eigenvalue sign test of the declared tag"""
        eig = np.linalg.eigvalsh(self.H)
        if self.shape == Shape.CONCAVE:
            return bool(eig.max(initial=0.0) <= EIGEN_TOL)
        if self.shape == Shape.CONVEX:
            return bool(eig.min(initial=0.0) >= -EIGEN_TOL)
        if self.shape == Shape.LINEAR:
            return bool(np.abs(eig).max(initial=0.0) <= EIGEN_TOL)
        return True

    def equals(self, other):
        return (
            isinstance(other, QuadraticBound)
            and np.array_equal(self.H, other.H)
            and np.array_equal(self.c, other.c)
            and self.d == other.d
            and self.shape == other.shape
        )


@dataclass(frozen=True, eq=False)
class OpaqueBound(BoundFunction):
    """Black-box evaluators; must be re-entrant"""

    fn: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    shape: Shape = Shape.UNKNOWN

    def value(self, a):
        return float(self.fn(np.asarray(a, dtype=float)))

    def gradient(self, a):
        return np.asarray(self.grad(np.asarray(a, dtype=float)), dtype=float)


def linear_combination(
    terms: Sequence[Tuple[float, BoundFunction]],
    offset: float,
    shape: Shape,
    dim: int,
) -> BoundFunction:
    """
    sum_i w_i * b_i(a) + offset, collapsed to a single closed-form bound when
    every term is Affine or Quadratic.
    """
    terms = [(float(w), b) for w, b in terms if w != 0.0]
    if all(isinstance(b, AffineBound) for _, b in terms):
        c = np.zeros(dim)
        d = offset
        for w, b in terms:
            c += w * b.c
            d += w * b.d
        return AffineBound(c, d)
    if all(isinstance(b, (AffineBound, QuadraticBound)) for _, b in terms):
        H = np.zeros((dim, dim))
        c = np.zeros(dim)
        d = offset
        for w, b in terms:
            if isinstance(b, QuadraticBound):
                H += w * b.H
            c += w * b.c
            d += w * b.d
        return QuadraticBound(H, c, d, shape)

    weights = np.array([w for w, _ in terms])
    bounds: List[BoundFunction] = [b for _, b in terms]

    def fn(a):
        return float(sum(w * b.value(a) for w, b in zip(weights, bounds)) + offset)

    def grad(a):
        g = np.zeros(dim)
        for w, b in zip(weights, bounds):
            g += w * b.gradient(a)
        return g

    return OpaqueBound(fn, grad, shape)


def spot_check_shape(
    bound: BoundFunction,
    samples: np.ndarray,
    rng: np.random.Generator,
    chords: int = 1000,
    tol: float = 1e-8,
) -> bool:
    """
    Random midpoint test of a declared shape on chords between sampled points.
    Sampling cannot prove a shape, so a failure is reported, never raised.
    """
    if bound.shape == Shape.UNKNOWN or len(samples) < 2:
        return True
    i = rng.integers(0, len(samples), size=chords)
    j = rng.integers(0, len(samples), size=chords)
    for x, y in zip(samples[i], samples[j]):
        mid = bound.value(0.5 * (x + y))
        chord = 0.5 * (bound.value(x) + bound.value(y))
        concave_ok = mid >= chord - tol
        convex_ok = mid <= chord + tol
        if bound.shape == Shape.CONCAVE and not concave_ok:
            return False
        if bound.shape == Shape.CONVEX and not convex_ok:
            return False
        if bound.shape == Shape.LINEAR and not (concave_ok and convex_ok):
            return False
    return True


def warn_on_shape(bound: BoundFunction, label: str, samples: np.ndarray, rng: np.random.Generator,
                  chords: int, tol: float) -> bool:
    ok = spot_check_shape(bound, samples, rng, chords, tol)
    if not ok:
        logger.warning(f"⚠ {label}: declared {bound.shape.value} shape failed a midpoint test")
    return ok
