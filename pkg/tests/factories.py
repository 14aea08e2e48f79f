"""Random model builders shared by the test modules"""
import numpy as np

from app.action_sets import Box, PolytopeV
from app.bounds import AffineBound, QuadraticBound, Shape
from app.caimdp import Caimdp
from app.experiments import GeneratorConfig, generate
from app.models import BoxSpec


def random_interval(rng: np.random.Generator, n: int):
    """(lo, hi) with sum(lo) <= 1 <= sum(hi) around a random distribution"""
    p = rng.dirichlet(np.ones(n))
    lo = p * rng.uniform(0.0, 1.0, n)
    hi = p + (1.0 - p) * rng.uniform(0.0, 0.5, n)
    # Some exact ties and degenerate coordinates
    if n > 1 and rng.random() < 0.3:
        lo[0] = hi[0] = p[0]
    return lo, hi


def random_values(rng: np.random.Generator, n: int, ties: bool = False) -> np.ndarray:
    if ties:
        return rng.integers(0, 3, n).astype(float)
    return rng.uniform(0.0, 10.0, n)


def _base(rng: np.random.Generator, n: int) -> np.ndarray:
    base = rng.uniform(0.5, 1.5, size=(n, n))
    return base / base.sum(axis=1, keepdims=True)


def linear_model(rng: np.random.Generator, n: int, dim: int = 2, eps: float = 0.3, action_set=None) -> Caimdp:
    """Affine bounds over the unit box (or a given polytope inside it)"""
    action_set = action_set or Box(np.zeros(dim), np.ones(dim))
    base = _base(rng, n)
    lower, upper = [], []
    for q in range(n):
        row_lo, row_hi = [], []
        for q2 in range(n):
            b = base[q, q2]
            w = rng.uniform(0.0, 1.0, dim) / dim
            w_hi = rng.uniform(0.0, 1.0, dim) / dim
            e_hi = min(eps, 1.0 / b - 1.0)
            # lower in [b(1-eps), b], upper in [b, b(1+e_hi)] on the unit box
            row_lo.append(AffineBound(b * eps * w, b * (1.0 - eps)))
            row_hi.append(AffineBound(-b * e_hi * w_hi, b * (1.0 + e_hi)))
        lower.append(row_lo)
        upper.append(row_hi)
    return Caimdp(n, action_set, lower, upper, rng.uniform(0.0, 10.0, n))


def convex_concave_model(rng: np.random.Generator, n: int, dim: int = 2, eps: float = 0.3,
                         action_set=None) -> Caimdp:
    """Convex quadratic lower bounds, concave upper bounds over the unit box"""
    action_set = action_set or Box(np.zeros(dim), np.ones(dim))
    base = _base(rng, n)
    diameter2 = float(dim)
    eye = np.eye(dim)
    lower, upper = [], []
    for q in range(n):
        row_lo, row_hi = [], []
        for q2 in range(n):
            b = base[q, q2]
            z = rng.uniform(0.0, 1.0, dim)
            z2 = rng.uniform(0.0, 1.0, dim)
            e_hi = min(eps, 1.0 / b - 1.0)
            alpha = b * eps / diameter2
            beta = b * e_hi / diameter2
            # b(1-eps) + alpha |a - z|^2  and  b(1+e_hi) - beta |a - z2|^2
            row_lo.append(QuadraticBound(alpha * eye, -2.0 * alpha * z, b * (1.0 - eps) + alpha * z @ z, Shape.CONVEX))
            row_hi.append(QuadraticBound(-beta * eye, 2.0 * beta * z2, b * (1.0 + e_hi) - beta * z2 @ z2, Shape.CONCAVE))
        lower.append(row_lo)
        upper.append(row_hi)
    return Caimdp(n, action_set, lower, upper, rng.uniform(0.0, 10.0, n))


def concave_convex_model(seed: int, n: int, dim: int = 2, eps: float = 0.3, kappa: float = 1.0) -> Caimdp:
    """Generator output over the unit box"""
    spec = BoxSpec(type="box", lo=[0.0] * dim, hi=[1.0] * dim)
    return generate(GeneratorConfig(n_states=n, action_set=spec, eps=eps, kappa=kappa, seed=seed,
                                    validation_samples=64))


def degenerate_model(rng: np.random.Generator, n: int) -> Caimdp:
    """lower = upper = a fixed stochastic matrix, single-point action set"""
    base = _base(rng, n)
    lower = [[AffineBound([0.0], base[q, q2]) for q2 in range(n)] for q in range(n)]
    return Caimdp(n, Box([0.5], [0.5]), lower, lower, rng.uniform(0.0, 10.0, n))


def triangle() -> PolytopeV:
    return PolytopeV([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
