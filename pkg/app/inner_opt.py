"""
Worst- and best-case distributions over an interval probability simplex.

Sort-and-fill: start from the lower bounds and hand the surplus 1 - sum(lo)
to coordinates in ascending (worst case) or descending (best case) value
order, each up to its upper bound.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.errors import InvalidIntervalError
from app.utils import stable_order


INTERVAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IntervalSimplex:
    """{p : lo <= p <= hi, sum(p) = 1} at a fixed state-action pair"""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).ravel()
        hi = np.asarray(self.hi, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size == 0:
            raise InvalidIntervalError("lo and hi must be nonempty vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidIntervalError("interval bounds must be finite")
        if np.any(lo > hi + INTERVAL_TOL):
            raise InvalidIntervalError("interval requires lo <= hi componentwise")
        if lo.sum() > 1.0 + INTERVAL_TOL or hi.sum() < 1.0 - INTERVAL_TOL:
            raise InvalidIntervalError(
                f"interval admits no distribution: sum(lo)={lo.sum():.12g}, sum(hi)={hi.sum():.12g}"
            )
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def size(self) -> int:
        return self.lo.size


def _fill(gamma: IntervalSimplex, order: np.ndarray) -> np.ndarray:
    """Upper bounds before the pivot, lower bounds after it, in the given order"""
    lo = gamma.lo[order]
    hi = gamma.hi[order]
    surplus = 1.0 - lo.sum()
    room = np.cumsum(hi - lo)
    pivot = min(int(np.searchsorted(room, surplus, side="left")), lo.size - 1)

    p_sorted = np.concatenate([hi[:pivot], lo[pivot:]])
    # Pivot from partial sums, not accumulated increments
    p_sorted[pivot] = 1.0 - hi[:pivot].sum() - lo[pivot + 1:].sum()

    p = np.empty_like(p_sorted)
    p[order] = p_sorted
    return p


def worst_case_distribution(gamma: IntervalSimplex, V: np.ndarray) -> Tuple[np.ndarray, float]:
    """Feasible p minimizing p.V"""
    V = np.asarray(V, dtype=float)
    p = _fill(gamma, stable_order(V))
    return p, float(p @ V)


def best_case_distribution(gamma: IntervalSimplex, V: np.ndarray) -> Tuple[np.ndarray, float]:
    """Feasible p maximizing p.V"""
    V = np.asarray(V, dtype=float)
    p = _fill(gamma, stable_order(V, descending=True))
    return p, float(p @ V)


def worst_case_value(lo: np.ndarray, hi: np.ndarray, V: np.ndarray) -> float:
    return worst_case_distribution(IntervalSimplex(lo, hi), V)[1]


def best_case_value(lo: np.ndarray, hi: np.ndarray, V: np.ndarray) -> float:
    return best_case_distribution(IntervalSimplex(lo, hi), V)[1]


def _fill_batch(lo: np.ndarray, hi: np.ndarray, order: np.ndarray) -> np.ndarray:
    """_fill over many (lo, hi) rows that share one ordering"""
    lo_s = lo[:, order]
    hi_s = hi[:, order]
    n = lo_s.shape[1]
    surplus = 1.0 - lo_s.sum(axis=1)
    room = np.cumsum(hi_s - lo_s, axis=1)
    pivot = np.minimum((room < surplus[:, None]).sum(axis=1), n - 1)

    position = np.arange(n)[None, :]
    before = position < pivot[:, None]
    at = position == pivot[:, None]
    p_sorted = np.where(before, hi_s, lo_s)
    rest = np.where(at, 0.0, p_sorted).sum(axis=1)
    p_sorted = np.where(at, (1.0 - rest)[:, None], p_sorted)

    p = np.empty_like(p_sorted)
    p[:, order] = p_sorted
    return p


def worst_case_values(lo: np.ndarray, hi: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Worst-case values for each row of (lo, hi) against one value vector"""
    V = np.asarray(V, dtype=float)
    return _fill_batch(np.atleast_2d(lo), np.atleast_2d(hi), stable_order(V)) @ V


def best_case_values(lo: np.ndarray, hi: np.ndarray, V: np.ndarray) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    return _fill_batch(np.atleast_2d(lo), np.atleast_2d(hi), stable_order(V, descending=True)) @ V
