"""Utility functions"""
import numpy as np
from scipy.stats import qmc


def stable_order(values: np.ndarray, descending: bool = False) -> np.ndarray:
    """
    Sort permutation with ties broken by original index.

    Example: stable_order([1, 3, 1], descending=True) -> [1, 0, 2]
    """
    values = np.asarray(values, dtype=float)
    keys = -values if descending else values
    return np.argsort(keys, kind="stable")


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) tuple"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))


def halton_points(n_points: int, lo: np.ndarray, hi: np.ndarray, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in the box [lo, hi]"""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    sampler = qmc.Halton(d=lo.size, scramble=True, seed=seed)
    unit = sampler.random(n_points)
    return lo + unit * (hi - lo)


def accumulated_slack(tolerance: float, gamma: float, horizon: int) -> float:
    """tol * sum_{i=1..N} gamma^i; equals N * tol when gamma = 1"""
    return float(tolerance * sum(gamma ** i for i in range(1, horizon + 1)))
