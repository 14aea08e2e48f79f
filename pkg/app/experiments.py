"""Random concave/convex caIMDP generation and the continuous-vs-sampled comparison"""
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from tqdm import tqdm

from app.action_sets import ActionSet, cylinder
from app.bellman import discrete_vi, synthesize
from app.bounds import QuadraticBound, Shape
from app.caimdp import Caimdp, check_model
from app.config.settings import Settings, get_settings
from app.errors import GenerationError, InvalidArgumentError, ModelValidationError
from app.model_io import action_set_from_spec, action_set_to_spec
from app.models import ActionSetSpec, ComparisonReport, ComparisonRow
from app.optimizers import OptimizerConfig
from app.utils import derive_rng


DEFAULT_LADDER = (1, 8, 27, 64, 125)


def _default_action_set():
    return action_set_to_spec(cylinder())


class GeneratorConfig(BaseModel):
    """Parameters of a random concave/convex caIMDP"""
    n_states: int = Field(default=25, ge=1)
    action_set: ActionSetSpec = Field(default_factory=_default_action_set,
                                      description="Defaults to the disk-times-interval cylinder")
    eps: float = Field(default=0.2, ge=0.0, lt=0.5, description="Relative interval half-width")
    kappa: float = Field(default=0.5, ge=0.0, le=1.0, description="Share of the half-width that varies with the action")
    reward_max: float = Field(default=10.0, ge=0.0)
    max_retries: int = Field(default=10, ge=0)
    validation_samples: int = Field(default=256, ge=1)
    seed: int = 0


def _entry_bounds(
    base: float,
    eps: float,
    kappa: float,
    anchor_lo: np.ndarray,
    anchor_hi: np.ndarray,
    diameter: float,
) -> Tuple[QuadraticBound, QuadraticBound]:
    """
    lower(a) = base (1 - eps) + base eps kappa (1 - |a - z|^2 / D^2)
    upper(a) = base (1 + e) - base e kappa (1 - |a - z'|^2 / D^2)
    with e = min(eps, 1/base - 1) so that upper stays <= 1.
    """
    dim = anchor_lo.size
    eye = np.eye(dim)
    alpha = base * eps * kappa / diameter ** 2
    lower = QuadraticBound(
        -alpha * eye,
        2.0 * alpha * anchor_lo,
        base * (1.0 - eps) + base * eps * kappa - alpha * anchor_lo @ anchor_lo,
        Shape.CONCAVE,
    )
    eps_hi = min(eps, 1.0 / base - 1.0)
    beta = base * eps_hi * kappa / diameter ** 2
    upper = QuadraticBound(
        beta * eye,
        -2.0 * beta * anchor_hi,
        base * (1.0 + eps_hi) - base * eps_hi * kappa + beta * anchor_hi @ anchor_hi,
        Shape.CONVEX,
    )
    return lower, upper


def _draw(cfg: GeneratorConfig, action_set: ActionSet, attempt: int) -> Caimdp:
    rng = derive_rng(cfg.seed, attempt)
    n = cfg.n_states
    base = rng.uniform(0.5, 1.5, size=(n, n))
    base /= base.sum(axis=1, keepdims=True)

    box_lo, box_hi = action_set.bounding_box()
    # Box diagonal >= any distance inside the set, so the bracket stays in [0, 1]
    diameter = float(np.linalg.norm(box_hi - box_lo)) or 1.0
    lower, upper = [], []
    for q in range(n):
        row_lo, row_hi = [], []
        for q2 in range(n):
            z = rng.uniform(box_lo, box_hi)
            z_prime = rng.uniform(box_lo, box_hi)
            lo, hi = _entry_bounds(base[q, q2], cfg.eps, cfg.kappa, z, z_prime, diameter)
            row_lo.append(lo)
            row_hi.append(hi)
        lower.append(row_lo)
        upper.append(row_hi)
    reward = rng.uniform(0.0, cfg.reward_max, size=n)
    return Caimdp(n, action_set, lower, upper, reward)


def generate(cfg: Optional[GeneratorConfig] = None, settings: Optional[Settings] = None) -> Caimdp:
    """
    Random concave/convex instance around a row-stochastic base matrix.
    Redraws on failed validation, up to cfg.max_retries times.
    """
    cfg = cfg or GeneratorConfig()
    settings = settings or get_settings()
    action_set = action_set_from_spec(cfg.action_set)
    for attempt in range(cfg.max_retries + 1):
        imdp = _draw(cfg, action_set, attempt)
        try:
            check_model(
                imdp,
                n_samples=cfg.validation_samples,
                tolerance=settings.validation_tolerance,
                chords=settings.shape_check_chords,
                shape_tolerance=settings.shape_check_tolerance,
                seed=cfg.seed,
            )
        except ModelValidationError as e:
            logger.warning(f"⚠ Generated instance failed validation (attempt {attempt + 1}): {e}")
            continue
        logger.success(f"✓ Generated {cfg.n_states}-state caIMDP (seed={cfg.seed}, eps={cfg.eps}, kappa={cfg.kappa})")
        return imdp
    raise GenerationError(f"no valid instance after {cfg.max_retries + 1} attempts")


def _suboptimality_pct(r_star: np.ndarray, r_s: np.ndarray) -> float:
    """100 * max_q (R*(q) - R_s(q)) / R*(q), skipping states with R*(q) = 0"""
    positive = r_star > 0
    if not positive.any():
        return 0.0
    return float(100.0 * np.max((r_star[positive] - r_s[positive]) / r_star[positive]))


def compare(
    imdp: Caimdp,
    sample_counts: Sequence[int] = DEFAULT_LADDER,
    repetitions: int = 5,
    horizon: int = 10,
    gamma: float = 1.0,
    seed: int = 0,
    cfg: Optional[OptimizerConfig] = None,
    settings: Optional[Settings] = None,
) -> ComparisonReport:
    """
    Continuous synthesis against value iteration on s uniformly sampled
    actions, for each s in sample_counts and each repetition.
    """
    settings = settings or get_settings()
    cfg = cfg or OptimizerConfig.from_settings(settings)
    sample_counts = [int(s) for s in sample_counts]
    if not sample_counts or min(sample_counts) < 1:
        raise InvalidArgumentError("sample counts must be positive")
    if repetitions < 1:
        raise InvalidArgumentError("repetitions must be positive")

    logger.info(f"📊 Comparing continuous synthesis against s = {sample_counts} ({repetitions} reps each)")
    start = time.thread_time()
    star = synthesize(imdp, horizon, gamma, cfg, settings)
    star_seconds = time.thread_time() - start
    r_star = np.asarray(star.v0)
    allowed = star.slack + 1e-9

    def run(task: Tuple[int, int]) -> Tuple[np.ndarray, float]:
        s, rep = task
        rng = derive_rng(seed, s, rep)
        actions = imdp.action_set.sample_uniform(rng, s)
        t0 = time.thread_time()
        report = discrete_vi(imdp, actions, horizon, gamma, settings)
        return np.asarray(report.v0), time.thread_time() - t0

    tasks = [(s, rep) for s in sample_counts for rep in range(repetitions)]
    progress = tqdm(total=len(tasks), desc="📊 Sampled VI", unit="run", ncols=100,
                    disable=not settings.show_progress)
    results: List[Tuple[np.ndarray, float]] = []
    with ThreadPoolExecutor(max_workers=max(1, settings.max_workers)) as pool:
        for result in pool.map(run, tasks):
            results.append(result)
            progress.update(1)
    progress.close()

    rows = [ComparisonRow(
        samples=None,
        label="continuous",
        repetitions=1,
        mean_cpu_seconds=star_seconds,
        mean_max_subopt_pct=0.0,
        max_ordering_violation=0.0,
    )]
    curves = {}
    violations = 0
    for i, s in enumerate(sample_counts):
        batch = results[i * repetitions:(i + 1) * repetitions]
        values = np.array([v for v, _ in batch])
        excess = values - r_star
        violations += int(np.sum(np.any(excess > allowed, axis=1)))
        rows.append(ComparisonRow(
            samples=s,
            label=f"s={s}",
            repetitions=repetitions,
            mean_cpu_seconds=float(np.mean([sec for _, sec in batch])),
            mean_max_subopt_pct=float(np.mean([_suboptimality_pct(r_star, v) for v in values])),
            max_ordering_violation=float(excess.max()),
        ))
        curves[str(s)] = values.mean(axis=0).tolist()
        logger.info(f"  s={s:>4}: mean max suboptimality {rows[-1].mean_max_subopt_pct:.2f}%")

    if violations:
        logger.warning(f"⚠ {violations} sampled runs beat the continuous value by more than the slack")
    return ComparisonReport(
        seed=seed,
        horizon=horizon,
        gamma=gamma,
        tolerance=cfg.tolerance,
        slack=star.slack,
        rows=rows,
        r_star=r_star.tolist(),
        r_s_curves=curves,
        ordering_violations=violations,
    )
