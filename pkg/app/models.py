"""Pydantic models for model/policy files and solver reports"""
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field


# ---------------------------------------------------------------------------
# Model file schema
# ---------------------------------------------------------------------------

class AffineBoundSpec(BaseModel):
    """c^T a + d"""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["affine"]
    c: List[float]
    d: float


class QuadraticBoundSpec(BaseModel):
    """a^T H a + c^T a + d with a declared curvature"""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["quadratic"]
    H: List[List[float]]
    c: List[float]
    d: float
    shape: Literal["concave", "convex"]


BoundSpec = Annotated[Union[AffineBoundSpec, QuadraticBoundSpec], Field(discriminator="kind")]


class BoxSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["box"]
    lo: List[float] = Field(min_length=1)
    hi: List[float] = Field(min_length=1)


class BallSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["ball"]
    center: List[float] = Field(min_length=1)
    radius: float = Field(gt=0)


class PolytopeVSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["polytope_v"]
    vertices: List[List[float]] = Field(min_length=1)


class ProductSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["product"]
    factors: List["ActionSetSpec"] = Field(min_length=1)


ActionSetSpec = Annotated[
    Union[BoxSpec, BallSpec, ProductSpec, PolytopeVSpec],
    Field(discriminator="type"),
]
ProductSpec.model_rebuild()


class ModelFile(BaseModel):
    """Top-level caIMDP model file"""
    model_config = ConfigDict(extra="forbid")

    n_states: int = Field(gt=0)
    n_actions_dim: int = Field(gt=0)
    action_set: ActionSetSpec
    lower: List[List[BoundSpec]]
    upper: List[List[BoundSpec]]
    reward: List[float]


class PolicyFile(BaseModel):
    """Markov policy, actions indexed [t][q][dim]"""
    model_config = ConfigDict(extra="forbid")

    horizon: int = Field(ge=0)
    actions: List[List[List[float]]]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class ActionViolation(BaseModel):
    """Worst violation of each interval constraint at one action"""
    index: int
    ordering: float = Field(description="max(lower - upper)")
    lower_nonnegative: float = Field(description="max(-lower)")
    upper_at_most_one: float = Field(description="max(upper - 1)")
    lower_sum: float = Field(description="max over rows of sum(lower) - 1")
    upper_sum: float = Field(description="max over rows of 1 - sum(upper)")
    worst: float


class ValidationReport(BaseModel):
    n_actions: int
    tolerance: float
    passed: bool
    worst_violation: float
    violations: List[ActionViolation] = Field(default_factory=list)


class SolverStats(BaseModel):
    """Optimizer telemetry accumulated over backups"""
    optimizer_calls: int = 0
    nonconverged: int = 0
    max_certificate: float = Field(default=0.0, description="Largest residual / duality gap at termination")
    lp_pivots: int = 0

    def merge(self, other: "SolverStats") -> "SolverStats":
        return SolverStats(
            optimizer_calls=self.optimizer_calls + other.optimizer_calls,
            nonconverged=self.nonconverged + other.nonconverged,
            max_certificate=max(self.max_certificate, other.max_certificate),
            lp_pivots=self.lp_pivots + other.lp_pivots,
        )


class SynthesisReport(BaseModel):
    """Value functions V_0..V_N (values[k] = V_k), the Markov policy and telemetry"""
    mode: Literal["pessimistic", "optimistic", "discrete"]
    shape_class: str
    horizon: int
    gamma: float
    tolerance: float
    values: List[List[float]]
    policy: List[List[List[float]]] = Field(description="actions[t][q][dim]")
    slack: float = Field(description="Accumulated solver tolerance bound on V_0")
    certified: bool
    stats: SolverStats = Field(default_factory=SolverStats)
    iteration_seconds: List[float] = Field(default_factory=list)

    @property
    def v0(self) -> List[float]:
        return self.values[0]


class BoundReport(BaseModel):
    """Optimistic minus pessimistic value, per state"""
    horizon: int
    gamma: float
    optimistic: List[float]
    pessimistic: List[float]
    gaps: List[float]
    slack: float
    certified: bool


class ComparisonRow(BaseModel):
    samples: Optional[int] = Field(description="Sampled action count s; None for continuous synthesis")
    label: str
    repetitions: int
    mean_cpu_seconds: float
    mean_max_subopt_pct: float
    max_ordering_violation: float = Field(description="max over q, reps of R_s(q) - R_star(q)")


class ComparisonReport(BaseModel):
    seed: int
    horizon: int
    gamma: float
    tolerance: float
    slack: float
    rows: List[ComparisonRow]
    r_star: List[float]
    r_s_curves: Dict[str, List[float]] = Field(description="Mean R_s per state, keyed by s")
    ordering_violations: int = Field(description="Runs with R_s(q) > R_star(q) + slack for some q")
