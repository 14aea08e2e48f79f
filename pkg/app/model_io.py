"""Read and write caIMDP model files and Markov policy files (JSON, UTF-8)"""
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError

from app.action_sets import ActionSet, Ball, Box, PolytopeV, Product
from app.bounds import AffineBound, BoundFunction, QuadraticBound
from app.caimdp import Caimdp, check_model
from app.config.settings import Settings, get_settings
from app.errors import CapabilityError, ModelParseError, ModelValidationError
from app.models import (
    AffineBoundSpec,
    BallSpec,
    BoxSpec,
    ModelFile,
    PolicyFile,
    PolytopeVSpec,
    ProductSpec,
    QuadraticBoundSpec,
)


PathLike = Union[str, Path]


def _parse(schema: type[BaseModel], path: PathLike) -> BaseModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return schema.model_validate_json(text)
    except ValidationError as e:
        paths = [".".join(str(part) for part in err["loc"]) or "<root>" for err in e.errors()]
        first = e.errors()[0]
        raise ModelParseError(f"{path}: {paths[0]}: {first['msg']}", paths=paths) from e


# ---------------------------------------------------------------------------
# spec -> domain
# ---------------------------------------------------------------------------

def action_set_from_spec(spec) -> ActionSet:
    if isinstance(spec, BoxSpec):
        return Box(spec.lo, spec.hi)
    if isinstance(spec, BallSpec):
        return Ball(spec.center, spec.radius)
    if isinstance(spec, PolytopeVSpec):
        lengths = {len(v) for v in spec.vertices}
        if len(lengths) != 1:
            raise ModelValidationError("polytope vertices must share one dimension")
        return PolytopeV(spec.vertices)
    return Product(tuple(action_set_from_spec(f) for f in spec.factors))


def bound_from_spec(spec) -> BoundFunction:
    if isinstance(spec, AffineBoundSpec):
        return AffineBound(spec.c, spec.d)
    return QuadraticBound(spec.H, spec.c, spec.d, spec.shape)


def model_from_spec(spec: ModelFile) -> Caimdp:
    action_set = action_set_from_spec(spec.action_set)
    if action_set.dim != spec.n_actions_dim:
        raise ModelValidationError(
            f"n_actions_dim is {spec.n_actions_dim} but the action set has dimension {action_set.dim}"
        )
    lower = [[bound_from_spec(b) for b in row] for row in spec.lower]
    upper = [[bound_from_spec(b) for b in row] for row in spec.upper]
    return Caimdp(spec.n_states, action_set, lower, upper, np.asarray(spec.reward, dtype=float))


# ---------------------------------------------------------------------------
# domain -> spec
# ---------------------------------------------------------------------------

def action_set_to_spec(action_set: ActionSet):
    if isinstance(action_set, Box):
        return BoxSpec(type="box", lo=action_set.lo.tolist(), hi=action_set.hi.tolist())
    if isinstance(action_set, Ball):
        return BallSpec(type="ball", center=action_set.center.tolist(), radius=action_set.radius)
    if isinstance(action_set, PolytopeV):
        return PolytopeVSpec(type="polytope_v", vertices=action_set.points.tolist())
    if isinstance(action_set, Product):
        return ProductSpec(type="product", factors=[action_set_to_spec(f) for f in action_set.factors])
    raise CapabilityError(f"cannot serialize action set {type(action_set).__name__}")


def bound_to_spec(bound: BoundFunction):
    if isinstance(bound, AffineBound):
        return AffineBoundSpec(kind="affine", c=bound.c.tolist(), d=bound.d)
    if isinstance(bound, QuadraticBound):
        return QuadraticBoundSpec(
            kind="quadratic", H=bound.H.tolist(), c=bound.c.tolist(), d=bound.d, shape=bound.shape.value
        )
    raise CapabilityError("opaque bound functions are not serializable")


def model_to_spec(imdp: Caimdp) -> ModelFile:
    return ModelFile(
        n_states=imdp.n_states,
        n_actions_dim=imdp.action_dim,
        action_set=action_set_to_spec(imdp.action_set),
        lower=[[bound_to_spec(b) for b in row] for row in imdp.lower],
        upper=[[bound_to_spec(b) for b in row] for row in imdp.upper],
        reward=imdp.reward.tolist(),
    )


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def load_model(path: PathLike, settings: Optional[Settings] = None, validate: bool = True) -> Caimdp:
    """Parse, build and (by default) sample-validate a model file"""
    settings = settings or get_settings()
    spec = _parse(ModelFile, path)
    imdp = model_from_spec(spec)
    if validate:
        check_model(
            imdp,
            n_samples=settings.validation_samples,
            tolerance=settings.validation_tolerance,
            chords=settings.shape_check_chords,
            shape_tolerance=settings.shape_check_tolerance,
            seed=settings.seed,
        )
    logger.info(f"📖 Loaded {imdp.n_states}-state model with {imdp.action_dim}-d actions from {path}")
    return imdp


def save_model(imdp: Caimdp, path: PathLike) -> str:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(model_to_spec(imdp).model_dump_json(indent=2), encoding="utf-8")
    return str(path)


def load_policy(path: PathLike) -> PolicyFile:
    policy = _parse(PolicyFile, path)
    if len(policy.actions) != policy.horizon:
        raise ModelParseError(
            f"{path}: policy lists {len(policy.actions)} steps but horizon is {policy.horizon}",
            paths=["actions"],
        )
    return policy


def save_policy(actions: List[List[List[float]]], path: PathLike) -> str:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    policy = PolicyFile(horizon=len(actions), actions=actions)
    Path(path).write_text(policy.model_dump_json(indent=2), encoding="utf-8")
    return str(path)
