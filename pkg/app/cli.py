"""Command-line front end: validate, synthesize, evaluate, discrete, bound, gen, compare"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import ValidationError

from app.bellman import MarkovPolicy, discrete_vi, evaluate_policy, optimistic_synthesize, suboptimality_bound, synthesize
from app.caimdp import default_validation_actions, validate_pointwise
from app.config.settings import Settings, ensure_directories, get_settings
from app.errors import CaimdpError, InvalidArgumentError, ModelParseError
from app.experiments import DEFAULT_LADDER, GeneratorConfig, compare, generate
from app.model_io import load_model, load_policy, save_model, save_policy
from app.optimizers import OptimizerConfig
from app.report_writer import ReportWriter
from app.utils import derive_rng


def configure_logging(settings: Settings):
    logger.remove()
    logger.add(sys.stderr, level=settings.log_level.upper(), serialize=settings.log_json)


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
        logger.success(f"💾 Wrote {out}")
    else:
        sys.stdout.write(text)


def _optimizer_config(args, settings: Settings) -> OptimizerConfig:
    try:
        return OptimizerConfig.from_settings(settings, tolerance=getattr(args, "tol", None),
                                             seed=getattr(args, "seed", None))
    except ValidationError as e:
        first = e.errors()[0]
        raise InvalidArgumentError(f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}") from e


def _parse_counts(text: str) -> List[int]:
    try:
        counts = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not counts or min(counts) < 1:
        raise argparse.ArgumentTypeError("sample counts must be positive")
    return counts


def _discrete_actions(spec: str, imdp, seed: int) -> np.ndarray:
    """vertices | sample:<s> | path to a JSON list of actions"""
    if spec == "vertices":
        return imdp.action_set.vertices()
    if spec.startswith("sample:"):
        try:
            count = int(spec.split(":", 1)[1])
        except ValueError:
            raise InvalidArgumentError(f"bad sample spec {spec!r}, expected sample:<count>")
        if count < 1:
            raise InvalidArgumentError("sample count must be positive")
        return imdp.action_set.sample_uniform(derive_rng(seed, count), count)
    with open(spec, "r", encoding="utf-8") as f:
        try:
            payload = json.load(f)
        except ValueError as e:
            raise ModelParseError(f"{spec}: expected a JSON list of actions ({e})", paths=["<root>"]) from e
    return imdp.action_array(payload)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args, settings: Settings, writer: ReportWriter) -> int:
    imdp = load_model(args.model, settings, validate=False)
    samples = args.samples or settings.validation_samples
    report = validate_pointwise(
        imdp, default_validation_actions(imdp.action_set, samples, settings.seed), settings.validation_tolerance
    )
    _emit(writer.to_json(report), None)
    if report.passed:
        logger.success(f"✓ Model valid on {report.n_actions} actions")
        return 0
    logger.error(f"✗ Worst interval violation {report.worst_violation:.3e}")
    return 1


def cmd_synthesize(args, settings: Settings, writer: ReportWriter) -> int:
    imdp = load_model(args.model, settings)
    solve = optimistic_synthesize if args.mode == "optimistic" else synthesize
    report = solve(imdp, args.horizon, args.gamma, _optimizer_config(args, settings), settings)
    _emit(writer.to_json(report), args.out)
    if args.policy_out:
        save_policy(report.policy, args.policy_out)
        logger.success(f"💾 Wrote policy {args.policy_out}")
    return 0


def cmd_evaluate(args, settings: Settings, writer: ReportWriter) -> int:
    imdp = load_model(args.model, settings)
    policy_file = load_policy(args.policy)
    policy = MarkovPolicy(policy_file.actions)
    values = evaluate_policy(imdp, policy, args.gamma, args.mode)
    _emit(writer.to_json({"mode": args.mode, "horizon": policy.horizon, "gamma": args.gamma,
                          "values": values.tolist()}), args.out)
    return 0


def cmd_discrete(args, settings: Settings, writer: ReportWriter) -> int:
    imdp = load_model(args.model, settings)
    actions = _discrete_actions(args.actions, imdp, args.seed if args.seed is not None else settings.seed)
    report = discrete_vi(imdp, actions, args.horizon, args.gamma, settings)
    _emit(writer.to_json(report), args.out)
    return 0


def cmd_bound(args, settings: Settings, writer: ReportWriter) -> int:
    model_lo = load_model(args.model_lo, settings)
    model_hi = load_model(args.model_hi, settings)
    report = suboptimality_bound(model_lo, model_hi, args.horizon, args.gamma, _optimizer_config(args, settings), settings)
    _emit(writer.to_json(report), args.out)
    return 0


def cmd_gen(args, settings: Settings, writer: ReportWriter) -> int:
    try:
        cfg = GeneratorConfig(n_states=args.states, seed=args.seed, eps=args.eps, kappa=args.kappa,
                              validation_samples=settings.validation_samples)
    except ValidationError as e:
        first = e.errors()[0]
        raise InvalidArgumentError(f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}") from e
    imdp = generate(cfg, settings)
    out = args.out
    if not out:
        ensure_directories()
        out = str(Path(settings.output_dir) / f"caimdp_{args.states}_seed{args.seed}.json")
    save_model(imdp, out)
    logger.success(f"💾 Saved model to {out}")
    sys.stdout.write(out + "\n")
    return 0


def cmd_compare(args, settings: Settings, writer: ReportWriter) -> int:
    imdp = load_model(args.model, settings)
    seed = args.seed if args.seed is not None else settings.seed
    report = compare(imdp, args.samples, args.reps, args.horizon, args.gamma, seed,
                     _optimizer_config(args, settings), settings)
    if args.out:
        paths = writer.export_comparison(report, args.out)
        logger.success(f"💾 Wrote {', '.join(paths)}")
    else:
        _emit(writer.to_json(report), None)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors also end with a JSON error line"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(_error_line("usage", message, prog=self.prog))
        self.exit(2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--timings", action="store_true", help="Include wall-clock fields in JSON output")
    common.add_argument("--workers", type=int, help="Worker threads for per-state backups and comparison runs")
    common.add_argument("--progress", action="store_true", help="Show progress bars")

    horizon = argparse.ArgumentParser(add_help=False)
    horizon.add_argument("--horizon", "-N", type=int, required=True, help="Horizon N >= 0")
    horizon.add_argument("--gamma", "-g", type=float, required=True, help="Reward factor gamma >= 0")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tol", type=float, help="Optimality tolerance (default 1e-4)")
    solver.add_argument("--seed", type=int, help="Seed for quasi-random starts and sampling")

    parser = _Parser(
        prog="caimdp",
        description="Robust controller synthesis for continuous-action interval MDPs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="Check interval consistency of a model file")
    p.add_argument("model")
    p.add_argument("--samples", type=int, help="Quasi-random actions to check (plus vertices)")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("synthesize", parents=[common, horizon, solver], help="Robust value iteration")
    p.add_argument("model")
    p.add_argument("--mode", choices=["pessimistic", "optimistic"], default="pessimistic")
    p.add_argument("--out", "-o", help="Report path (stdout when omitted)")
    p.add_argument("--policy-out", help="Also write the policy file")
    p.set_defaults(handler=cmd_synthesize)

    p = sub.add_parser("evaluate", parents=[common], help="Value of a fixed Markov policy")
    p.add_argument("model")
    p.add_argument("policy")
    p.add_argument("--mode", choices=["worst", "best"], default="worst")
    p.add_argument("--gamma", "-g", type=float, default=1.0)
    p.add_argument("--out", "-o")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("discrete", parents=[common, horizon, solver], help="Value iteration over a finite action list")
    p.add_argument("model")
    p.add_argument("--actions", default="vertices", help="vertices | sample:<s> | actions.json")
    p.add_argument("--out", "-o")
    p.set_defaults(handler=cmd_discrete)

    p = sub.add_parser("bound", parents=[common, horizon, solver], help="Optimistic minus pessimistic value")
    p.add_argument("model_lo", help="Model with inf-aggregated rewards")
    p.add_argument("model_hi", help="Model with sup-aggregated rewards")
    p.add_argument("--out", "-o")
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("gen", parents=[common], help="Generate a random concave/convex model")
    p.add_argument("--states", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--out", "-o", help="Model path (defaults to the output directory)")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("compare", parents=[common, horizon, solver], help="Continuous vs sampled-action synthesis")
    p.add_argument("model")
    p.add_argument("--samples", type=_parse_counts, default=list(DEFAULT_LADDER), help="e.g. 1,8,27,64,125")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", "-o", help="CSV path; curves CSV and JSON are written next to it")
    p.set_defaults(handler=cmd_compare)

    return parser


def _error_line(kind: str, message: str, **extra) -> str:
    return json.dumps({"error": kind, "message": message, **extra}) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one subcommand and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    settings = get_settings()
    updates = {}
    if args.workers:
        updates["max_workers"] = args.workers
    if args.progress:
        updates["show_progress"] = True
    if updates:
        settings = settings.model_copy(update=updates)
    configure_logging(settings)
    writer = ReportWriter(include_timings=args.timings)

    try:
        return args.handler(args, settings, writer)
    except CaimdpError as e:
        sys.stderr.write(_error_line(e.kind, str(e), **e.details()))
        return 1
    except OSError as e:
        sys.stderr.write(_error_line("io_error", str(e)))
        return 1
    except KeyboardInterrupt:
        logger.warning("Process interrupted by user")
        return 1


def main():
    sys.exit(run())
