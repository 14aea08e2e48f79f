import csv
import json

import numpy as np
import pytest
from pydantic import ValidationError

import app.experiments as experiments
from app.bellman import synthesize
from app.caimdp import ShapeClass, check_model, classify
from app.errors import GenerationError, InvalidArgumentError, ModelValidationError
from app.experiments import GeneratorConfig, compare, generate
from app.model_io import model_to_spec
from app.report_writer import ReportWriter
from tests.factories import concave_convex_model


# ---------------------------------------------------------------------------
# Generator
# ---------------------------------------------------------------------------

def test_default_generator_builds_a_valid_concave_convex_model(settings):
    imdp = generate(GeneratorConfig(n_states=5, seed=1, validation_samples=64), settings)
    assert imdp.action_dim == 3
    assert classify(imdp) == ShapeClass.CONCAVE_CONVEX
    assert check_model(imdp, n_samples=64).passed


def test_zero_width_intervals_are_a_fixed_chain(settings, rng):
    imdp = generate(GeneratorConfig(n_states=4, eps=0.0, seed=2, validation_samples=32), settings)
    for a in imdp.action_set.sample_uniform(rng, 5):
        lo, hi = imdp.evaluate(a)
        assert np.array_equal(lo, hi)
        assert np.allclose(lo.sum(axis=1), 1.0)


def test_single_state_upper_bound_stays_at_one(settings, rng):
    imdp = generate(GeneratorConfig(n_states=1, eps=0.4, seed=0, validation_samples=32), settings)
    for a in imdp.action_set.sample_uniform(rng, 10):
        lo, hi = imdp.evaluate(a)
        assert hi[0, 0] == pytest.approx(1.0)
        assert lo[0, 0] <= 1.0


def test_generation_is_deterministic_per_seed(settings):
    cfg = GeneratorConfig(n_states=4, seed=9, validation_samples=32)
    first, second = generate(cfg, settings), generate(cfg, settings)
    assert model_to_spec(first) == model_to_spec(second)
    other = generate(cfg.model_copy(update={"seed": 10}), settings)
    assert model_to_spec(other) != model_to_spec(first)


@pytest.mark.parametrize("field, value", [("eps", 0.5), ("eps", -0.1), ("kappa", 1.5), ("n_states", 0)])
def test_generator_config_ranges(field, value):
    with pytest.raises(ValidationError):
        GeneratorConfig(**{field: value})


def test_generation_gives_up_after_retries(settings, monkeypatch):
    calls = []

    def always_fail(imdp, **kwargs):
        calls.append(1)
        raise ModelValidationError("forced failure")

    monkeypatch.setattr(experiments, "check_model", always_fail)
    with pytest.raises(GenerationError):
        generate(GeneratorConfig(n_states=2, max_retries=3), settings)
    assert len(calls) == 4


# ---------------------------------------------------------------------------
# Continuous vs sampled comparison
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def tiny_model():
    return concave_convex_model(seed=5, n=3)


def test_comparison_rows_and_ordering(tiny_model, settings):
    report = compare(tiny_model, [1, 4], repetitions=2, horizon=3, gamma=1.0, seed=7, settings=settings)
    assert [row.label for row in report.rows] == ["continuous", "s=1", "s=4"]
    continuous = report.rows[0]
    assert continuous.samples is None
    assert continuous.mean_max_subopt_pct == 0.0
    assert report.ordering_violations == 0
    assert all(row.max_ordering_violation <= report.slack + 1e-9 for row in report.rows[1:])
    assert set(report.r_s_curves) == {"1", "4"}
    assert all(len(curve) == 3 for curve in report.r_s_curves.values())
    star = synthesize(tiny_model, 3, 1.0, settings=settings)
    assert np.allclose(report.r_star, star.v0)


def test_comparison_is_reproducible(tiny_model, settings):
    writer = ReportWriter()
    first = compare(tiny_model, [2, 3], repetitions=2, horizon=2, seed=1, settings=settings)
    parallel = compare(tiny_model, [2, 3], repetitions=2, horizon=2, seed=1,
                       settings=settings.model_copy(update={"max_workers": 3}))
    assert writer.to_json(first) == writer.to_json(parallel)


def test_comparison_rejects_bad_ladders(tiny_model, settings):
    with pytest.raises(InvalidArgumentError):
        compare(tiny_model, [], settings=settings)
    with pytest.raises(InvalidArgumentError):
        compare(tiny_model, [0, 4], settings=settings)
    with pytest.raises(InvalidArgumentError):
        compare(tiny_model, [1], repetitions=0, settings=settings)


# ---------------------------------------------------------------------------
# Report writer
# ---------------------------------------------------------------------------

def test_timings_are_excluded_by_default(small_linear, settings):
    report = synthesize(small_linear, 2, 1.0, settings=settings)
    assert "iteration_seconds" not in json.loads(ReportWriter().to_json(report))
    timed = json.loads(ReportWriter(include_timings=True).to_json(report))
    assert len(timed["iteration_seconds"]) == 2


def test_comparison_export_files(tiny_model, settings, tmp_path):
    report = compare(tiny_model, [1, 2], repetitions=1, horizon=2, settings=settings)
    paths = ReportWriter().export_comparison(report, str(tmp_path / "cmp.csv"))
    assert paths == [str(tmp_path / "cmp.csv"), str(tmp_path / "cmp_curves.csv"), str(tmp_path / "cmp.json")]

    with open(paths[0], newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["s", "mean_cpu_seconds", "mean_max_subopt_pct"]
    assert [r[0] for r in rows[1:]] == ["continuous", "1", "2"]
    assert all(float(r[1]) >= 0.0 for r in rows[1:])

    with open(paths[1], newline="", encoding="utf-8") as f:
        curves = list(csv.reader(f))
    assert curves[0] == ["state", "R_star", "R_s1", "R_s2"]
    assert len(curves) == 4

    data = json.loads((tmp_path / "cmp.json").read_text(encoding="utf-8"))
    assert "mean_cpu_seconds" not in data["rows"][0]


@pytest.mark.slow
def test_default_ladder_on_a_full_size_instance(settings):
    imdp = generate(GeneratorConfig(seed=0), settings)
    report = compare(imdp, experiments.DEFAULT_LADDER, repetitions=5, horizon=10, gamma=1.0, seed=0,
                     settings=settings)
    assert report.ordering_violations == 0
    for row in report.rows[1:]:
        assert row.max_ordering_violation <= 10 * 1e-4
    means = [row.mean_max_subopt_pct for row in report.rows[1:]]
    inversions = [later - earlier for earlier, later in zip(means, means[1:]) if later > earlier]
    assert len(inversions) <= 1
    assert all(step <= 0.5 for step in inversions)
