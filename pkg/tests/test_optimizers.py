import numpy as np
import pytest

from app.action_sets import Ball, Box, PolytopeV, Product, cylinder
from app.bounds import AffineBound, QuadraticBound, Shape
from app.errors import CapabilityError
from app.optimizers import (
    OptimizerConfig,
    SmoothObjective,
    frank_wolfe_max,
    frank_wolfe_oracle_max,
    max_over_vertices,
    maximize_concave,
    project,
    project_simplex,
    projected_gradient_max,
)
from tests.factories import triangle


def concave_bowl(center, scale=1.0):
    """-scale * |a - center|^2"""
    center = np.asarray(center, dtype=float)
    d = center.size
    return SmoothObjective.from_bound(
        QuadraticBound(-scale * np.eye(d), 2.0 * scale * center, -scale * center @ center, Shape.CONCAVE)
    )


def random_concave_quadratic(rng, dim):
    """-(a - c)' M (a - c) with M positive definite and c around the unit box"""
    B = rng.normal(size=(dim, dim))
    S = B.T @ B
    M = 0.5 * (S + S.T) / dim + 0.2 * np.eye(dim)
    c = rng.uniform(-0.5, 1.5, dim)
    bound = QuadraticBound(-M, 2.0 * M @ c, -c @ M @ c, Shape.CONCAVE)
    return SmoothObjective.from_bound(bound), bound


def cylinder_grid(density):
    """Lattice points of the default cylinder"""
    r = np.sqrt(0.2)
    disk = np.linspace(0.5 - r, 0.5 + r, density)
    points = np.stack(np.meshgrid(disk, disk, np.linspace(0.0, 1.0, density), indexing="ij"), axis=-1).reshape(-1, 3)
    return points[(points[:, 0] - 0.5) ** 2 + (points[:, 1] - 0.5) ** 2 <= 0.2]


def test_vertex_maximum_breaks_ties_by_index():
    f = SmoothObjective.from_bound(AffineBound([1.0, 0.0], 0.0))
    result = max_over_vertices(f, Box([0, 0], [1, 1]).vertices())
    assert result.value == 1.0
    assert result.x.tolist() == [1.0, 0.0]


def test_affine_over_polytope_equals_dense_combinations(rng):
    points = rng.uniform(-1, 1, size=(6, 3))
    f = SmoothObjective.from_bound(AffineBound(rng.normal(size=3), 0.2))
    result = max_over_vertices(f, points)
    weights = rng.dirichlet(np.ones(6), size=100_000)
    sampled = (weights @ points) @ f.gradient(points[0]) + 0.2
    assert result.value >= sampled.max() - 1e-12


def test_projected_gradient_finds_interior_maximum(cfg):
    result = projected_gradient_max(concave_bowl([0.3, 0.6]), Box([0, 0], [1, 1]), cfg)
    assert result.converged
    assert np.allclose(result.x, [0.3, 0.6], atol=1e-5)


def test_projected_gradient_boundary_maximum_on_ball(cfg):
    ball = Ball([0.0, 0.0], 1.0)
    result = projected_gradient_max(concave_bowl([2.0, 0.0]), ball, cfg)
    assert np.allclose(result.x, [1.0, 0.0], atol=1e-5)
    assert ball.contains(result.x)


def test_projected_gradient_is_monotone(cfg):
    f = concave_bowl([0.9, 0.1], scale=5.0)
    box = Box([0, 0], [1, 1])
    one_step = projected_gradient_max(f, box, cfg.model_copy(update={"max_iterations": 1, "multistart": 1}))
    full = projected_gradient_max(f, box, cfg.model_copy(update={"multistart": 1}))
    assert full.value >= one_step.value - 1e-15


def test_projected_gradient_rejects_convex_objective(cfg):
    convex = SmoothObjective.from_bound(QuadraticBound(np.eye(2), [0, 0], 0.0, Shape.CONVEX))
    with pytest.raises(CapabilityError):
        projected_gradient_max(convex, Box([0, 0], [1, 1]), cfg)


def test_projected_gradient_needs_projection(cfg):
    with pytest.raises(CapabilityError):
        projected_gradient_max(concave_bowl([0.2, 0.2]), triangle(), cfg)


def test_frank_wolfe_over_triangle(cfg):
    f = concave_bowl([0.2, 0.3])
    result = frank_wolfe_max(f, triangle().vertices(), cfg)
    assert np.allclose(result.x, [0.2, 0.3], atol=1e-3)
    assert 0.0 - result.value <= result.certificate + 1e-12


def test_frank_wolfe_gap_bounds_suboptimality():
    f = concave_bowl([0.8, 0.7], scale=3.0)
    poly = PolytopeV([[0, 0], [1, 0], [1, 1], [0, 1]])
    loose = OptimizerConfig(tolerance=1e-2, max_iterations=3)
    result = frank_wolfe_max(f, poly.vertices(), loose)
    # Optimum inside the square is the bowl's center, value 0
    assert 0.0 - result.value <= result.certificate + 1e-12


def test_frank_wolfe_with_linear_oracle_on_ball_times_polytope(cfg):
    product = Product((Ball([0.0], 1.0), triangle()))
    assert not product.supports_projection
    f = concave_bowl([0.5, 0.25, 0.25])
    result = maximize_concave(f, product, cfg)
    assert result.method == "frank_wolfe"
    assert np.allclose(result.x, [0.5, 0.25, 0.25], atol=1e-3)


def test_dispatch_routes_linear_objectives(cfg):
    linear = SmoothObjective.from_bound(AffineBound([1.0, 1.0, 0.0], 0.0))
    assert maximize_concave(linear, Box([0, 0, 0], [1, 1, 1]), cfg).method == "vertices"
    result = maximize_concave(linear, cylinder(), cfg)
    assert result.method == "linear_oracle"
    assert result.value == pytest.approx(1.0 + np.sqrt(0.4))


def test_dispatch_uses_projection_on_cylinder(cfg):
    result = maximize_concave(concave_bowl([0.5, 0.5, 2.0]), cylinder(), cfg)
    assert result.method == "projected_gradient"
    assert np.allclose(result.x, [0.5, 0.5, 1.0], atol=1e-5)


def test_simplex_projection():
    w = project_simplex(np.array([0.5, 0.5, 0.5]))
    assert np.allclose(w, [1 / 3, 1 / 3, 1 / 3])
    w = project_simplex(np.array([2.0, -1.0]))
    assert np.allclose(w, [1.0, 0.0])
    assert project_simplex(np.array([0.2, 0.8])).tolist() == [0.2, 0.8]


def test_project_helper_clamps_and_needs_an_oracle():
    assert project(Box([0, 0], [1, 1]), [1.5, -0.2]).tolist() == [1.0, 0.0]
    assert project(Box([0, 0], [1, 1]), [0.25, 0.75]).tolist() == [0.25, 0.75]
    with pytest.raises(CapabilityError):
        project(triangle(), [0.2, 0.2])


def test_cylinder_projection_is_the_nearest_point(rng):
    cyl = cylinder()
    points = cylinder_grid(41)
    for x in rng.uniform(-1.0, 2.0, size=(25, 3)):
        p = project(cyl, x)
        assert cyl.contains(p)
        nearest = np.linalg.norm(points - x, axis=1).min()
        assert np.linalg.norm(p - x) <= nearest + 1e-12
    inside = points[rng.integers(0, len(points), 10)]
    assert all(np.allclose(project(cyl, x), x, atol=1e-15) for x in inside)


@pytest.mark.parametrize("seed", range(4))
def test_projected_gradient_on_cylinder_beats_a_fine_grid(seed, cfg):
    f, bound = random_concave_quadratic(np.random.default_rng(seed), 3)
    result = projected_gradient_max(f, cylinder(), cfg)
    assert cylinder().contains(result.x)
    assert result.value >= bound.value_batch(cylinder_grid(61)).max() - 1e-6


@pytest.mark.parametrize("seed", range(8))
def test_frank_wolfe_agrees_with_projected_gradient_on_box(seed, cfg):
    f, _ = random_concave_quadratic(np.random.default_rng(seed), 3)
    box = Box(np.zeros(3), np.ones(3))
    fw = frank_wolfe_max(f, box.vertices(), OptimizerConfig(tolerance=1e-4))
    pga = projected_gradient_max(f, box, cfg)
    assert fw.converged
    assert abs(fw.value - pga.value) <= 2e-4


def test_frank_wolfe_on_a_linear_objective_takes_one_step():
    f = SmoothObjective.from_bound(AffineBound([3.0, 4.0], 0.5))
    ball = Ball([0.0, 0.0], 1.0)
    result = frank_wolfe_oracle_max(f, ball.linear_max, ball.interior_point(), OptimizerConfig(tolerance=1e-9))
    assert result.converged
    assert result.iterations == 2
    assert result.certificate <= 1e-12
    assert result.value == pytest.approx(5.5, abs=1e-12)


def test_vertex_frank_wolfe_on_a_linear_objective_ends_at_a_vertex():
    f = SmoothObjective.from_bound(AffineBound([0.3, -0.7], 0.1))
    result = frank_wolfe_max(f, triangle().vertices(), OptimizerConfig(tolerance=1e-9))
    assert result.converged
    assert result.certificate <= 1e-12
    assert np.allclose(result.x, [1.0, 0.0], atol=1e-12)
    assert result.iterations <= 4


def test_away_steps_converge_on_a_face_optimum():
    # Maximizer (1, 0.5) sits on the right edge of the square
    f = concave_bowl([1.3, 0.5], scale=2.0)
    square = PolytopeV([[0, 0], [1, 0], [1, 1], [0, 1]])
    result = frank_wolfe_max(f, square.vertices(), OptimizerConfig(tolerance=1e-6, max_iterations=5000))
    assert result.converged
    assert result.iterations < 500
    assert np.allclose(result.x, [1.0, 0.5], atol=1e-3)
    assert result.value >= -0.18 - 1e-6
