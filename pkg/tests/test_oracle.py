import numpy as np
import pytest

from app.action_sets import Box, cylinder
from app.bellman import discrete_vi
from app.caimdp import Caimdp
from app.errors import BudgetExceededError, CapabilityError, InvalidArgumentError
from app.inner_opt import IntervalSimplex
from app.oracle import oracle_backup, oracle_inner_min, oracle_synthesize
from tests.factories import degenerate_model, linear_model, random_values


def test_inner_minimum_on_a_hand_example():
    gamma = IntervalSimplex([0.1, 0.2, 0.3], [0.6, 0.5, 0.4])
    assert oracle_inner_min(gamma, [3.0, 1.0, 2.0]) == pytest.approx(1.6)


def test_inner_minimum_refuses_large_supports():
    n = 11
    gamma = IntervalSimplex(np.zeros(n), np.ones(n))
    with pytest.raises(BudgetExceededError):
        oracle_inner_min(gamma, np.arange(n, dtype=float))


def test_single_state_inner_minimum():
    assert oracle_inner_min(IntervalSimplex([1.0], [1.0]), [4.2]) == 4.2


def test_grid_contains_polytope_vertices(small_linear, rng):
    V = random_values(rng, 4)
    vertices = oracle_backup(small_linear, V, 1.0, mode="vertices")
    grid = oracle_backup(small_linear, V, 1.0, mode="grid", density=5)
    # Linear models peak at a vertex and every vertex is on the grid
    assert np.allclose(grid.values, vertices.values, atol=1e-12)
    assert grid.mesh == pytest.approx(np.sqrt(2) / 4)
    assert np.all(grid.lipschitz_slack >= 0)


def test_vertex_mode_needs_a_polytope(rng):
    model = linear_model(rng, 3, dim=3)
    model = Caimdp(3, cylinder(), model.lower, model.upper, model.reward)
    with pytest.raises(CapabilityError):
        oracle_backup(model, np.ones(3), 1.0, mode="vertices")


def test_grid_mode_limits(rng):
    model = linear_model(rng, 2, dim=4)
    with pytest.raises(CapabilityError):
        oracle_backup(model, np.ones(2), 1.0, mode="grid")
    small = linear_model(rng, 2, dim=1)
    with pytest.raises(InvalidArgumentError):
        oracle_backup(small, np.ones(2), 1.0, mode="grid", density=1)
    with pytest.raises(InvalidArgumentError):
        oracle_backup(small, np.ones(2), 1.0, mode="spiral")


def test_policy_enumeration_matches_dynamic_programming(rng, settings):
    model = linear_model(rng, 3, dim=1, action_set=Box([0.0], [1.0]))
    actions = [[0.0], [0.4], [1.0]]
    # 3^(3*2) = 729 policies
    brute = oracle_synthesize(model, actions, 2, 0.9)
    dp = discrete_vi(model, actions, 2, 0.9, settings)
    assert np.allclose(brute, dp.v0, atol=1e-12)


def test_policy_enumeration_budget(rng):
    model = linear_model(rng, 3, dim=1, action_set=Box([0.0], [1.0]))
    with pytest.raises(BudgetExceededError):
        oracle_synthesize(model, [[0.0], [1.0]], 4, 1.0, budget=1000)


def test_policy_enumeration_edge_cases(rng):
    model = degenerate_model(rng, 3)
    assert np.array_equal(oracle_synthesize(model, [[0.5]], 0, 1.0), model.reward)
    with pytest.raises(InvalidArgumentError):
        oracle_synthesize(model, [], 1, 1.0)
