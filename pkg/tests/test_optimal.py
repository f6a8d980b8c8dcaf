import numpy as np
import pytest

from lvcontrol.model import Parameters, coexistence_state, max_stable_dt
from lvcontrol.optimal import (CheckpointError, TrackingProblem, adjoint_gradient, resimulate, solve_tracking,
                               turnpike_fraction)
from lvcontrol.solver import Grid


def fd_gradient(problem, c, eps=1e-4):
    g = np.zeros_like(c)
    for idx in np.ndindex(*c.shape):
        cp, cm = c.copy(), c.copy()
        cp[idx] += eps
        cm[idx] -= eps
        g[idx] = (problem.objective(cp) - problem.objective(cm)) / (2 * eps)
    return g


def random_problem(rng, n=20, steps=50):
    p = Parameters(*rng.uniform(0.01, 0.2, 2), 1.0, 0.8, 0.7, 1.0)
    dt = 0.9 * max_stable_dt(p)
    u0, v0 = rng.uniform(0, 1, n + 2), rng.uniform(0, 1, n + 2)
    problem = TrackingProblem(u0, v0, p, Grid(1.0, n), (0.4, 0.6), steps * dt, dt, 1.0, 0.5)
    c = rng.uniform(0.1, 0.9, (steps, 4)) * np.array([1, 1, p.a, p.a])
    return problem, c


def test_adjoint_matches_finite_differences(rng):
    problem, c = random_problem(rng, n=8, steps=6)
    g = adjoint_gradient(c, problem)
    fd = fd_gradient(problem, c)
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-10)


def test_zero_weights_zero_gradient(rng):
    problem, c = random_problem(rng, n=8, steps=5)
    problem.w_terminal = problem.w_running = 0.0
    assert np.all(problem.gradient(c) == 0.0)
    assert problem.objective(c) == 0.0


def test_projection_onto_box(coex_params):
    problem = TrackingProblem(0.5, 0.5, coex_params, Grid(1.0, 5), (0.4, 0.6), 0.1, 0.01)
    c = np.array([[-1, 2, 0.5, 3.0]] * problem.steps)
    np.testing.assert_array_equal(problem.project(c)[0], [0, 1, 0.5, 1.0])


def test_control_shape_checked(coex_params):
    problem = TrackingProblem(0.5, 0.5, coex_params, Grid(1.0, 5), (0.4, 0.6), 0.1, 0.01)
    with pytest.raises(CheckpointError):
        problem.forward(np.zeros((3, 4)))


def test_turnpike_fraction_definition():
    c = np.tile([0.45, 0.45, 0.68, 0.68], (10, 1))
    assert turnpike_fraction(c, (0.45, 0.68)) == 1.0
    c[:3, 0] = 0.0
    assert turnpike_fraction(c, (0.45, 0.68)) == pytest.approx(0.7)
    assert turnpike_fraction(np.zeros((0, 4)), (0.45, 0.68)) == 0.0


def test_tracking_monotone_box_and_consistent(coex_params):
    grid = Grid(1.0, 20)
    target = (0.4, 0.6)
    res = solve_tracking(0.2, 0.5, coex_params, grid, target, 2.0, 0.05, max_iters=30)
    assert np.all(np.diff(res.objective_history) <= 0)
    c = res.control
    assert np.all(c >= 0) and np.all(c[:, :2] <= 1) and np.all(c[:, 2:] <= coex_params.a)
    err = resimulate(res, 0.2, 0.5, coex_params, grid, 0.05, target)
    assert abs(err - res.terminal_error) <= 1e-12
    assert res.objective_history[-1] < res.objective_history[0]


def test_already_at_target(coex_params):
    s = coexistence_state(coex_params)
    res = solve_tracking(s.u_star, s.v_star, coex_params, Grid(1.0, 10), (s.u_star, s.v_star), 1.0, 0.05,
                         initial_control=[s.u_star, s.u_star, s.v_star, s.v_star], max_iters=5)
    assert res.objective_history[0] <= 1e-25
    assert res.turnpike_fraction == 1.0
