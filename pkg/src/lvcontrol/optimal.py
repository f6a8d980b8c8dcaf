"""Box-constrained optimal boundary control by discrete adjoint and projected gradient.

Controls are piecewise constant per time step: row k of the control array
holds the boundary values used by step k -> k+1. The objective is

    J = w_T * q(z^N) + w_r * dt * sum_{k=1..N} q(z^k),

where q is the trapezoid-weighted squared L2 distance of the full-grid state
(boundary nodes included) to the target. The gradient is the exact
derivative of this discrete J through the IMEX scheme.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import Parameters, coexistence_state
from .solver import (FieldPair, Grid, SampledControl, Stepper, Trajectory, as_target, check_box, fmt,
                     n_steps, uniform_field)

log = logging.getLogger(__name__)

TURNPIKE_BAND = 0.05


class CheckpointError(ValueError):
    pass


class TrackingProblem:
    def __init__(self, u0, v0, p: Parameters, grid: Grid, target, horizon: float, dt: float,
                 w_terminal: float = 1.0, w_running: float = 1.0):
        self.p, self.grid, self.dt = p, grid, dt
        self.steps = n_steps(horizon, dt)
        self.horizon = self.steps * dt
        self.u0 = uniform_field(u0, grid)
        self.v0 = uniform_field(v0, grid)
        check_box(self.u0, self.v0, p, what="initial data")
        self.target = as_target(target, grid)
        self.w_terminal, self.w_running = float(w_terminal), float(w_running)
        self.stepper = Stepper(p, grid, dt)
        h = grid.h
        self.omega = np.full(grid.n + 2, h)
        self.omega[0] = self.omega[-1] = 0.5 * h
        self.lower = np.zeros(4)
        self.upper = np.array([1.0, 1.0, p.a, p.a])

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, self.steps + 1)

    def project(self, control: np.ndarray) -> np.ndarray:
        return np.clip(control, self.lower, self.upper)

    def weight(self, k: int) -> float:
        w = self.w_running * self.dt
        if k == self.steps:
            w += self.w_terminal
        return w

    def forward(self, control: np.ndarray):
        control = np.asarray(control, dtype=float)
        if control.shape != (self.steps, 4):
            raise CheckpointError(f"control shape {control.shape} != ({self.steps}, 4)")
        us = np.empty((self.steps + 1, self.grid.n + 2))
        vs = np.empty_like(us)
        us[0], vs[0] = self.u0, self.v0
        for k in range(self.steps):
            us[k + 1], vs[k + 1] = self.stepper.step(us[k], vs[k], control[k])
        return us, vs

    def objective(self, control=None, states=None) -> float:
        us, vs = states if states is not None else self.forward(control)
        eu = us[1:] - self.target.u
        ev = vs[1:] - self.target.v
        q = (eu**2 + ev**2) @ self.omega
        w = np.full(self.steps, self.w_running * self.dt)
        w[-1] += self.w_terminal
        return float(w @ q)

    def gradient(self, control: np.ndarray, states=None) -> np.ndarray:
        """Exact gradient of the discrete objective (backward sweep over stored states)."""
        us, vs = states if states is not None else self.forward(control)
        if us.shape[0] != self.steps + 1:
            raise CheckpointError("stored trajectory does not match the control horizon")
        st, p, dt = self.stepper, self.p, self.dt
        om = self.omega
        grad = np.zeros((self.steps, 4))
        N = self.steps
        eu = us[N] - self.target.u
        ev = vs[N] - self.target.v
        lam_u = 2.0 * self.weight(N) * om[1:-1] * eu[1:-1]
        lam_v = 2.0 * self.weight(N) * om[1:-1] * ev[1:-1]
        for k in range(N, 0, -1):
            wk = self.weight(k)
            eu = us[k] - self.target.u
            ev = vs[k] - self.target.v
            pu = st.m1.solve(lam_u, transpose=True)
            pv = st.m2.solve(lam_v, transpose=True)
            grad[k - 1, 0] = st.r1 * pu[0] + 2.0 * wk * om[0] * eu[0]
            grad[k - 1, 1] = st.r1 * pu[-1] + 2.0 * wk * om[-1] * eu[-1]
            grad[k - 1, 2] = st.r2 * pv[0] + 2.0 * wk * om[0] * ev[0]
            grad[k - 1, 3] = st.r2 * pv[-1] + 2.0 * wk * om[-1] * ev[-1]
            if k == 1:
                break
            u, v = us[k - 1][1:-1], vs[k - 1][1:-1]
            fu = 1.0 - 2.0 * u - p.k1 * v
            fv = -p.k1 * u
            gu = -p.k2 * v
            gv = p.a - 2.0 * v - p.k2 * u
            wprev = self.weight(k - 1)
            eu_prev = us[k - 1][1:-1] - self.target.u[1:-1]
            ev_prev = vs[k - 1][1:-1] - self.target.v[1:-1]
            lam_u = 2.0 * wprev * om[1:-1] * eu_prev + (1.0 + dt * fu) * pu + dt * gu * pv
            lam_v = 2.0 * wprev * om[1:-1] * ev_prev + dt * fv * pu + (1.0 + dt * gv) * pv
        return grad

    def trajectory(self, control: np.ndarray, states=None) -> Trajectory:
        us, vs = states if states is not None else self.forward(control)
        return Trajectory(x=self.grid.x, times=self.dt * np.arange(self.steps + 1), u=us, v=vs,
                          control_times=self.times, controls=np.array(control, dtype=float))


def adjoint_gradient(control: np.ndarray, problem: TrackingProblem) -> np.ndarray:
    return problem.gradient(control)


@dataclass
class OptimizationResult:
    control: np.ndarray
    control_times: np.ndarray
    objective_history: list
    grad_norm_history: list
    final_gradient_norm: float
    terminal_error: float
    turnpike_fraction: Optional[float]
    iterations: int
    converged: bool
    line_search_failed: bool = False
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    def write_history_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "J", "grad_norm"])
            for i, (J, g) in enumerate(zip(self.objective_history, self.grad_norm_history)):
                w.writerow([i, fmt(J), fmt(g)])


def projected_gradient(problem: TrackingProblem, control: np.ndarray, max_iters: int = 200,
                       gtol: float = 1e-10, ftol: float = 1e-14, armijo: float = 1e-4,
                       max_backtracks: int = 40):
    """Projected gradient descent with Armijo backtracking.

    The trial step is seeded with the Barzilai-Borwein length of the previous
    iterate. Returns (control, states, history, grad_norms, converged, failed).
    """
    c = problem.project(np.array(control, dtype=float))
    states = problem.forward(c)
    J = problem.objective(states=states)
    g = problem.gradient(c, states)
    history, gnorms = [J], []
    alpha = None
    converged = failed = False
    for it in range(max_iters):
        pg = problem.project(c - g) - c
        gnorm = float(np.sqrt(np.sum(pg**2)))
        gnorms.append(gnorm)
        if gnorm <= gtol:
            converged = True
            break
        if alpha is None:
            alpha = 1.0 / max(float(np.max(np.abs(g))), 1e-300)
        for _ in range(max_backtracks):
            c_new = problem.project(c - alpha * g)
            step = c_new - c
            states_new = problem.forward(c_new)
            J_new = problem.objective(states=states_new)
            if J_new <= J + armijo * float(np.sum(g * step)):
                break
            alpha *= 0.5
        else:
            failed = True
            log.warning("line search failed after %d backtracks (J=%.6e)", max_backtracks, J)
            break
        g_new = problem.gradient(c_new, states_new)
        s, y = c_new - c, g_new - g
        sy = float(np.sum(s * y))
        rel = (J - J_new) / max(abs(J), 1e-300)
        c, g, J, states = c_new, g_new, J_new, states_new
        history.append(J)
        if J > history[-2]:
            raise RuntimeError("objective increased after an accepted step")
        alpha = float(np.sum(s * s)) / sy if sy > 0 else 2.0 * alpha
        if rel <= ftol:
            converged = True
            break
    else:
        pg = problem.project(c - g) - c
        gnorms.append(float(np.sqrt(np.sum(pg**2))))
    if len(gnorms) < len(history):
        pg = problem.project(c - g) - c
        gnorms.append(float(np.sqrt(np.sum(pg**2))))
    return c, states, history, gnorms, converged, failed


def _result(problem: TrackingProblem, c, states, history, gnorms, converged, failed) -> OptimizationResult:
    us, vs = states
    terminal = float(max(np.max(np.abs(us[-1] - problem.target.u)),
                         np.max(np.abs(vs[-1] - problem.target.v))))
    traj = problem.trajectory(c, states)
    result = OptimizationResult(
        control=c, control_times=problem.times, objective_history=history, grad_norm_history=gnorms,
        final_gradient_norm=gnorms[-1], terminal_error=terminal, turnpike_fraction=None,
        iterations=len(history) - 1, converged=converged, line_search_failed=failed, trajectory=traj,
    )
    tu, tv = problem.target.u, problem.target.v
    if np.ptp(tu) == 0 and np.ptp(tv) == 0:
        result.turnpike_fraction = turnpike_fraction(c, (tu[0], tv[0]))
    return result


def solve_tracking(u0, v0, p: Parameters, grid: Grid, target, horizon: float, dt: float,
                   w_terminal: float = 1.0, w_running: float = 1.0, max_iters: int = 200,
                   initial_control=None, gtol: float = 1e-10) -> OptimizationResult:
    """Minimize the tracking objective over admissible boundary controls.

    The default starting control is the centre of the box, (1/2, a/2).
    """
    problem = TrackingProblem(u0, v0, p, grid, target, horizon, dt, w_terminal, w_running)
    if initial_control is None:
        c0 = np.tile([0.5, 0.5, 0.5 * p.a, 0.5 * p.a], (problem.steps, 1))
    else:
        c0 = np.broadcast_to(np.asarray(initial_control, dtype=float), (problem.steps, 4)).copy()
    out = projected_gradient(problem, c0, max_iters=max_iters, gtol=gtol)
    return _result(problem, *out)


def solve_terminal(u0, v0, p: Parameters, grid: Grid, target, horizon: float, dt: float,
                   max_iters: int = 500, initial_control=None, gtol: float = 1e-12) -> OptimizationResult:
    """Terminal-only steering (no running cost)."""
    return solve_tracking(u0, v0, p, grid, target, horizon, dt, w_terminal=1.0, w_running=0.0,
                          max_iters=max_iters, initial_control=initial_control, gtol=gtol)


def turnpike_fraction(control: np.ndarray, target_values, band: float = TURNPIKE_BAND) -> float:
    tu, tv = target_values
    ref = np.array([tu, tu, tv, tv])
    close = np.all(np.abs(np.asarray(control) - ref) <= band, axis=1)
    return float(np.mean(close)) if len(close) else 0.0


def turnpike_metric(result: OptimizationResult, p: Parameters, band: float = TURNPIKE_BAND) -> float:
    """Fraction of steps with all four controls within ``band`` of (u*, u*, v*, v*)."""
    s = coexistence_state(p)
    return turnpike_fraction(result.control, (s.u_star, s.v_star), band)


def resimulate(result: OptimizationResult, u0, v0, p: Parameters, grid: Grid, dt: float, target) -> float:
    """Forward re-run of the returned control; sup-norm terminal distance."""
    from .solver import simulate

    ctrl = SampledControl(result.control_times, result.control)
    traj = simulate(u0, v0, ctrl, p, grid, result.control_times[-1], dt)
    goal = as_target(target, grid)
    return FieldPair(traj.u[-1], traj.v[-1]).distance(goal)
