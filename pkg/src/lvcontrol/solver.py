"""IMEX time integration of the controlled system.

Reaction is advanced explicitly, diffusion implicitly (backward Euler) with one
tridiagonal solve per species. Dirichlet boundary values come from a control
evaluated at the new time level. The scheme keeps the box [0,1] x [0,a]
invariant when ``dt <= max_stable_dt(p)``; violations are errors, never clipped.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .model import Parameters, max_stable_dt, reaction
from .tridiag import TridiagonalFactor

INVARIANT_TOL = 1e-12
SETTLE_COUNT = 10


class InvariantViolation(RuntimeError):
    """The state left the box [0,1] x [0,a]; the step size was misused."""


class ControlError(ValueError):
    """A boundary control value lies outside [0,1] x [0,a]."""


@dataclass(frozen=True)
class Grid:
    L: float
    n: int

    def __post_init__(self):
        if self.L <= 0 or self.n < 3:
            raise ValueError(f"invalid grid L={self.L}, n={self.n}")

    @property
    def h(self) -> float:
        return self.L / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n + 2)

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.L, factor * (self.n + 1) - 1)


@dataclass
class FieldPair:
    u: np.ndarray
    v: np.ndarray

    def copy(self) -> "FieldPair":
        return FieldPair(self.u.copy(), self.v.copy())

    def distance(self, other: "FieldPair") -> float:
        return float(max(np.max(np.abs(self.u - other.u)), np.max(np.abs(self.v - other.v))))


def uniform_field(value, grid: Grid) -> np.ndarray:
    """Scalars become spatially uniform fields; arrays are checked for length."""
    if np.isscalar(value):
        return np.full(grid.n + 2, float(value))
    arr = np.array(value, dtype=float)
    if arr.shape != (grid.n + 2,):
        raise ValueError(f"field has shape {arr.shape}, expected ({grid.n + 2},)")
    return arr


def as_target(target, grid: Grid) -> FieldPair:
    if isinstance(target, FieldPair):
        return target
    tu, tv = target
    return FieldPair(uniform_field(tu, grid), uniform_field(tv, grid))


def check_box(u, v, p: Parameters, tol: float = INVARIANT_TOL, what: str = "state") -> None:
    lo = min(np.min(u), np.min(v))
    if lo < -tol or np.max(u) > 1.0 + tol or np.max(v) > p.a + tol:
        raise InvariantViolation(
            f"{what} left [0,1]x[0,{p.a}]: min={lo:.3e}, max u={np.max(u):.17g}, max v={np.max(v):.17g}"
        )


def check_control(values, p: Parameters, tol: float = 0.0) -> None:
    cu_l, cu_r, cv_l, cv_r = values
    if not (-tol <= cu_l <= 1 + tol and -tol <= cu_r <= 1 + tol
            and -tol <= cv_l <= p.a + tol and -tol <= cv_r <= p.a + tol):
        raise ControlError(f"inadmissible control {tuple(values)} for a={p.a}")


# ----------------------------------------------------------------------------
# Boundary controls. Values are ordered (cu_left, cu_right, cv_left, cv_right).


@dataclass(frozen=True)
class ConstantControl:
    values: tuple

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class SampledControl:
    """Time samples of the four boundary values, linearly interpolated in time."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(times), 4):
            raise ValueError("control values must have shape (len(times), 4)")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("control sample times must increase")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t: float) -> np.ndarray:
        k = np.searchsorted(self.times, t)
        if k < len(self.times) and abs(self.times[k] - t) <= 1e-12 * max(1.0, abs(t)):
            return self.values[k].copy()
        if k > 0 and abs(self.times[k - 1] - t) <= 1e-12 * max(1.0, abs(t)):
            return self.values[k - 1].copy()
        return np.array([np.interp(t, self.times, self.values[:, j]) for j in range(4)])


BoundaryControl = Union[ConstantControl, SampledControl, Callable[[float], Sequence[float]]]


# ----------------------------------------------------------------------------


class Stepper:
    """Pre-factored IMEX stepper for fixed (parameters, grid, dt).

    With ``neumann=True`` the diffusion solve covers every node and the end
    nodes use reflecting ghost values (zero flux); no control is injected.
    """

    def __init__(self, p: Parameters, grid: Grid, dt: float, neumann: bool = False, check_dt: bool = True):
        if dt <= 0:
            raise ValueError("dt must be positive")
        if check_dt and dt > max_stable_dt(p) * (1 + 1e-12):
            raise ValueError(f"dt={dt} exceeds max_stable_dt={max_stable_dt(p):.6g}")
        self.p, self.grid, self.dt, self.neumann = p, grid, dt, neumann
        h2 = grid.h**2
        self.r1 = p.d1 * dt / h2
        self.r2 = p.d2 * dt / h2
        self.m1 = self._factor(self.r1)
        self.m2 = self._factor(self.r2)

    def _factor(self, r: float) -> TridiagonalFactor:
        m = self.grid.n + 2 if self.neumann else self.grid.n
        lower = np.full(m - 1, -r)
        upper = np.full(m - 1, -r)
        diag = np.full(m, 1.0 + 2.0 * r)
        if self.neumann:
            upper[0] = -2.0 * r
            lower[-1] = -2.0 * r
        return TridiagonalFactor(lower, diag, upper)

    def explicit_part(self, u, v):
        f, g = reaction(u, v, self.p)
        return u + self.dt * f, v + self.dt * g

    def step(self, u, v, bc) -> tuple:
        """Advance one step; ``bc`` holds the boundary values at the new time."""
        ru, rv = self.explicit_part(u, v)
        if self.neumann:
            un = self.m1.solve(ru)
            vn = self.m2.solve(rv)
        else:
            cu_l, cu_r, cv_l, cv_r = bc
            bu = ru[1:-1].copy()
            bv = rv[1:-1].copy()
            bu[0] += self.r1 * cu_l
            bu[-1] += self.r1 * cu_r
            bv[0] += self.r2 * cv_l
            bv[-1] += self.r2 * cv_r
            un = np.empty_like(u)
            vn = np.empty_like(v)
            un[1:-1] = self.m1.solve(bu)
            vn[1:-1] = self.m2.solve(bv)
            un[0], un[-1], vn[0], vn[-1] = cu_l, cu_r, cv_l, cv_r
        check_box(un, vn, self.p)
        return un, vn


def step(state: FieldPair, p: Parameters, grid: Grid, bc, dt: float) -> FieldPair:
    """Single IMEX step with Dirichlet data ``bc = (cu_l, cu_r, cv_l, cv_r)``."""
    check_control(bc, p)
    check_box(state.u, state.v, p)
    u, v = Stepper(p, grid, dt).step(state.u, state.v, bc)
    return FieldPair(u, v)


@dataclass
class Trajectory:
    x: np.ndarray
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    control_times: np.ndarray
    controls: np.ndarray
    settled: bool = False
    settle_time: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> FieldPair:
        return FieldPair(self.u[-1].copy(), self.v[-1].copy())

    def snapshot(self, t: float) -> FieldPair:
        k = int(np.argmin(np.abs(self.times - t)))
        return FieldPair(self.u[k].copy(), self.v[k].copy())

    def distances(self, target: FieldPair) -> np.ndarray:
        return np.maximum(np.max(np.abs(self.u - target.u), axis=1),
                          np.max(np.abs(self.v - target.v), axis=1))

    def control(self) -> SampledControl:
        return SampledControl(self.control_times, self.controls)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "u", "v"])
            for k, t in enumerate(self.times):
                for j, xj in enumerate(self.x):
                    w.writerow([fmt(t), fmt(xj), fmt(self.u[k, j]), fmt(self.v[k, j])])

    def write_controls_csv(self, path) -> None:
        write_controls_csv(path, self.control_times, self.controls)


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_controls_csv(path, times, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "cu_left", "cu_right", "cv_left", "cv_right"])
        for t, row in zip(times, values):
            w.writerow([fmt(t)] + [fmt(c) for c in row])


def read_controls_csv(path) -> SampledControl:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SampledControl(data[:, 0], data[:, 1:5])


def n_steps(t_end: float, dt: float) -> int:
    steps = int(round(t_end / dt))
    if steps < 0 or not math.isclose(steps * dt, t_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"t_end={t_end} is not a multiple of dt={dt}")
    return steps


def simulate(u0, v0, control: Optional[BoundaryControl], p: Parameters, grid: Grid, t_end: float, dt: float,
             settle_tol: Optional[float] = None, target=None, stride: int = 1,
             neumann: bool = False, t0: float = 0.0,
             monitor: Optional[Callable] = None, stop: Optional[Callable] = None) -> Trajectory:
    """Integrate from ``t0`` to ``t0 + t_end``.

    With a ``target`` and ``settle_tol`` the run stops once the sup-norm
    distance stays below ``settle_tol`` for 10 consecutive stored snapshots.
    In Neumann mode ``control`` is ignored and the boundary traces of the
    zero-flux solution are recorded as the control. ``monitor(t, u, v)`` is
    called after every step; the run ends early when ``stop(t, u, v)`` is true.
    """
    u = uniform_field(u0, grid)
    v = uniform_field(v0, grid)
    check_box(u, v, p, what="initial data")
    stepper = Stepper(p, grid, dt, neumann=neumann)
    steps = n_steps(t_end, dt)
    goal = as_target(target, grid) if target is not None else None

    times, us, vs = [t0], [u.copy()], [v.copy()]
    ctimes, cvals = [], []
    settled, settle_time, streak = False, None, 0

    def settle_check(t, u, v):
        nonlocal streak, settled, settle_time
        if goal is None or settle_tol is None:
            return False
        dist = max(np.max(np.abs(u - goal.u)), np.max(np.abs(v - goal.v)))
        streak = streak + 1 if dist <= settle_tol else 0
        if streak >= SETTLE_COUNT:
            settled, settle_time = True, t
            return True
        return False

    settle_check(t0, u, v)
    for k in range(1, steps + 1):
        t = t0 + k * dt
        if neumann:
            u, v = stepper.step(u, v, None)
            bc = np.array([u[0], u[-1], v[0], v[-1]])
        else:
            bc = np.asarray(control(t), dtype=float)
            check_control(bc, p, tol=INVARIANT_TOL)
            u, v = stepper.step(u, v, bc)
        ctimes.append(t)
        cvals.append(bc)
        if monitor is not None:
            monitor(t, u, v)
        halt = stop is not None and stop(t, u, v)
        if k % stride == 0 or k == steps or halt:
            times.append(t)
            us.append(u.copy())
            vs.append(v.copy())
            if settle_check(t, u, v):
                break
        if halt:
            break

    return Trajectory(
        x=grid.x, times=np.array(times), u=np.array(us), v=np.array(vs),
        control_times=np.array(ctimes), controls=np.array(cvals).reshape(-1, 4),
        settled=settled, settle_time=settle_time,
    )
