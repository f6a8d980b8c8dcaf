"""Randomized stress tests of the barrier solutions.

A barrier is a steady profile that no admissible boundary control can push
the state across. Each check draws piecewise-constant controls (uniform in
[0,1] x [0,a], ``switches`` jumps over the horizon), simulates, and records
the worst signed distance to the barrier over space-time.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .elliptic import barrier_profiles, eta1_threshold, eta2_threshold, solve_coupled_steady
from .model import Parameters
from .solver import ConstantControl, Grid, Trajectory, fmt, n_steps, simulate, uniform_field

BARRIER_TOL = 1e-8
SWITCHES = 20


class BarrierError(ValueError):
    """Barrier absent, or initial data not on the protected side of it."""


class RandomControl:
    """Piecewise-constant control with values uniform in the admissible box."""

    def __init__(self, p: Parameters, t_end: float, rng: np.random.Generator, switches: int = SWITCHES,
                 t0: float = 0.0):
        self.breaks = t0 + t_end * np.arange(1, switches + 1) / (switches + 1)
        self.values = rng.uniform(0.0, 1.0, size=(switches + 1, 4)) * np.array([1.0, 1.0, p.a, p.a])

    def __call__(self, t: float) -> np.ndarray:
        return self.values[np.searchsorted(self.breaks, t, side="right")]


class BangBangControl:
    """Stress variant: an independent random corner of the box at every step."""

    def __init__(self, p: Parameters, t_end: float, dt: float, rng: np.random.Generator):
        steps = n_steps(t_end, dt)
        self.dt = dt
        self.values = rng.integers(0, 2, size=(steps + 1, 4)) * np.array([1.0, 1.0, p.a, p.a])

    def __call__(self, t: float) -> np.ndarray:
        k = min(int(round(t / self.dt)), len(self.values) - 1)
        return self.values[k]


@dataclass
class BarrierReport:
    kind: str
    passed: bool
    n_controls: int
    seed: int
    t_end: float
    tolerance: float
    minima: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    barriers: dict = field(default_factory=dict, repr=False)
    x: Optional[np.ndarray] = field(default=None, repr=False)
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def worst(self) -> dict:
        keys = self.minima[0].keys() if self.minima else []
        return {k: min(m[k] for m in self.minima) for k in keys if k != "control"}

    def summary(self) -> str:
        lines = [f"kind={self.kind}", f"passed={self.passed}", f"n_controls={self.n_controls}",
                 f"seed={self.seed}", f"t_end={fmt(self.t_end)}", f"tolerance={fmt(self.tolerance)}"]
        lines += [f"worst_{k}={fmt(v)}" for k, v in self.worst.items()]
        lines += [f"{k}={fmt(v) if isinstance(v, float) else v}" for k, v in self.extra.items()]
        return "\n".join(lines) + "\n"

    def write_minima_csv(self, path) -> None:
        keys = [k for k in self.minima[0] if k != "control"] if self.minima else []
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["control"] + keys)
            for m in self.minima:
                w.writerow([m["control"]] + [fmt(m[k]) for k in keys])


def _controls(p, t_end, dt, rng, n_controls, bang_bang):
    for _ in range(n_controls):
        yield BangBangControl(p, t_end, dt, rng) if bang_bang else RandomControl(p, t_end, rng)


def verify_barrier(p: Parameters, which: str = "u", n_controls: int = 20, t_end: float = 50.0,
                   dt: float = 0.01, seed: int = 0, u0=None, v0=None, n: int = 100,
                   bang_bang: bool = False, tol: float = BARRIER_TOL,
                   store_stride: Optional[int] = None) -> BarrierReport:
    """Check u >= eta1 and/or v >= eta2 under random admissible controls.

    ``which`` is "u", "v" or "both". Default initial data are the upper
    corners (1, a). The report also records, for a zero-control run from the
    same data, the smallest values reached by u and v. With ``store_stride``
    the run under the first control is kept (every ``store_stride`` steps).
    """
    if which not in ("u", "v", "both"):
        raise ValueError(f"which must be u, v or both, got {which!r}")
    grid = Grid(p.L, n)
    eta1, eta2 = barrier_profiles(p, n)
    need = {"u": ("u",), "v": ("v",), "both": ("u", "v")}[which]
    if "u" in need and eta1 is None:
        raise BarrierError(f"no u-barrier: L={p.L} <= {eta1_threshold(p):.6g}")
    if "v" in need and eta2 is None:
        raise BarrierError(f"no v-barrier: L={p.L} <= {eta2_threshold(p):.6g}")
    u = uniform_field(1.0 if u0 is None else u0, grid)
    v = uniform_field(p.a if v0 is None else v0, grid)
    checks = []
    if "u" in need:
        if np.any(u < eta1.values - 1e-12):
            raise BarrierError("initial u does not dominate eta1")
        checks.append(("min_u_minus_eta1", 0, eta1.values))
    if "v" in need:
        if np.any(v < eta2.values - 1e-12):
            raise BarrierError("initial v does not dominate eta2")
        checks.append(("min_v_minus_eta2", 1, eta2.values))

    rng = np.random.default_rng(seed)
    minima = []
    kept = None
    for i, control in enumerate(_controls(p, t_end, dt, rng, n_controls, bang_bang)):
        worst = {name: math.inf for name, _, _ in checks}

        def monitor(t, uu, vv):
            for name, idx, prof in checks:
                worst[name] = min(worst[name], float(np.min((uu, vv)[idx] - prof)))

        monitor(0.0, u, v)
        stride = store_stride if (store_stride and i == 0) else n_steps(t_end, dt)
        traj = simulate(u, v, control, p, grid, t_end, dt, stride=stride, monitor=monitor)
        if store_stride and i == 0:
            kept = traj
        minima.append({"control": i, **worst})

    zero = {"u": math.inf, "v": math.inf}

    def zero_monitor(t, uu, vv):
        zero["u"] = min(zero["u"], float(np.min(uu[1:-1])))
        zero["v"] = min(zero["v"], float(np.min(vv[1:-1])))

    simulate(u, v, ConstantControl((0.0, 0.0, 0.0, 0.0)), p, grid, t_end, dt, stride=n_steps(t_end, dt),
             monitor=zero_monitor)
    passed = all(m[name] >= -tol for m in minima for name, _, _ in checks)
    barriers = {"eta1": eta1.values} if eta1 is not None and "u" in need else {}
    if eta2 is not None and "v" in need:
        barriers["eta2"] = eta2.values
    extra = {"which": which, "zero_control_min_u": zero["u"], "zero_control_min_v": zero["v"],
             "bang_bang": bang_bang}
    return BarrierReport(f"barrier_{which}", passed, n_controls, seed, t_end, tol, minima, extra,
                         barriers, grid.x, kept)


def verify_steady_barrier(p: Parameters, n_controls: int = 20, t_end: float = 50.0, dt: float = 0.01,
                          seed: int = 0, u0=0.0, v0=None, n: int = 100, bang_bang: bool = False,
                          tol: float = BARRIER_TOL) -> BarrierReport:
    """Check u <= u_s and v >= v_s under random admissible controls.

    (u_s, v_s) is the steady state with boundary values (1, 0). Default
    initial data are (0, a), the extreme admissible state on the protected side.
    """
    grid = Grid(p.L, n)
    steady = solve_coupled_steady(p, n, tol=1e-12)
    u = uniform_field(u0, grid)
    v = uniform_field(p.a if v0 is None else v0, grid)
    if np.any(u > steady.u_s + 1e-12) or np.any(v < steady.v_s - 1e-12):
        raise BarrierError("initial data must satisfy u0 <= u_s and v0 >= v_s")

    rng = np.random.default_rng(seed)
    minima = []
    gap_u = gap_v = math.inf
    for i, control in enumerate(_controls(p, t_end, dt, rng, n_controls, bang_bang)):
        worst = {"min_us_minus_u": math.inf, "min_v_minus_vs": math.inf}

        def monitor(t, uu, vv):
            nonlocal gap_u, gap_v
            worst["min_us_minus_u"] = min(worst["min_us_minus_u"], float(np.min(steady.u_s - uu)))
            worst["min_v_minus_vs"] = min(worst["min_v_minus_vs"], float(np.min(vv - steady.v_s)))
            gap_u = min(gap_u, float(np.max(1.0 - uu)))
            gap_v = min(gap_v, float(np.max(vv)))

        monitor(0.0, u, v)
        simulate(u, v, control, p, grid, t_end, dt, stride=n_steps(t_end, dt), monitor=monitor)
        minima.append({"control": i, **worst})

    passed = all(m["min_us_minus_u"] >= -tol and m["min_v_minus_vs"] >= -tol for m in minima)
    extra = {
        "min_sup_gap_1_minus_u": gap_u, "bound_sup_1_minus_us": float(np.max(1.0 - steady.u_s)),
        "min_sup_v": gap_v, "bound_sup_vs": float(np.max(steady.v_s)),
        "steady_residual": steady.residual_norm, "steady_gap": steady.gap, "bang_bang": bang_bang,
    }
    return BarrierReport("steady_barrier", passed, n_controls, seed, t_end, tol, minima, extra,
                         {"u_s": steady.u_s, "v_s": steady.v_s}, grid.x)
