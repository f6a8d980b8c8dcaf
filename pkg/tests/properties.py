"""Randomized checks shared by the property tests and the acceptance suite."""
import math

import numpy as np

from lvcontrol.checker import CONTROLLABLE, NOT_CONTROLLABLE, check_all_targets, check_all_targets_nd
from lvcontrol.model import Parameters, max_stable_dt
from lvcontrol.solver import Grid, Stepper


def random_parameters(rng, L=None):
    return Parameters(10 ** rng.uniform(-3, 1), 10 ** rng.uniform(-3, 1), 10 ** rng.uniform(-1.5, 1),
                      rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99),
                      10 ** rng.uniform(-1, 1) if L is None else L)


def box_violation(rng, steps=20):
    """Worst excursion outside [0,1]x[0,a] for one random scenario."""
    p = random_parameters(rng)
    grid = Grid(p.L, int(rng.integers(3, 40)))
    dt = rng.uniform(0.05, 1.0) * max_stable_dt(p)
    st = Stepper(p, grid, dt)
    u = rng.uniform(0, 1, grid.n + 2)
    v = rng.uniform(0, p.a, grid.n + 2)
    scale = np.array([1.0, 1.0, p.a, p.a])
    worst = 0.0
    for _ in range(steps):
        bc = rng.integers(0, 2, 4) * scale if rng.random() < 0.3 else rng.uniform(0, 1, 4) * scale
        u, v = st.step(u, v, bc)
        worst = max(worst, -u.min(), -v.min(), u.max() - 1.0, v.max() - p.a)
    return worst


def ordering_violation(rng, steps=30):
    """Run (u_hi, v_lo) and (u_lo, v_hi) with ordered data; worst loss of order."""
    p = random_parameters(rng)
    grid = Grid(p.L, int(rng.integers(3, 40)))
    dt = rng.uniform(0.05, 1.0) * max_stable_dt(p)
    st = Stepper(p, grid, dt)
    m = grid.n + 2
    u_lo = rng.uniform(0, 1, m)
    u_hi = u_lo + rng.uniform(0, 1, m) * (1 - u_lo)
    v_lo = rng.uniform(0, p.a, m)
    v_hi = v_lo + rng.uniform(0, 1, m) * (p.a - v_lo)
    worst = 0.0
    for _ in range(steps):
        cu_lo = rng.uniform(0, 1, 2)
        cu_hi = cu_lo + rng.uniform(0, 1, 2) * (1 - cu_lo)
        cv_lo = rng.uniform(0, p.a, 2)
        cv_hi = cv_lo + rng.uniform(0, 1, 2) * (p.a - cv_lo)
        u_hi, v_lo = st.step(u_hi, v_lo, np.concatenate([cu_hi, cv_lo]))
        u_lo, v_hi = st.step(u_lo, v_hi, np.concatenate([cu_lo, cv_hi]))
        worst = max(worst, float(np.max(u_lo - u_hi)), float(np.max(v_lo - v_hi)))
    return worst


def checker_conflicts(p):
    """Number of inconsistencies for one parameter draw (0 when all good)."""
    try:
        one = check_all_targets(p)
        nd = check_all_targets_nd(p, math.pi**2 / p.L**2)
    except AssertionError:
        return 1
    bad = 0
    for a, b in zip(one, nd):
        if a.status != b.status or a.target != b.target:
            bad += 1
        if a.target == "(u**,v**)" and a.status == NOT_CONTROLLABLE:
            bad += 1
        if a.status not in (CONTROLLABLE, NOT_CONTROLLABLE) and not a.certificate:
            bad += 1
    return bad
