"""Steady states and barrier profiles on a uniform grid.

All problems use the three-point second difference on ``n`` interior nodes of
(0, L), matching the time stepper, so profiles are exact discrete equilibria
of the scheme up to the solver tolerance.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Parameters, ParameterError, RegimeError, principal_eigenpair, principal_eigenvalue, reaction, reaction_bound
from .solver import fmt
from .tridiag import TridiagonalFactor

THRESHOLD_TOL = 1e-12


class ExistenceError(ValueError):
    """The existence condition of the requested steady state fails."""


class ConvergenceError(RuntimeError):
    pass


@dataclass
class Profile:
    x: np.ndarray
    values: np.ndarray
    kind: str = "generic"
    residual_norm: float = 0.0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "value"])
            for xj, val in zip(self.x, self.values):
                w.writerow([fmt(xj), fmt(val)])


def second_difference(z: np.ndarray, h: float) -> np.ndarray:
    """Second difference at interior nodes of a full-grid array."""
    return (z[:-2] - 2.0 * z[1:-1] + z[2:]) / h**2


def logistic_residual(z, d, alpha, beta, h) -> np.ndarray:
    zi = z[1:-1]
    return d * second_difference(z, h) + zi * (alpha - beta * zi)


def solve_logistic_bvp(d: float, alpha: float, beta: float, L: float, n: int,
                       kind: str = "generic", tol: float = 1e-10, max_iter: int = 100) -> Profile:
    """Positive solution of d z'' + z (alpha - beta z) = 0, z(0) = z(L) = 0.

    Newton's method from ``(alpha/beta) * phi`` with step halving whenever the
    residual does not decrease.
    """
    if d <= 0 or beta <= 0 or L <= 0:
        raise ValueError("need d > 0, beta > 0, L > 0")
    lam0 = principal_eigenvalue(L)
    if alpha / d <= lam0 * (1 + THRESHOLD_TOL):
        raise ExistenceError(
            f"no positive solution: alpha/d = {alpha / d:.6g} <= pi^2/L^2 = {lam0:.6g}"
        )
    eig = principal_eigenpair(L, n)
    h = L / (n + 1)
    z = (alpha / beta) * eig.phi
    off = np.full(n - 1, d / h**2)

    res = logistic_residual(z, d, alpha, beta, h)
    norm = np.max(np.abs(res))
    for _ in range(max_iter):
        if norm <= tol:
            break
        diag = -2.0 * d / h**2 + alpha - 2.0 * beta * z[1:-1]
        delta = TridiagonalFactor(off, diag, off).solve(-res)
        step = 1.0
        while True:
            trial = z.copy()
            trial[1:-1] += step * delta
            trial_res = logistic_residual(trial, d, alpha, beta, h)
            trial_norm = np.max(np.abs(trial_res))
            if trial_norm < norm or step < 1e-6:
                break
            step *= 0.5
        if trial_norm >= norm:
            raise ConvergenceError("Newton stalled on the logistic problem")
        z, res, norm = trial, trial_res, trial_norm
    else:
        if norm > tol:
            raise ConvergenceError(f"Newton did not converge: residual {norm:.3e}")
    if norm > tol:
        raise ConvergenceError(f"Newton did not converge: residual {norm:.3e}")
    if np.any(z[1:-1] <= 0):
        raise ConvergenceError("Newton converged to a non-positive solution")
    z[0] = z[-1] = 0.0
    return Profile(eig.x, z, kind, float(norm))


# ----------------------------------------------------------------------------


def eta1_threshold(p: Parameters) -> float:
    """Critical length above which the u-barrier exists (inf if a >= 1/k1)."""
    growth = 1.0 - p.a * p.k1
    return math.sqrt(p.d1 / growth) * math.pi if growth > 0 else math.inf


def eta2_threshold(p: Parameters) -> float:
    growth = p.a - p.k2
    return math.sqrt(p.d2 / growth) * math.pi if growth > 0 else math.inf


def _exceeds(L: float, threshold: float) -> bool:
    return math.isfinite(threshold) and L > threshold * (1 + THRESHOLD_TOL)


def barrier_profiles(p: Parameters, n: int) -> tuple[Optional[Profile], Optional[Profile]]:
    """(eta1, eta2): the barriers below which u (resp. v) cannot be pushed."""
    eta1 = eta2 = None
    if _exceeds(p.L, eta1_threshold(p)):
        eta1 = solve_logistic_bvp(p.d1, 1.0 - p.k1 * p.a, 1.0, p.L, n, kind="eta1")
    if _exceeds(p.L, eta2_threshold(p)):
        eta2 = solve_logistic_bvp(p.d2, p.a - p.k2, 1.0, p.L, n, kind="eta2")
    return eta1, eta2


# ----------------------------------------------------------------------------


@dataclass
class CoupledSteadyState:
    x: np.ndarray
    u_s: np.ndarray
    v_s: np.ndarray
    lower_u: np.ndarray
    lower_v: np.ndarray
    eta: float
    delta: float
    iterations: int
    residual_norm: float
    gap: float
    u_alt: np.ndarray
    v_alt: np.ndarray


def steady_residual(u, v, p: Parameters, h: float) -> float:
    f, g = reaction(u[1:-1], v[1:-1], p)
    ru = p.d1 * second_difference(u, h) + f
    rv = p.d2 * second_difference(v, h) + g
    return float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))


def _shifted(d: float, K: float, n: int, h: float) -> TridiagonalFactor:
    off = np.full(n - 1, -d / h**2)
    return TridiagonalFactor(off, np.full(n, K + 2.0 * d / h**2), off)


def solve_coupled_steady(p: Parameters, n: int, tol: float = 1e-12, max_iter: int = 200000,
                         monotone_tol: float = 1e-12) -> CoupledSteadyState:
    """Steady state with u = 1, v = 0 at both ends, by monotone iteration.

    Two decoupled ordered sequences are run: (u_up, v_low) from (1, delta*phi)
    and (u_low, v_up) from (eta*phi, a). Each sweep solves
    (K - d D2) z_new = K z + f(z) per species with K the reaction bound, which
    keeps the iterates ordered; monotonicity is asserted every sweep. The
    (u_up, v_low) limit is returned as the canonical pair and the sup-norm gap
    to the other limit is reported.
    """
    if not p.k2 < p.a < 1.0 / p.k1:
        raise RegimeError("coupled steady barrier needs k2 < a < 1/k1")
    lam0 = principal_eigenvalue(p.L)
    eta = 1.0 - p.k1 * p.a - p.d1 * lam0
    delta = p.a - p.k2 - p.d2 * lam0
    if not (_exceeds(p.L, eta1_threshold(p)) and _exceeds(p.L, eta2_threshold(p))):
        raise ExistenceError(
            f"L={p.L} does not exceed max({eta1_threshold(p):.6g}, {eta2_threshold(p):.6g})"
        )
    eig = principal_eigenpair(p.L, n)
    phi, h = eig.phi, p.L / (n + 1)
    K = reaction_bound(p)
    m1 = _shifted(p.d1, K, n, h)
    m2 = _shifted(p.d2, K, n, h)
    r1, r2 = p.d1 / h**2, p.d2 / h**2

    def sweep(u, v, u_bc, v_bc):
        f, g = reaction(u, v, p)
        bu = K * u[1:-1] + f[1:-1]
        bv = K * v[1:-1] + g[1:-1]
        bu[0] += r1 * u_bc
        bu[-1] += r1 * u_bc
        bv[0] += r2 * v_bc
        bv[-1] += r2 * v_bc
        un = np.empty_like(u)
        vn = np.empty_like(v)
        un[1:-1] = m1.solve(bu)
        vn[1:-1] = m2.solve(bv)
        un[0] = un[-1] = u_bc
        vn[0] = vn[-1] = v_bc
        return un, vn

    u_up = np.ones(n + 2)
    v_low = delta * phi
    u_low = eta * phi
    v_up = np.full(n + 2, p.a)
    u_low[0] = u_low[-1] = 1.0
    v_up[0] = v_up[-1] = 0.0

    for it in range(1, max_iter + 1):
        nu_up, nv_low = sweep(u_up, v_low, 1.0, 0.0)
        nu_low, nv_up = sweep(u_low, v_up, 1.0, 0.0)
        if (np.any(nu_up > u_up + monotone_tol) or np.any(nv_low < v_low - monotone_tol)
                or np.any(nu_low < u_low - monotone_tol) or np.any(nv_up > v_up + monotone_tol)):
            raise ConvergenceError(f"monotone iteration lost monotonicity at sweep {it}")
        change = max(np.max(np.abs(nu_up - u_up)), np.max(np.abs(nv_low - v_low)),
                     np.max(np.abs(nu_low - u_low)), np.max(np.abs(nv_up - v_up)))
        u_up, v_low, u_low, v_up = nu_up, nv_low, nu_low, nv_up
        if change <= tol:
            break
    else:
        raise ConvergenceError(f"monotone iteration stagnated after {max_iter} sweeps")

    lower_u = eta * phi
    lower_v = delta * phi
    gap = float(max(np.max(np.abs(u_up - u_low)), np.max(np.abs(v_up - v_low))))
    return CoupledSteadyState(
        x=eig.x, u_s=u_up, v_s=v_low, lower_u=lower_u, lower_v=lower_v, eta=eta, delta=delta,
        iterations=it, residual_norm=steady_residual(u_up, v_low, p, h), gap=gap,
        u_alt=u_low, v_alt=v_up,
    )


# ----------------------------------------------------------------------------


def heterogeneous_coexistence(p: Parameters, n: int) -> tuple[Profile, Profile]:
    """(u**, v**) = ((1-k1)/(1-k1 k2), (1-k2)/(1-k1 k2)) * theta for a = 1, d1 = d2."""
    if abs(p.a - 1.0) > THRESHOLD_TOL or abs(p.d1 - p.d2) > THRESHOLD_TOL * max(p.d1, p.d2):
        raise ParameterError("heterogeneous coexistence state needs a = 1 and d1 = d2")
    d = p.d1
    if p.L <= math.sqrt(d) * math.pi * (1 + THRESHOLD_TOL):
        raise ExistenceError(f"L={p.L} <= sqrt(d)*pi = {math.sqrt(d) * math.pi:.6g}")
    theta = solve_logistic_bvp(d, 1.0, 1.0, p.L, n, kind="theta")
    det = 1.0 - p.k1 * p.k2
    u = (1.0 - p.k1) / det * theta.values
    v = (1.0 - p.k2) / det * theta.values
    res = steady_residual(u, v, p, p.L / (n + 1))
    return Profile(theta.x, u, "generic", res), Profile(theta.x, v, "generic", res)
