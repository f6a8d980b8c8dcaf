"""Traveling fronts connecting (0, a) to the coexistence state.

The profile (U, V)(xi), xi = x + c t, solves

    d1 U'' - c U' + U (1 - U - k1 V) = 0
    d2 V'' - c V' + V (a - V - k2 U) = 0

on a truncated line [-X, X]. Both ends carry asymptotic (projection)
boundary conditions: at +X the deviation from (u*, v*) has no component
along growing linear modes, at -X the deviation from (0, a) has no component
along the decaying one. The translation freedom is removed by the phase
condition U(0) = u*/2. Outside [-X, X] the profile is continued by the
linear tails, so it can be evaluated anywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elliptic import ConvergenceError
from .model import Parameters, RegimeError, coexistence_state


class MonotonicityError(RuntimeError):
    pass


def critical_speed(p: Parameters) -> float:
    return 2.0 * math.sqrt((1.0 - p.a * p.k1) / (1.0 - p.k1 * p.k2))


def _first_order(p: Parameters, c: float, jac: np.ndarray):
    """Eigen-decomposition of the linearized profile ODE written for (z, z')."""
    Dinv = np.diag([1.0 / p.d1, 1.0 / p.d2])
    A = np.zeros((4, 4))
    A[:2, 2:] = np.eye(2)
    A[2:, :2] = -Dinv @ jac
    A[2:, 2:] = c * Dinv
    lam, R = np.linalg.eig(A)
    return lam, R, np.linalg.inv(R)


def _real_rows(rows: np.ndarray) -> np.ndarray:
    """Real conditions equivalent to a set of (possibly complex) left eigenvectors."""
    out = []
    for row in rows:
        if np.all(np.abs(row.imag) < 1e-14 * max(1.0, np.max(np.abs(row)))):
            out.append(row.real)
        else:
            out.extend([row.real, row.imag])
    return np.array(out)[: len(rows)]


@dataclass
class _Tail:
    origin: float
    base: np.ndarray
    lam: np.ndarray
    R: np.ndarray
    coef: np.ndarray

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        on = self.coef != 0
        e = np.exp(np.outer(np.asarray(xi, dtype=float) - self.origin, self.lam[on]))
        z = (e * self.coef[on]) @ self.R[:2, on].T
        return self.base + z.real


@dataclass
class TravelingWave:
    c: float
    xi: np.ndarray
    U: np.ndarray
    V: np.ndarray
    residual_norm: float
    u_star: float
    v_star: float
    a: float
    left_tail: _Tail
    right_tail: _Tail

    @property
    def X(self) -> float:
        return float(self.xi[-1])

    @property
    def tail_rate(self) -> float:
        """Slowest growth rate of the profile's left tail."""
        t = self.left_tail
        lam = t.lam.real[np.abs(t.coef) > 0]
        return float(np.min(lam)) if len(lam) else float(np.min(t.lam.real[t.lam.real > 0]))

    def endpoint_errors(self) -> dict:
        """Distance of the truncated profile's end values from the limit states."""
        return {
            "U(-X)": float(abs(self.U[0])),
            "V(-X)": float(abs(self.V[0] - self.a)),
            "U(X)": float(abs(self.U[-1] - self.u_star)),
            "V(X)": float(abs(self.V[-1] - self.v_star)),
        }

    def monotonicity_violation(self) -> float:
        """Largest decrease of U or increase of V between neighbouring samples."""
        return float(max(0.0, -np.min(np.diff(self.U)), np.max(np.diff(self.V))))

    def __call__(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        U = np.interp(xi, self.xi, self.U)
        V = np.interp(xi, self.xi, self.V)
        for mask, tail in ((xi < self.xi[0], self.left_tail), (xi > self.xi[-1], self.right_tail)):
            if np.any(mask):
                z = tail(xi[mask])
                U[mask], V[mask] = z[:, 0], z[:, 1]
        return U, V


def _residual(U, V, p: Parameters, c: float, h: float):
    ru = (p.d1 * (U[:-2] - 2 * U[1:-1] + U[2:]) / h**2 - c * (U[2:] - U[:-2]) / (2 * h)
          + U[1:-1] * (1 - U[1:-1] - p.k1 * V[1:-1]))
    rv = (p.d2 * (V[:-2] - 2 * V[1:-1] + V[2:]) / h**2 - c * (V[2:] - V[:-2]) / (2 * h)
          + V[1:-1] * (p.a - V[1:-1] - p.k2 * U[1:-1]))
    return ru, rv


def _newton(p: Parameters, c: float, xi: np.ndarray, U: np.ndarray, V: np.ndarray, conditions,
            tol: float, max_iter: int):
    """Newton iteration for the discrete profile equations on the nodes ``xi``.

    ``conditions`` holds four linear side conditions ``(coefficients, rhs)``
    where coefficients maps an unknown index (U at 0..n, V at n+1..2n+1) to
    its weight. They fill the equation slots of the four end nodes.
    """
    n = len(xi) - 1
    h = xi[1] - xi[0]
    m = n + 1
    slots = (0, n, m, m + n)
    C_rows, C_cols, C_vals, rhs = [], [], [], np.zeros(4)
    for slot, (coef, b) in zip(slots, conditions):
        for k, w in coef.items():
            C_rows.append(slot)
            C_cols.append(k)
            C_vals.append(w)
        rhs[slots.index(slot)] = b
    C = sp.csr_matrix((C_vals, (C_rows, C_cols)), shape=(2 * m, 2 * m))
    j = np.arange(1, n)
    lo1, up1 = p.d1 / h**2 + c / (2 * h), p.d1 / h**2 - c / (2 * h)
    lo2, up2 = p.d2 / h**2 + c / (2 * h), p.d2 / h**2 - c / (2 * h)
    for it in range(max_iter):
        z = np.concatenate([U, V])
        ru, rv = _residual(U, V, p, c, h)
        R = C @ z
        R[list(slots)] -= rhs
        R[1:n] += ru
        R[m + 1:m + n] += rv
        norm = float(np.max(np.abs(R)))
        if norm <= tol and it > 0:
            return U, V
        Ui, Vi = U[1:-1], V[1:-1]
        rows = np.concatenate([j, j, j, j, m + j, m + j, m + j, m + j])
        cols = np.concatenate([j - 1, j + 1, j, m + j, m + j - 1, m + j + 1, m + j, j])
        vals = np.concatenate([np.full(n - 1, lo1), np.full(n - 1, up1),
                               -2 * p.d1 / h**2 + 1 - 2 * Ui - p.k1 * Vi, -p.k1 * Ui,
                               np.full(n - 1, lo2), np.full(n - 1, up2),
                               -2 * p.d2 / h**2 + p.a - 2 * Vi - p.k2 * Ui, -p.k2 * Vi])
        J = sp.csc_matrix((vals, (rows, cols)), shape=(2 * m, 2 * m)) + C
        dz = spla.spsolve(J.tocsc(), -R)
        if not np.all(np.isfinite(dz)):
            raise ConvergenceError("singular Jacobian in the traveling-wave Newton solve")
        U = U + dz[:m]
        V = V + dz[m:]
    raise ConvergenceError(f"traveling-wave Newton did not converge (residual {norm:.3e})")


def _projection(rows, nodes, wts, node, base, m):
    """Linear conditions row . (z(node) - base, z'(node)) = 0 with a one-sided z'."""
    out = []
    for row in rows:
        coef = {}
        for k, w in ((node, row[0]), (m + node, row[1])):
            coef[k] = coef.get(k, 0.0) + w
        for k, w in zip(nodes, wts):
            coef[k] = coef.get(k, 0.0) + row[2] * w
            coef[m + k] = coef.get(m + k, 0.0) + row[3] * w
        out.append((coef, row[0] * base[0] + row[1] * base[1]))
    return out


def _linear_tail(origin, base, lam, Rm, Rinv, keep, U, V, node, nodes, wts) -> _Tail:
    w = np.array([U[node] - base[0], V[node] - base[1], wts @ U[list(nodes)], wts @ V[list(nodes)]])
    return _Tail(origin, np.asarray(base, dtype=float), lam, Rm, (Rinv @ w) * keep)


def traveling_wave_profile(p: Parameters, c: float, X: float, n: int, tol: float = 1e-8,
                           max_iter: int = 50, check_monotone: bool = True) -> TravelingWave:
    """Newton solve for the front on ``n`` uniform intervals of [-X, X] (``n`` even)."""
    if not p.a < 1.0:
        raise RegimeError("traveling fronts need a < 1")
    state = coexistence_state(p)
    cstar = critical_speed(p)
    if not c > cstar:
        raise RegimeError(f"speed c={c} must exceed {cstar:.6g}")
    if n % 2:
        n += 1
    us, vs = state.u_star, state.v_star
    xi = np.linspace(-X, X, n + 1)
    h = xi[1] - xi[0]
    mid, m = n // 2, n + 1

    # linear modes at both ends
    jac_right = np.array([[-us, -p.k1 * us], [-p.k2 * vs, -vs]])
    jac_left = np.array([[1.0 - p.k1 * p.a, 0.0], [-p.k2 * p.a, -p.a]])
    lam_r, R_r, Rinv_r = _first_order(p, c, jac_right)
    lam_l, R_l, Rinv_l = _first_order(p, c, jac_left)
    right_rows = _real_rows(Rinv_r[lam_r.real > 0])
    left_rows = _real_rows(Rinv_l[lam_l.real < 0])
    if len(right_rows) != 2 or len(left_rows) != 1:
        raise RegimeError("unexpected mode count at the end states; speed outside the monotone-front range")

    # one-sided second-order derivative stencils
    back = np.array([3.0, -4.0, 1.0]) / (2 * h)
    fwd = np.array([-3.0, 4.0, -1.0]) / (2 * h)
    right_bc = _projection(right_rows, (n, n - 1, n - 2), back, n, (us, vs), m)
    left_bc = _projection(left_rows, (0, 1, 2), fwd, 0, (0.0, p.a), m)
    phase = ({mid: 1.0}, 0.5 * us)

    s = 0.5 * (1.0 + np.tanh(xi / 4.0))
    U, V = _newton(p, c, xi, us * s, p.a + (vs - p.a) * s,
                   [phase, right_bc[0], left_bc[0], right_bc[1]], tol, max_iter)
    U[mid] = 0.5 * us
    ru, rv = _residual(U, V, p, c, h)
    residual = float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))
    left = _linear_tail(-X, (0.0, p.a), lam_l, R_l, Rinv_l, lam_l.real > 0, U, V, 0, (0, 1, 2), fwd)

    right = _linear_tail(X, (us, vs), lam_r, R_r, Rinv_r, lam_r.real < 0, U, V, n, (n, n - 1, n - 2), back)
    wave = TravelingWave(c, xi, U, V, residual, us, vs, p.a, left, right)
    if check_monotone and wave.monotonicity_violation() > 1e-8:
        raise MonotonicityError(
            f"profile not monotone (violation {wave.monotonicity_violation():.3e}); enlarge X or raise c"
        )
    return wave
