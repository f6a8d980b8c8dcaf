"""Model constants, regimes and closed-form states of the competition system.

The controlled system on (0, L) is

    u_t = d1 u_xx + u (1 - u - k1 v)
    v_t = d2 v_xx + v (a - v - k2 u)

with Dirichlet boundary values taken from admissible controls in
[0, 1] x [0, a].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEGENERATE_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when model constants violate the weak-competition setting."""


class RegimeError(ValueError):
    """Raised when an operation requires a regime the parameters are not in."""


@dataclass(frozen=True)
class Parameters:
    d1: float
    d2: float
    a: float
    k1: float
    k2: float
    L: float

    def __post_init__(self):
        for name in ("d1", "d2", "a", "k1", "k2", "L"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("d1", "d2", "a", "L"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(f"{name}={value!r} must be > 0")
        for name in ("k1", "k2"):
            value = getattr(self, name)
            if not math.isfinite(value) or not 0 < value < 1:
                raise ParameterError(
                    f"{name}={value!r} outside (0, 1): weak competition requires 0 < {name} < 1"
                )

    def replace(self, **changes) -> "Parameters":
        fields = dict(d1=self.d1, d2=self.d2, a=self.a, k1=self.k1, k2=self.k2, L=self.L)
        fields.update(changes)
        return Parameters(**fields)


def validate_parameters(d1, d2, a, k1, k2, L) -> Parameters:
    """Build a :class:`Parameters` from six raw numbers, raising ParameterError."""
    try:
        values = [float(x) for x in (d1, d2, a, k1, k2, L)]
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"non-numeric parameter: {exc}") from None
    return Parameters(*values)


@dataclass(frozen=True)
class HomogeneousState:
    u_star: float
    v_star: float


class Regime(str, Enum):
    COEXISTENCE = "coexistence"
    U_DOMINANT = "u_dominant"
    V_DOMINANT = "v_dominant"


def classify_regime(p: Parameters, tol: float = DEGENERATE_TOL) -> Regime:
    """Long-time regime of the zero-flux problem.

    Equalities ``k2 == a`` or ``a*k1 == 1`` (within ``tol``) are rejected.
    """
    if abs(p.k2 - p.a) < tol or abs(p.a * p.k1 - 1.0) < tol:
        raise RegimeError(f"degenerate regime: k2={p.k2}, a={p.a}, k1={p.k1}")
    if p.k2 > p.a:
        return Regime.U_DOMINANT
    if p.a * p.k1 > 1.0:
        return Regime.V_DOMINANT
    return Regime.COEXISTENCE


def coexistence_state(p: Parameters) -> HomogeneousState:
    if not p.k2 < p.a < 1.0 / p.k1:
        raise RegimeError(
            f"no homogeneous coexistence state: need k2 < a < 1/k1, got k2={p.k2}, a={p.a}, 1/k1={1 / p.k1}"
        )
    det = 1.0 - p.k1 * p.k2
    return HomogeneousState((1.0 - p.k1 * p.a) / det, (p.a - p.k2) / det)


def reaction_bound(p: Parameters) -> float:
    """Row-sum bound of the reaction Jacobian over the box [0,1] x [0,a]."""
    return max(1.0 + 2.0 + p.k1 * p.a, p.a + 2.0 * p.a + p.k2)


def max_stable_dt(p: Parameters) -> float:
    """Largest step for which the explicit reaction map keeps the invariant box."""
    return 0.5 / reaction_bound(p)


@dataclass(frozen=True)
class EigenPair:
    lambda0: float
    x: np.ndarray
    phi: np.ndarray


def principal_eigenvalue(L: float) -> float:
    return math.pi**2 / L**2


def principal_eigenpair(L: float, n: int) -> EigenPair:
    """First Dirichlet eigenpair of -d2/dx2 on (0, L), sampled on ``n + 2`` nodes."""
    if L <= 0:
        raise ValueError("L must be positive")
    if n < 3:
        raise ValueError("need at least 3 interior nodes")
    x = np.linspace(0.0, L, n + 2)
    phi = np.sin(math.pi * x / L)
    phi[0] = 0.0
    phi[-1] = 0.0
    # exact symmetry of the samples
    phi = 0.5 * (phi + phi[::-1])
    return EigenPair(principal_eigenvalue(L), x, phi)


def reaction(u, v, p: Parameters):
    """Pointwise reaction terms (f, g)."""
    return u * (1.0 - u - p.k1 * v), v * (p.a - v - p.k2 * u)
