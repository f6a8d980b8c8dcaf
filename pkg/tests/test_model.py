import math

import numpy as np
import pytest

from lvcontrol.model import (ParameterError, Parameters, Regime, RegimeError, classify_regime,
                             coexistence_state, max_stable_dt, principal_eigenpair, principal_eigenvalue,
                             reaction, reaction_bound, validate_parameters)


def test_validate_accepts_reference_set():
    p = validate_parameters(0.01, 0.01, 1, 0.8, 0.7, 1)
    assert p.k1 == 0.8 and isinstance(p.a, float)


@pytest.mark.parametrize("raw, name", [
    ((0.01, 0.01, 1, 1.2, 0.7, 1), "k1"),
    ((0.01, -1, 1, 0.5, 0.5, 1), "d2"),
    ((0.01, 0.01, 1, 0.5, 0.0, 1), "k2"),
    ((0.01, 0.01, 1, 0.5, 0.5, 0), "L"),
    ((0.01, 0.01, math.nan, 0.5, 0.5, 1), "a"),
])
def test_validate_reports_failed_constraint(raw, name):
    with pytest.raises(ParameterError, match=name):
        validate_parameters(*raw)


def test_validate_rejects_non_numeric():
    with pytest.raises(ParameterError):
        validate_parameters("x", 1, 1, 0.5, 0.5, 1)


def test_coexistence_reference_values():
    s = coexistence_state(Parameters(0.01, 0.01, 1, 0.8, 0.7, 1))
    assert s.u_star == pytest.approx(0.2 / 0.44, abs=1e-15)
    assert s.v_star == pytest.approx(0.3 / 0.44, abs=1e-15)
    s = coexistence_state(Parameters(1, 1, 1, 0.5, 0.5, 1))
    assert (s.u_star, s.v_star) == pytest.approx((2 / 3, 2 / 3), abs=1e-15)


def test_coexistence_decoupled_limit():
    s = coexistence_state(Parameters(1, 1, 1, 1e-14, 1e-14, 1))
    assert (s.u_star, s.v_star) == pytest.approx((1.0, 1.0), abs=1e-12)


def test_coexistence_rejects_other_regimes():
    with pytest.raises(RegimeError):
        coexistence_state(Parameters(1, 1, 0.6, 0.8, 0.7, 1))


@pytest.mark.parametrize("a, k1, k2, regime", [
    (1.0, 0.8, 0.7, Regime.COEXISTENCE),
    (0.6, 0.8, 0.7, Regime.U_DOMINANT),
    (2.0, 0.9, 0.1, Regime.V_DOMINANT),
])
def test_classify(a, k1, k2, regime):
    assert classify_regime(Parameters(1, 1, a, k1, k2, 1)) is regime


@pytest.mark.parametrize("a, k1, k2", [(0.7, 0.8, 0.7), (2.0, 0.5, 0.3)])
def test_classify_degenerate(a, k1, k2):
    with pytest.raises(RegimeError, match="degenerate"):
        classify_regime(Parameters(1, 1, a, k1, k2, 1))


@pytest.mark.parametrize("a, k1, k2, rho", [(1.0, 0.8, 0.7, 3.8), (0.6, 0.8, 0.7, 3.48), (1.0, 1e-15, 1e-15, 3.0)])
def test_reaction_bound(a, k1, k2, rho):
    p = Parameters(1, 1, a, k1, k2, 1)
    assert reaction_bound(p) == pytest.approx(rho, abs=1e-12)
    assert max_stable_dt(p) == pytest.approx(0.5 / rho, abs=1e-12)


def test_max_stable_dt_reference():
    assert max_stable_dt(Parameters(1, 1, 1, 0.8, 0.7, 1)) == pytest.approx(0.13158, abs=1e-5)


def test_eigenvalue_formula():
    assert principal_eigenvalue(1.0) == pytest.approx(9.8696044, abs=1e-7)
    assert principal_eigenvalue(math.pi) == pytest.approx(1.0, abs=1e-15)


def test_eigenpair_shape():
    e = principal_eigenpair(2.0, 99)
    assert e.phi[0] == 0.0 and e.phi[-1] == 0.0
    assert e.phi[50] == pytest.approx(1.0, abs=1e-15)
    assert np.all(e.phi[1:-1] > 0) and np.max(e.phi) <= 1.0
    np.testing.assert_array_equal(e.phi, e.phi[::-1])


@pytest.mark.parametrize("L, n", [(0.0, 10), (1.0, 2)])
def test_eigenpair_rejects(L, n):
    with pytest.raises(ValueError):
        principal_eigenpair(L, n)


def test_eigenpair_second_order():
    errs = []
    for n in (19, 39, 79):
        e = principal_eigenpair(1.0, n)
        h = 1.0 / (n + 1)
        lap = (e.phi[:-2] - 2 * e.phi[1:-1] + e.phi[2:]) / h**2
        errs.append(np.max(np.abs(lap + e.lambda0 * e.phi[1:-1])))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - 2) <= 0.2)


def test_reaction_vanishes_at_coexistence():
    p = Parameters(1, 1, 1, 0.8, 0.7, 1)
    s = coexistence_state(p)
    f, g = reaction(s.u_star, s.v_star, p)
    assert abs(f) < 1e-15 and abs(g) < 1e-15


def test_parameters_replace_and_float_coercion():
    p = Parameters(1, 1, 1, 0.5, 0.5, 1)
    assert all(isinstance(getattr(p, k), float) for k in ("d1", "d2", "a", "k1", "k2", "L"))
    q = p.replace(L=2)
    assert q.L == 2.0 and p.L == 1.0
