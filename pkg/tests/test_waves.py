import numpy as np
import pytest

from lvcontrol.model import Parameters, coexistence_state
from lvcontrol.waves import TravelingWave, critical_speed, traveling_wave_profile

P = Parameters(1.0, 1.0, 0.9, 0.8, 0.7, 1.0)


@pytest.fixture(scope="module")
def wave():
    return traveling_wave_profile(P, 2.0, 40.0, 4000)


def test_critical_speed():
    assert critical_speed(P) == pytest.approx(2 * np.sqrt(0.28 / 0.44), abs=1e-12)
    assert critical_speed(P) == pytest.approx(1.596, abs=1e-3)


def test_phase_condition(wave):
    s = coexistence_state(P)
    U0, _ = wave(np.array([0.0]))
    assert U0[0] == pytest.approx(0.5 * s.u_star, abs=1e-10)


def test_monotone_and_converged(wave):
    assert wave.monotonicity_violation() <= 1e-8
    assert wave.residual_norm <= 1e-8
    assert np.all(np.diff(wave.U) >= -1e-8) and np.all(np.diff(wave.V) <= 1e-8)


def test_limits_approached(wave):
    s = coexistence_state(P)
    errs = wave.endpoint_errors()
    assert set(errs) == {"U(-X)", "V(-X)", "U(X)", "V(X)"}
    far = wave(np.array([-400.0, 400.0]))
    assert far[0][0] == pytest.approx(0.0, abs=1e-8) and far[1][0] == pytest.approx(P.a, abs=1e-8)
    assert far[0][1] == pytest.approx(s.u_star, abs=1e-6) and far[1][1] == pytest.approx(s.v_star, abs=1e-6)


def test_resolution_cross_check(wave):
    fine = traveling_wave_profile(P, 2.0, 40.0, 8000)
    xs = np.linspace(-30, 30, 61)
    assert np.max(np.abs(wave(xs)[0] - fine(xs)[0])) <= 1e-6


def test_rejects_slow_speed():
    with pytest.raises(ValueError):
        traveling_wave_profile(P, 1.5, 40.0, 1000)


def test_is_traveling_wave_instance(wave):
    assert isinstance(wave, TravelingWave) and wave.X == pytest.approx(40.0)
