import numpy as np
import pytest

from lvcontrol.barrier import BarrierError, RandomControl, verify_barrier, verify_steady_barrier
from lvcontrol.elliptic import barrier_profiles
from lvcontrol.model import Parameters

ONE_BARRIER = Parameters(0.01, 4.0, 1.0, 0.8, 0.7, 1.0)


def test_random_control_admissible(rng):
    p = ONE_BARRIER.replace(a=0.7)
    c = RandomControl(p, 10.0, rng)
    vals = np.array([c(t) for t in np.linspace(0, 10, 101)])
    assert np.all(vals >= 0) and np.all(vals[:, :2] <= 1) and np.all(vals[:, 2:] <= 0.7)
    assert len(np.unique(vals[:, 0])) == 21


def test_one_barrier_barrier_short():
    rep = verify_barrier(ONE_BARRIER, "u", n_controls=3, t_end=10.0, dt=0.01, u0=0.8, v0=0.5, n=50)
    assert rep.passed and rep.worst["min_u_minus_eta1"] >= -1e-8


def test_seed_independence():
    a = verify_barrier(ONE_BARRIER, "u", n_controls=3, t_end=5.0, dt=0.01, u0=0.8, v0=0.5, n=40, seed=1)
    b = verify_barrier(ONE_BARRIER, "u", n_controls=3, t_end=5.0, dt=0.01, u0=0.8, v0=0.5, n=40, seed=2)
    assert a.passed == b.passed
    assert a.minima != b.minima


def test_refinement_does_not_flip():
    coarse = verify_barrier(ONE_BARRIER, "u", n_controls=2, t_end=5.0, dt=0.01, u0=0.8, v0=0.5, n=40)
    fine = verify_barrier(ONE_BARRIER, "u", n_controls=2, t_end=5.0, dt=0.01, u0=0.8, v0=0.5, n=80)
    assert coarse.passed and fine.passed


def test_start_on_barrier():
    eta1, _ = barrier_profiles(ONE_BARRIER, 50)
    rep = verify_barrier(ONE_BARRIER, "u", n_controls=3, t_end=5.0, dt=0.01, u0=eta1.values, v0=0.5, n=50)
    assert rep.passed


def test_bang_bang_stress():
    rep = verify_barrier(ONE_BARRIER, "u", n_controls=2, t_end=3.0, dt=0.01, u0=0.8, v0=0.5, n=40, bang_bang=True)
    assert rep.passed


def test_missing_barrier_or_dominance():
    with pytest.raises(BarrierError):
        verify_barrier(ONE_BARRIER, "v", n_controls=1, t_end=1.0)
    with pytest.raises(BarrierError):
        verify_barrier(ONE_BARRIER, "u", n_controls=1, t_end=1.0, u0=0.05)
    with pytest.raises(ValueError):
        verify_barrier(ONE_BARRIER, "w")


def test_steady_barrier(coex_params):
    rep = verify_steady_barrier(coex_params, n_controls=3, t_end=10.0, n=50)
    assert rep.passed
    assert rep.extra["min_sup_gap_1_minus_u"] >= rep.extra["bound_sup_1_minus_us"] - 1e-8
    assert rep.extra["bound_sup_1_minus_us"] > 0


def test_steady_barrier_rejects_bad_initial_data(coex_params):
    with pytest.raises(BarrierError):
        verify_steady_barrier(coex_params, n_controls=1, t_end=1.0, u0=1.0, n=30)


def test_report_outputs(tmp_path):
    rep = verify_barrier(ONE_BARRIER, "u", n_controls=2, t_end=1.0, u0=0.8, v0=0.5, n=20)
    assert "passed=True" in rep.summary()
    rep.write_minima_csv(tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "control,min_u_minus_eta1" and len(lines) == 3
