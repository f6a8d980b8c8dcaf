import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lvcontrol.cli import run
from lvcontrol.config import ConfigError, Scenario, load_config, parse_config, resolve_target, serialize
from lvcontrol.plot import emit_plot
from lvcontrol.solver import Trajectory

BASE = "d1=0.01\nd2=0.01\na=1\nk1=0.8\nk2=0.7\nL=1\n"


def write_cfg(tmp_path, name, text):
    path = tmp_path / f"{name}.cfg"
    path.write_text(text)
    return str(path)


def test_parse_defaults_and_comments():
    s = parse_config("# comment\n\n" + BASE + "u0=0.2\nv0 = 0.5\n")
    assert (s.k1, s.n, s.dt, s.t_end) == (0.8, 100, 0.01, 30.0)
    assert s.u0 == "0.2" and s.v0 == "0.5"
    np.testing.assert_array_equal(s.initial("u0"), 0.2)


@pytest.mark.parametrize("extra, message", [
    ("foo=1\n", "unknown key"),
    ("d1=0.02\n", "duplicate"),
    ("n=2\n", "at least 3"),
    ("u0=1.5\n", "outside"),
    ("dt=-1\n", "positive"),
    ("weights=1\n", "weights"),
    ("strategy=magic\n", "strategy"),
    ("oops\n", "key=value"),
])
def test_parse_errors(extra, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(BASE + extra)


def test_parameter_violation_is_config_error():
    with pytest.raises(ConfigError, match="k1"):
        parse_config(BASE.replace("k1=0.8", "k1=1.5"))


def test_missing_required_key():
    with pytest.raises(ConfigError, match="L"):
        parse_config(BASE.replace("L=1\n", ""))


def test_profile_initial_data(tmp_path):
    (tmp_path / "u.csv").write_text("x,value\n0,0\n1,1\n")
    path = write_cfg(tmp_path, "prof", BASE + "n=3\nu0=profile:u.csv\nv0=0.5\n")
    s = load_config(path)
    np.testing.assert_allclose(s.initial("u0"), [0, 0.25, 0.5, 0.75, 1.0])
    assert s.name == "prof"


def test_resolve_target(coex_params):
    assert resolve_target("1,0", coex_params) == (1.0, 0.0)
    assert resolve_target("(0,a)", coex_params) == (0.0, 1.0)
    assert resolve_target(None, coex_params)[0] == pytest.approx(0.2 / 0.44)
    assert resolve_target("0.3, 0.4", coex_params) == (0.3, 0.4)
    with pytest.raises(ConfigError):
        resolve_target("2,0", coex_params)


positive = st.floats(1e-4, 10, allow_nan=False)
unit = st.floats(0.01, 0.99)


@st.composite
def scenarios(draw):
    k1, k2 = draw(unit), draw(unit)
    a = draw(st.floats(0.05, 5))
    u0 = draw(st.floats(0, 1))
    v0 = draw(st.floats(0, 1)) * a
    weights = draw(st.none() | st.tuples(st.floats(0, 5), st.floats(0, 5)))
    return Scenario(d1=draw(positive), d2=draw(positive), a=a, k1=k1, k2=k2, L=draw(positive),
                    n=draw(st.integers(3, 400)), dt=draw(positive), t_end=draw(positive),
                    u0=repr(u0), v0=repr(v0), strategy=draw(st.none() | st.sampled_from(["static", "zero"])),
                    seed=draw(st.integers(0, 2**31)), horizon=draw(st.none() | positive), weights=weights)


@settings(max_examples=200, deadline=None)
@given(scenarios())
def test_serialize_round_trip(s):
    back = parse_config(serialize(s))
    for key in ("d1", "d2", "a", "k1", "k2", "L", "n", "dt", "t_end", "strategy", "seed", "horizon", "weights"):
        assert getattr(back, key) == getattr(s, key)
    assert float(back.u0) == float(s.u0) and float(back.v0) == float(s.v0)


# command line

COEX = BASE + "n=20\ndt=0.05\nt_end=2\nu0=0.2\nv0=0.5\n"


def test_cli_check(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "coex", COEX)
    assert run(["check", "--config", cfg, "--out", str(tmp_path / "runs")]) == 0
    report = (tmp_path / "runs" / "coex" / "report.txt").read_text()
    assert "target=(1,0) status=not_controllable" in report


def test_cli_simulate_outputs_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, "coex", COEX + "strategy=neumann-shadow\n")
    files = {}
    for out in ("r1", "r2"):
        assert run(["simulate", "--config", cfg, "--out", str(tmp_path / out)]) == 0
        d = tmp_path / out / "coex"
        files[out] = {f: (d / f).read_bytes() for f in sorted(os.listdir(d))}
    assert {"trajectory.csv", "controls.csv", "report.txt", "plot.svg"} <= set(files["r1"])
    assert files["r1"] == files["r2"]
    assert files["r1"]["trajectory.csv"].startswith(b"t,x,u,v\n")


def test_cli_missing_config(tmp_path):
    assert run(["check", "--config", str(tmp_path / "none.cfg")]) == 2


def test_cli_bad_parameters(tmp_path):
    cfg = write_cfg(tmp_path, "bad", COEX.replace("k1=0.8", "k1=1.5"))
    assert run(["check", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_cli_precondition_exit(tmp_path):
    cfg = write_cfg(tmp_path, "one_barrier", COEX.replace("d2=0.01", "d2=4"))
    assert run(["barrier", "--config", cfg, "--out", str(tmp_path), "--which", "v", "--controls", "1"]) == 4


def test_cli_solver_exit(tmp_path):
    cfg = write_cfg(tmp_path, "reach", COEX.replace("n=20", "n=10") + "horizon=0.5\n")
    code = run(["reach", "--config", cfg, "--out", str(tmp_path), "--max-iters", "1", "--eps", "0.5"])
    assert code == 3
    assert (tmp_path / "reach" / "history.csv").exists()


def test_plot_errors_and_determinism(tmp_path):
    empty = Trajectory(x=np.zeros(0), times=np.zeros(0), u=np.zeros((0, 0)), v=np.zeros((0, 0)),
                       control_times=np.zeros(0), controls=np.zeros((0, 4)))
    with pytest.raises(ValueError, match="empty"):
        emit_plot(empty, tmp_path / "e.svg")
    with pytest.raises(ValueError):
        emit_plot({}, tmp_path / "e.svg")
    x = np.linspace(0, 1, 11)
    for name in ("a.svg", "b.svg"):
        emit_plot({"u": (x, x**2)}, tmp_path / name, dashed={"eta": (x, 0.5 * x), "u*": 0.4})
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
