"""Command line entry point: ``lvcontrol <subcommand> --config FILE``.

Exit codes: 0 success, 2 invalid config, 3 solver or optimizer failure,
4 a model hypothesis (precondition) does not hold.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from .barrier import BarrierError, verify_barrier, verify_steady_barrier
from .checker import check_all_targets, check_all_targets_nd, verdict_report
from .config import ConfigError, Scenario, load_config, resolve_target
from .elliptic import (ConvergenceError, ExistenceError, barrier_profiles, heterogeneous_coexistence,
                       solve_coupled_steady)
from .model import ParameterError, RegimeError
from .optimal import solve_tracking
from .plot import emit_plot
from .solver import ConstantControl, InvariantViolation, fmt, n_steps, simulate
from .strategies import (PhaseTimeout, ReachError, finite_time_reach, neumann_shadow, run_static,
                         traveling_wave_strategy)
from .waves import MonotonicityError, critical_speed, traveling_wave_profile

log = logging.getLogger("lvcontrol")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PRECONDITION = 0, 2, 3, 4
MAX_SNAPSHOTS = 200


def _run_dir(args, scenario: Scenario) -> str:
    path = os.path.join(args.out, scenario.name)
    os.makedirs(path, exist_ok=True)
    return path


def _stride(t_end: float, dt: float) -> int:
    return max(1, n_steps(t_end, dt) // MAX_SNAPSHOTS)


def _write_report(path: str, items) -> None:
    with open(os.path.join(path, "report.txt"), "w") as fh:
        for key, val in items:
            fh.write(f"{key}={val}\n")


def _header(s: Scenario) -> list:
    return [("scenario", s.name)] + [(k, fmt(getattr(s, k))) for k in ("d1", "d2", "a", "k1", "k2", "L")] + \
        [("n", s.n), ("dt", fmt(s.dt))]


def _save_run(path, traj, dashed=None, title=""):
    traj.write_csv(os.path.join(path, "trajectory.csv"))
    traj.write_controls_csv(os.path.join(path, "controls.csv"))
    emit_plot(traj, os.path.join(path, "plot.svg"), dashed=dashed, title=title)


# ----------------------------------------------------------------------------


def cmd_check(args, s: Scenario) -> int:
    p = s.params
    verdicts = check_all_targets_nd(p, args.lambda0) if args.lambda0 else check_all_targets(p)
    text = verdict_report(verdicts)
    path = _run_dir(args, s)
    with open(os.path.join(path, "report.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args, s: Scenario) -> int:
    p, grid = s.params, s.grid
    strategy = args.strategy or s.strategy or "neumann-shadow"
    u0, v0 = s.initial("u0"), s.initial("v0")
    stride = _stride(s.t_end, s.dt)
    info = {}
    if strategy == "neumann-shadow":
        out = neumann_shadow(u0, v0, p, grid, s.t_end, s.dt, settle_tol=args.settle_tol, stride=stride)
        traj, target, info = out.trajectory, out.target, out.summary()
    elif strategy == "static":
        if s.target is None:
            raise ConfigError("static strategy needs target=1,0 | 0,a | 0,0")
        out = run_static(s.target, u0, v0, p, grid, s.t_end, s.dt, settle_tol=args.settle_tol, stride=stride)
        traj, target, info = out.trajectory, out.target, out.summary()
    elif strategy == "traveling-wave":
        wave = _wave(args, p)
        out = traveling_wave_strategy(u0, v0, p, grid, wave, s.t_end, s.dt, stride=stride)
        traj, target, info = out.trajectory, out.target, out.summary()
    else:
        traj = simulate(u0, v0, ConstantControl((0.0, 0.0, 0.0, 0.0)), p, grid, s.t_end, s.dt, stride=stride)
        target = None
    path = _run_dir(args, s)
    dashed = {"target u": target[0], "target v": target[1]} if target is not None else None
    _save_run(path, traj, dashed, title=strategy)
    items = _header(s) + [("strategy", strategy), ("t_end", fmt(traj.times[-1]))]
    items += list(info.items())
    _write_report(path, items)
    print(f"[simulate] {strategy}: wrote {path}")
    return EXIT_OK


def cmd_steady(args, s: Scenario) -> int:
    p, n = s.params, s.n
    profiles, items = {}, _header(s)
    path = _run_dir(args, s)
    eta1, eta2 = barrier_profiles(p, n)
    for prof in (eta1, eta2):
        if prof is not None:
            profiles[prof.kind] = (prof.x, prof.values)
            prof.write_csv(os.path.join(path, f"{prof.kind}.csv"))
            items.append((f"{prof.kind}_residual", fmt(prof.residual_norm)))
    try:
        steady = solve_coupled_steady(p, n)
    except (ExistenceError, RegimeError) as exc:
        items.append(("coupled_steady", f"absent ({exc})"))
    else:
        profiles["u_s"] = (steady.x, steady.u_s)
        profiles["v_s"] = (steady.x, steady.v_s)
        _write_pair(os.path.join(path, "coupled_steady.csv"), steady.x, steady.u_s, steady.v_s)
        items += [("coupled_residual", fmt(steady.residual_norm)), ("coupled_gap", fmt(steady.gap)),
                  ("eta", fmt(steady.eta)), ("delta", fmt(steady.delta)), ("iterations", steady.iterations)]
    try:
        hu, hv = heterogeneous_coexistence(p, n)
    except (ExistenceError, ParameterError) as exc:
        items.append(("heterogeneous", f"absent ({exc})"))
    else:
        profiles["u**"] = (hu.x, hu.values)
        profiles["v**"] = (hv.x, hv.values)
        _write_pair(os.path.join(path, "heterogeneous.csv"), hu.x, hu.values, hv.values)
        items.append(("heterogeneous_residual", fmt(hu.residual_norm)))
    _write_report(path, items)
    if not profiles:
        print("[steady] no steady profile exists for these parameters")
        return EXIT_PRECONDITION
    emit_plot(profiles, os.path.join(path, "plot.svg"), title="steady profiles")
    print(f"[steady] wrote {path}")
    return EXIT_OK


def _write_pair(path, x, u, v) -> None:
    with open(path, "w") as fh:
        fh.write("x,u,v\n")
        for row in zip(x, u, v):
            fh.write(",".join(fmt(c) for c in row) + "\n")


def cmd_barrier(args, s: Scenario) -> int:
    p = s.params
    u0 = s.initial("u0") if s.u0 is not None else None
    v0 = s.initial("v0") if s.v0 is not None else None
    if args.which == "steady":
        rep = verify_steady_barrier(p, args.controls, s.t_end, s.dt, s.seed,
                                    u0=0.0 if u0 is None else u0, v0=v0, n=s.n, bang_bang=args.bang_bang)
    else:
        rep = verify_barrier(p, args.which, args.controls, s.t_end, s.dt, s.seed, u0=u0, v0=v0, n=s.n,
                             bang_bang=args.bang_bang, store_stride=_stride(s.t_end, s.dt))
    path = _run_dir(args, s)
    rep.write_minima_csv(os.path.join(path, "minima.csv"))
    with open(os.path.join(path, "report.txt"), "w") as fh:
        fh.write("\n".join(f"{k}={v}" for k, v in _header(s)) + "\n" + rep.summary())
    dashed = {name: (rep.x, prof) for name, prof in rep.barriers.items()}
    if rep.trajectory is not None:
        _save_run(path, rep.trajectory, dashed, title=f"{rep.kind}, control 0")
    else:
        emit_plot({k: (rep.x, v) for k, v in rep.barriers.items()}, os.path.join(path, "plot.svg"),
                  title=rep.kind)
    sys.stdout.write(rep.summary())
    return EXIT_OK


def _wave(args, p):
    c = args.speed if args.speed else 1.25 * critical_speed(p)
    n = args.wave_n or int(round(50 * args.half_width))
    return traveling_wave_profile(p, c, args.half_width, n)


def cmd_wave(args, s: Scenario) -> int:
    p = s.params
    wave = _wave(args, p)
    path = _run_dir(args, s)
    with open(os.path.join(path, "wave.csv"), "w") as fh:
        fh.write("xi,U,V\n")
        for row in zip(wave.xi, wave.U, wave.V):
            fh.write(",".join(fmt(c) for c in row) + "\n")
    items = _header(s) + [("c", fmt(wave.c)), ("c_star", fmt(critical_speed(p))), ("X", fmt(wave.X)),
                          ("residual", fmt(wave.residual_norm)),
                          ("monotonicity_violation", fmt(wave.monotonicity_violation()))]
    items += [(f"endpoint_error {k}", fmt(v)) for k, v in wave.endpoint_errors().items()]
    if s.u0 is not None and s.v0 is not None:
        out = traveling_wave_strategy(s.initial("u0"), s.initial("v0"), p, s.grid, wave, s.t_end, s.dt,
                                      stride=_stride(s.t_end, s.dt))
        _save_run(path, out.trajectory, {"u*": out.target[0], "v*": out.target[1]}, title="traveling wave")
        items += list(out.summary().items())
    else:
        emit_plot({"U": (wave.xi, wave.U), "V": (wave.xi, wave.V)}, os.path.join(path, "plot.svg"),
                  title="wave profile")
    _write_report(path, items)
    print(f"[wave] wrote {path}")
    return EXIT_OK


def cmd_optimize(args, s: Scenario) -> int:
    p = s.params
    target = resolve_target(s.target, p)
    horizon = s.horizon if s.horizon is not None else s.t_end
    w_terminal, w_running = s.weights if s.weights is not None else (1.0, 1.0)
    res = solve_tracking(s.initial("u0"), s.initial("v0"), p, s.grid, target, horizon, s.dt,
                         w_terminal=w_terminal, w_running=w_running, max_iters=args.max_iters)
    path = _run_dir(args, s)
    _save_run(path, res.trajectory, {"target u": target[0], "target v": target[1]}, title="tracking optimum")
    res.write_history_csv(os.path.join(path, "history.csv"))
    items = _header(s) + [("horizon", fmt(horizon)), ("J", fmt(res.objective_history[-1])),
                          ("grad_norm", fmt(res.final_gradient_norm)), ("iterations", res.iterations),
                          ("converged", str(res.converged).lower()),
                          ("terminal_error", fmt(res.terminal_error))]
    if res.turnpike_fraction is not None:
        items.append(("turnpike_fraction", fmt(res.turnpike_fraction)))
    _write_report(path, items)
    print(f"[optimize] J={res.objective_history[-1]:.6e} wrote {path}")
    return EXIT_OK if not res.line_search_failed else EXIT_SOLVER


def cmd_reach(args, s: Scenario) -> int:
    p = s.params
    horizon = s.horizon if s.horizon is not None else 2.0
    code = EXIT_OK
    try:
        out = finite_time_reach(s.initial("u0"), s.initial("v0"), p, s.grid, horizon, args.eps, s.dt,
                                t1_max=s.t_end, max_iters=args.max_iters)
    except ReachError as exc:
        out, code = exc.outcome, EXIT_SOLVER
        print(f"[reach] {exc}")
    path = _run_dir(args, s)
    _save_run(path, out.trajectory, {"u*": out.target[0], "v*": out.target[1]}, title="finite-time reach")
    out.optimization.write_history_csv(os.path.join(path, "history.csv"))
    _write_report(path, _header(s) + list(out.summary().items()))
    print(f"[reach] terminal_error={out.terminal_error:.3e} wrote {path}")
    return code


COMMANDS = {
    "check": cmd_check, "simulate": cmd_simulate, "steady": cmd_steady, "barrier": cmd_barrier,
    "wave": cmd_wave, "optimize": cmd_optimize, "reach": cmd_reach,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lvcontrol", description="Boundary control of a competition system")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default="runs")
        if name == "check":
            sp.add_argument("--lambda0", type=float, default=None,
                            help="principal Dirichlet eigenvalue of a general domain")
        if name == "simulate":
            sp.add_argument("--strategy", choices=("neumann-shadow", "static", "traveling-wave", "zero"))
            sp.add_argument("--settle-tol", type=float, default=None)
        if name in ("simulate", "wave"):
            sp.add_argument("--speed", type=float, default=None, help="wave speed (default 1.25 c*)")
            sp.add_argument("--half-width", type=float, default=40.0)
            sp.add_argument("--wave-n", type=int, default=None)
        if name == "barrier":
            sp.add_argument("--which", choices=("u", "v", "both", "steady"), default="u")
            sp.add_argument("--controls", type=int, default=20)
            sp.add_argument("--bang-bang", action="store_true")
        if name in ("optimize", "reach"):
            sp.add_argument("--max-iters", type=int, default=200)
        if name == "reach":
            sp.add_argument("--eps", type=float, default=0.05)
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        scenario = load_config(args.config)
        return COMMANDS[args.command](args, scenario)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegimeError, ExistenceError, BarrierError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ConvergenceError, MonotonicityError, PhaseTimeout, InvariantViolation) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # remaining value errors come from inconsistent numerical settings (dt, t_end)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
