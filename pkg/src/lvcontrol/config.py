"""Line-oriented ``key=value`` scenario files.

Blank lines and lines starting with ``#`` are ignored. The six model
constants are required; everything else has a default. Initial data are
either constants (uniform fields) or ``profile:<csv>`` with columns
``x,value`` sampled on the simulation grid.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .model import ParameterError, Parameters
from .solver import Grid, fmt

REQUIRED = ("d1", "d2", "a", "k1", "k2", "L")
STRATEGIES = ("neumann-shadow", "static", "traveling-wave", "zero")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    d1: float
    d2: float
    a: float
    k1: float
    k2: float
    L: float
    n: int = 100
    dt: float = 0.01
    t_end: float = 30.0
    u0: Optional[str] = None
    v0: Optional[str] = None
    strategy: Optional[str] = None
    target: Optional[str] = None
    seed: int = 0
    horizon: Optional[float] = None
    weights: Optional[tuple] = None
    name: str = "scenario"
    base_dir: str = "."

    @property
    def params(self) -> Parameters:
        return Parameters(self.d1, self.d2, self.a, self.k1, self.k2, self.L)

    @property
    def grid(self) -> Grid:
        return Grid(self.L, self.n)

    def initial(self, which: str) -> np.ndarray:
        """Initial field u0 or v0 on the grid."""
        raw = getattr(self, which)
        if raw is None:
            raise ConfigError(f"missing key {which}")
        return _field(raw, self.grid, self.base_dir, which)


KEYS = [f.name for f in fields(Scenario) if f.name not in ("name", "base_dir")]


def _float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}={text!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}={text!r} is not finite")
    return value


def _field(raw: str, grid: Grid, base_dir: str, key: str) -> np.ndarray:
    if raw.startswith("profile:"):
        path = os.path.join(base_dir, raw[len("profile:"):])
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except OSError as exc:
            raise ConfigError(f"{key}: cannot read {path}: {exc}") from None
        if data.shape[1] < 2:
            raise ConfigError(f"{key}: {path} needs columns x,value")
        return np.interp(grid.x, data[:, 0], data[:, 1])
    return np.full(grid.n + 2, _float(key, raw))


def parse_config(text: str, name: str = "scenario", base_dir: str = ".") -> Scenario:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key}")

    kw = {k: _float(k, raw[k]) for k in REQUIRED}
    try:
        p = Parameters(**kw)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    if "n" in raw:
        try:
            kw["n"] = int(raw["n"])
        except ValueError:
            raise ConfigError(f"n={raw['n']!r} is not an integer") from None
        if kw["n"] < 3:
            raise ConfigError("n must be at least 3")
    for key in ("dt", "t_end", "horizon"):
        if key in raw:
            kw[key] = _float(key, raw[key])
            if kw[key] <= 0:
                raise ConfigError(f"{key} must be positive")
    if "seed" in raw:
        try:
            kw["seed"] = int(raw["seed"])
        except ValueError:
            raise ConfigError(f"seed={raw['seed']!r} is not an integer") from None
    for key, upper in (("u0", 1.0), ("v0", p.a)):
        if key in raw:
            value = raw[key]
            if not value.startswith("profile:"):
                x = _float(key, value)
                if not 0.0 <= x <= upper:
                    raise ConfigError(f"{key}={x} outside [0, {upper}]")
            kw[key] = value
    if "strategy" in raw:
        if raw["strategy"] not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}")
        kw["strategy"] = raw["strategy"]
    if "target" in raw:
        kw["target"] = raw["target"]
    if "weights" in raw:
        parts = raw["weights"].split(",")
        if len(parts) != 2:
            raise ConfigError("weights must be w_terminal,w_running")
        w = tuple(_float("weights", s) for s in parts)
        if min(w) < 0:
            raise ConfigError("weights must be non-negative")
        kw["weights"] = w
    return Scenario(name=name, base_dir=base_dir, **kw)


def load_config(path: str) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_config(text, name=name, base_dir=os.path.dirname(os.path.abspath(path)))


def serialize(s: Scenario) -> str:
    lines = []
    for key in KEYS:
        value = getattr(s, key)
        if value is None:
            continue
        if key == "weights":
            text = ",".join(fmt(w) for w in value)
        elif isinstance(value, float):
            text = fmt(value)
        else:
            text = str(value)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def resolve_target(text: Optional[str], p: Parameters) -> tuple:
    """Target keywords: ``coexistence``, ``1,0``, ``0,a``, ``0,0`` or a numeric pair."""
    from .model import coexistence_state

    if text is None or text in ("coexistence", "u*,v*"):
        s = coexistence_state(p)
        return (s.u_star, s.v_star)
    key = text.replace(" ", "").strip("()")
    named = {"1,0": (1.0, 0.0), "0,a": (0.0, p.a), "0,0": (0.0, 0.0)}
    if key in named:
        return named[key]
    parts = key.split(",")
    if len(parts) != 2:
        raise ConfigError(f"cannot parse target {text!r}")
    tu, tv = (_float("target", s) for s in parts)
    if not (0 <= tu <= 1 and 0 <= tv <= p.a):
        raise ConfigError(f"target {text!r} outside [0,1]x[0,a]")
    return (tu, tv)
