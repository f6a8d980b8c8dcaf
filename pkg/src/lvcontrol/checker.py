"""Controllability verdicts from the explicit sufficient conditions.

Every condition is evaluated in eigenvalue form (lambda0 against a rate
ratio), which covers the interval case through lambda0 = pi^2 / L^2 and the
general domain case through a user-supplied lambda0. Inequalities that are
within THRESHOLD_TOL (relative) of equality are reported as threshold cases
and never decide a verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .model import Parameters

THRESHOLD_TOL = 1e-12

CONTROLLABLE = "controllable"
NOT_CONTROLLABLE = "not_controllable"
INCONCLUSIVE = "inconclusive"

TARGETS = ("(u*,v*)", "(1,0)", "(0,a)", "(0,0)", "(u**,v**)")


@dataclass
class Verdict:
    target: str
    status: str
    certificate: str
    thresholds: dict = field(default_factory=dict)
    threshold_case: bool = False

    def line(self) -> str:
        return f"target={self.target} status={self.status} certificate={self.certificate!r}"


def _near(x: float, y: float, tol: float) -> bool:
    if math.isinf(x) or math.isinf(y):
        return False
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def _gt(x: float, y: float, tol: float) -> Optional[bool]:
    """x > y, or None inside the threshold band."""
    return None if _near(x, y, tol) else x > y


def _all(*vals) -> Optional[bool]:
    if any(v is False for v in vals):
        return False
    return None if any(v is None for v in vals) else True


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else -math.inf


def _rates(p: Parameters) -> dict:
    """Eigenvalue thresholds; -inf marks a vanishing or negative growth term."""
    r = {
        "a/d2": p.a / p.d2,
        "1/d1": 1.0 / p.d1,
        "(1-a*k1)/d1": _ratio(1.0 - p.a * p.k1, p.d1),
        "(a-k2)/d2": _ratio(p.a - p.k2, p.d2),
    }
    r["max(1/d1,a/d2)"] = max(r["1/d1"], r["a/d2"])
    r["min((1-a*k1)/d1,(a-k2)/d2)"] = min(r["(1-a*k1)/d1"], r["(a-k2)/d2"])
    return r


def _length(rate: float) -> float:
    """Critical length pi / sqrt(rate) matching an eigenvalue threshold."""
    return math.pi / math.sqrt(rate) if rate > 0 else math.inf


def _clauses(p: Parameters, lam: float, tol: float):
    """(target, kind, name, value, text-in-lambda form) for every clause."""
    r = _rates(p)
    coex = _all(_gt(p.a, p.k2, tol), _gt(1.0 / p.k1, p.a, tol))
    big_u = _gt(r["(1-a*k1)/d1"], lam, tol) if r["(1-a*k1)/d1"] > 0 else False
    big_v = _gt(r["(a-k2)/d2"], lam, tol) if r["(a-k2)/d2"] > 0 else False
    # a = 1 and d1 = d2 are structural hypotheses, accepted up to rounding
    hetero = _gt(1.0 / p.d1, lam, tol) if _near(p.d1, p.d2, tol) and _near(p.a, 1.0, tol) else False
    return [
        ("(u*,v*)", CONTROLLABLE, "coexistence via zero-flux dynamics", coex, "k2 < a < 1/k1"),
        ("(1,0)", CONTROLLABLE, "static (1,0), small domain", _gt(lam, r["a/d2"], tol),
         "lambda0 >= a/d2"),
        ("(1,0)", CONTROLLABLE, "u dominance", _gt(p.k2, p.a, tol), "k2 > a"),
        ("(0,a)", CONTROLLABLE, "static (0,a), small domain", _gt(lam, r["1/d1"], tol), "lambda0 >= 1/d1"),
        ("(0,a)", CONTROLLABLE, "v dominance", _gt(p.k1, 1.0 / p.a, tol), "k1 > 1/a"),
        ("(1,0)", NOT_CONTROLLABLE, "steady barrier pair", _all(coex, big_u, big_v),
         "k2 < a < 1/k1 and lambda0 < min((1-a*k1)/d1, (a-k2)/d2)"),
        ("(0,a)", NOT_CONTROLLABLE, "steady barrier pair", _all(coex, big_u, big_v),
         "k2 < a < 1/k1 and lambda0 < min((1-a*k1)/d1, (a-k2)/d2)"),
        ("(0,0)", CONTROLLABLE, "static (0,0), small domain", _gt(lam, r["max(1/d1,a/d2)"], tol),
         "lambda0 >= max(1/d1, a/d2)"),
        ("(0,0)", NOT_CONTROLLABLE, "logistic barrier for u",
         _all(_gt(1.0 / p.k1, p.a, tol), big_u), "a < 1/k1 and lambda0 < (1-a*k1)/d1"),
        ("(0,0)", NOT_CONTROLLABLE, "logistic barrier for v",
         _all(_gt(p.a, p.k2, tol), big_v), "a > k2 and lambda0 < (a-k2)/d2"),
        ("(u**,v**)", CONTROLLABLE, "zero control, heterogeneous attractor", hetero,
         "a = 1, d1 = d2 = d and lambda0 < 1/d"),
    ], r


# the same conditions phrased with the interval length
_LENGTH_TEXT = {
    "lambda0 >= a/d2": "L <= sqrt(d2/a)*pi",
    "lambda0 >= 1/d1": "L <= sqrt(d1)*pi",
    "lambda0 >= max(1/d1, a/d2)": "L <= min(sqrt(d1)*pi, sqrt(d2/a)*pi)",
    "k2 < a < 1/k1 and lambda0 < min((1-a*k1)/d1, (a-k2)/d2)":
        "k2 < a < 1/k1 and L > max(sqrt(d1/(1-a*k1))*pi, sqrt(d2/(a-k2))*pi)",
    "a < 1/k1 and lambda0 < (1-a*k1)/d1": "a < 1/k1 and L > sqrt(d1/(1-a*k1))*pi",
    "a > k2 and lambda0 < (a-k2)/d2": "a > k2 and L > sqrt(d2/(a-k2))*pi",
    "a = 1, d1 = d2 = d and lambda0 < 1/d": "a = 1, d1 = d2 = d and L > sqrt(d)*pi",
}


def _verdicts(p: Parameters, lam: float, tol: float, L: Optional[float]) -> list:
    clauses, rates = _clauses(p, lam, tol)
    if L is None:
        thresholds = dict(rates)
        thresholds["lambda0"] = lam
        if _near(p.d1, p.d2, tol):
            thresholds["1/d"] = 1.0 / p.d1
    else:
        thresholds = {
            "sqrt(d2/a)*pi": _length(rates["a/d2"]),
            "sqrt(d1)*pi": _length(rates["1/d1"]),
            "sqrt(d1/(1-a*k1))*pi": _length(rates["(1-a*k1)/d1"]),
            "sqrt(d2/(a-k2))*pi": _length(rates["(a-k2)/d2"]),
        }
        thresholds["min(sqrt(d1)*pi,sqrt(d2/a)*pi)"] = min(thresholds["sqrt(d1)*pi"], thresholds["sqrt(d2/a)*pi"])
        thresholds["max(sqrt(d1/(1-a*k1))*pi,sqrt(d2/(a-k2))*pi)"] = max(
            thresholds["sqrt(d1/(1-a*k1))*pi"], thresholds["sqrt(d2/(a-k2))*pi"])
        if _near(p.d1, p.d2, tol):
            thresholds["sqrt(d)*pi"] = math.sqrt(p.d1) * math.pi
        thresholds["L"] = L
    out = []
    for target in TARGETS:
        mine = [c for c in clauses if c[0] == target]
        fired = {kind: [c for c in mine if c[1] == kind and c[3] is True] for kind in (CONTROLLABLE, NOT_CONTROLLABLE)}
        near = any(c[3] is None for c in mine)
        if fired[CONTROLLABLE] and fired[NOT_CONTROLLABLE]:
            raise AssertionError(f"conflicting clauses for {target}")
        for status in (CONTROLLABLE, NOT_CONTROLLABLE):
            if fired[status]:
                _, _, name, _, text = fired[status][0]
                if L is not None:
                    text = _LENGTH_TEXT.get(text, text)
                out.append(Verdict(target, status, f"{name}: {text}", thresholds, near))
                break
        else:
            note = "threshold case" if near else "no sufficient condition holds"
            out.append(Verdict(target, INCONCLUSIVE, note, thresholds, near))
    return out


def check_all_targets(p: Parameters, tol: float = THRESHOLD_TOL) -> list:
    """Verdicts for the five targets on the interval (0, L)."""
    return _verdicts(p, math.pi**2 / p.L**2, tol, p.L)


def check_all_targets_nd(p: Parameters, lambda0: float, tol: float = THRESHOLD_TOL) -> list:
    """Verdicts with a given principal Dirichlet eigenvalue; ``p.L`` is ignored."""
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    return _verdicts(p, float(lambda0), tol, None)


def verdict_report(verdicts: list) -> str:
    lines = [v.line() for v in verdicts]
    if verdicts:
        for key, val in verdicts[0].thresholds.items():
            lines.append(f"threshold {key}={val!r}")
    return "\n".join(lines) + "\n"
