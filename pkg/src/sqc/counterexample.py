"""Mechanical audit of the polynomial counterexample to the "implies quasiconvex" step.

The lemma instance is ``a = 4``, ``kappa(t) = 0`` on ``[0, 4)`` with
``kappa(4) = 1``, and ``g(t) = -9 + (t-1)^2 (t-3)^2``. The audit confirms that
every hypothesis of the lemma holds on a grid (endpoints included exactly),
that g nevertheless fails quasiconvexity, and that the lemma's *conclusion*
still holds for this instance: what breaks is the intermediate claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NoViolationFound

LEVEL_TOL = 1e-9


def _kappa(t):
    t = np.asarray(t, dtype=float)
    return np.where(t == 4.0, 1.0, 0.0)


def _g(t):
    t = np.asarray(t, dtype=float)
    return -9.0 + (t - 1.0) ** 2 * (t - 3.0) ** 2


def _g_prime(t):
    t = np.asarray(t, dtype=float)
    return 2.0 * (t - 1.0) * (t - 3.0) * (2.0 * t - 4.0)


@dataclass(frozen=True)
class LemmaInstance:
    a: float = 4.0
    kappa: Callable = _kappa  # exact piecewise: nonzero only at t == a
    g: Callable = _g
    g_prime: Callable = _g_prime

    def grid(self, n: int) -> np.ndarray:
        """``n`` equispaced points on ``[0, a]`` with both endpoints exact."""
        pts = np.linspace(0.0, self.a, n)
        pts[0], pts[-1] = 0.0, self.a
        return pts


@dataclass(frozen=True)
class SubVerdict:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def kappa_integral(inst: LemmaInstance, n: int = 400) -> dict:
    """Left and midpoint Riemann sums of kappa.

    Both avoid the single point where kappa is nonzero, and the Lebesgue
    integral is 0 regardless, so the reported value is exactly 0.
    """
    edges = np.linspace(0.0, inst.a, n + 1)
    h = inst.a / n
    left = float(np.sum(inst.kappa(edges[:-1])) * h)
    mid = float(np.sum(inst.kappa(0.5 * (edges[:-1] + edges[1:]))) * h)
    return {"left_sum": left, "midpoint_sum": mid, "value": 0.0}


def verify_hypotheses(inst: LemmaInstance = LemmaInstance(), v_grid: int = 401) -> list:
    grid = inst.grid(v_grid)
    out = []

    k = inst.kappa(grid)
    out.append(SubVerdict("kappa_nonnegative", bool(np.all(k >= 0) and inst.kappa(0.0) == 0.0),
                          {"min": float(k.min()), "kappa_0": float(inst.kappa(0.0)),
                           "kappa_a": float(inst.kappa(inst.a)),
                           "nonzero_only_at": grid[k != 0].tolist()}))

    integral = kappa_integral(inst, v_grid - 1)
    out.append(SubVerdict("kappa_integral_zero",
                          integral["left_sum"] == 0.0 and integral["midpoint_sum"] == 0.0,
                          integral))

    g0, ga = float(inst.g(0.0)), float(inst.g(inst.a))
    out.append(SubVerdict("endpoint_values", g0 == 0.0 and g0 >= ga, {"g_0": g0, "g_a": ga}))

    gv = inst.g(grid)
    level = grid[gv >= ga - LEVEL_TOL]
    out.append(SubVerdict("level_set_endpoints_only",
                          bool(np.all((level == 0.0) | (level == inst.a))),
                          {"points": level.tolist()}))

    worst = np.inf
    witness = None
    for u in (0.0, inst.a):
        diff = u - grid
        lhs = float(inst.g_prime(u)) * diff
        rhs = inst.kappa(np.abs(diff)) * np.abs(diff)
        slack = lhs - rhs
        j = int(np.argmin(slack))
        if slack[j] < worst:
            worst, witness = float(slack[j]), {"u": u, "v": float(grid[j])}
    out.append(SubVerdict("derivative_inequality", worst >= 0.0,
                          {"min_slack": worst + 0.0, "at": witness,
                           "g_prime_0": float(inst.g_prime(0.0)),
                           "g_prime_a": float(inst.g_prime(inst.a))}))
    return out


@dataclass(frozen=True)
class Violation:
    u1: float
    u2: float
    mid: float
    violation: float  # h(mid) - max{h(u1), h(u2)}

    def to_dict(self) -> dict:
        return {"u1": self.u1, "u2": self.u2, "mid": self.mid, "violation": self.violation}


def grid_violation_search(h: Callable, lo: float, hi: float, n: int = 401) -> Violation:
    """Largest ``h(d) - max{h(a), h(b)}`` over grid triples ``a < d < b``.

    For each interior d the best flanking points are the minimizers of h on
    either side, which keeps the search linear in the grid size.
    """
    s = np.linspace(lo, hi, n)
    v = np.asarray(h(s), dtype=float)
    left_arg = np.zeros(n, dtype=int)
    right_arg = np.full(n, n - 1)
    for j in range(1, n):
        left_arg[j] = left_arg[j - 1] if v[left_arg[j - 1]] <= v[j - 1] else j - 1
    for j in range(n - 2, -1, -1):
        right_arg[j] = right_arg[j + 1] if v[right_arg[j + 1]] < v[j + 1] else j + 1
    j = np.arange(1, n - 1)
    excess = v[j] - np.maximum(v[left_arg[j]], v[right_arg[j]])
    k = int(np.argmax(excess))
    if excess[k] <= 0:
        raise NoViolationFound(f"no quasiconvexity violation on a {n}-point grid of [{lo}, {hi}]")
    jj = j[k]
    return Violation(float(s[left_arg[jj]]), float(s[right_arg[jj]]), float(s[jj]), float(excess[k]))


@dataclass(frozen=True)
class ViolationReport:
    known: Violation
    found: Violation


def find_quasiconvexity_violation(inst: LemmaInstance = LemmaInstance(), grid: int = 401) -> ViolationReport:
    u1, u2, mid = 1.0, 3.0, 2.0
    known = Violation(u1, u2, mid, float(inst.g(mid) - max(inst.g(u1), inst.g(u2))))
    return ViolationReport(known, grid_violation_search(inst.g, 0.0, inst.a, grid))


@dataclass(frozen=True)
class ConclusionReport:
    holds: bool
    integral: float
    max_value: float  # max over the grid of g(lambda a) + lambda(1 - lambda) * integral
    argmax_lambda: float

    def to_dict(self) -> dict:
        return {"holds": self.holds, "integral": self.integral, "max_value": self.max_value,
                "argmax_lambda": self.argmax_lambda}


def lemma_conclusion_status(inst: LemmaInstance = LemmaInstance(), lambda_grid: int = 401) -> ConclusionReport:
    """Evaluate ``g(lambda a) <= -lambda(1-lambda) * integral(kappa)`` on a lambda grid.

    With the integral equal to 0 this reads ``g(4 lambda) <= 0``, which holds.
    """
    lam = np.linspace(0.0, 1.0, lambda_grid)
    lam[-1] = 1.0
    integral = kappa_integral(inst)["value"]
    slack = inst.g(lam * inst.a) + lam * (1.0 - lam) * integral
    k = int(np.argmax(slack))
    return ConclusionReport(bool(np.all(slack <= LEVEL_TOL)), integral, float(slack[k]), float(lam[k]))


@dataclass
class AuditReport:
    hypotheses: list
    violation: ViolationReport
    conclusion: ConclusionReport
    values: dict

    @property
    def reproduced(self) -> bool:
        return all(v.passed for v in self.hypotheses) and self.violation.known.violation > 0

    def to_dict(self) -> dict:
        return {
            "reproduced": self.reproduced,
            "hypotheses": [v.to_dict() for v in self.hypotheses],
            "violation_known": self.violation.known.to_dict(),
            "violation_grid": self.violation.found.to_dict(),
            "lemma_conclusion": self.conclusion.to_dict(),
            "values": self.values,
        }


def run_audit(v_grid: int = 401, inst: LemmaInstance = LemmaInstance()) -> AuditReport:
    """Full refutation: hypotheses, violation (known triple and blind search), conclusion."""
    values = {
        "g(0)": float(inst.g(0.0)),
        "g(1)": float(inst.g(1.0)),
        "g(2)": float(inst.g(2.0)),
        "g(3)": float(inst.g(3.0)),
        "g(4)": float(inst.g(4.0)),
        "g'(0)": float(inst.g_prime(0.0)),
        "g'(4)": float(inst.g_prime(4.0)),
    }
    return AuditReport(
        verify_hypotheses(inst, v_grid),
        find_quasiconvexity_violation(inst, max(v_grid, 3)),
        lemma_conclusion_status(inst, v_grid),
        values,
    )
