"""Bracketing minimization of segment restrictions.

Under strict quasiconvexity a segment restriction is unimodal, so comparing two
interior probes always tells which outer third cannot contain the minimizer.
The final bracket is therefore a distance certificate for the minimizer; the
quadratic growth bound is only used afterwards as a consistency diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .conditions import DEFAULT_TOL
from .errors import NotUnimodal
from .function_model import SegmentRestriction


@dataclass(frozen=True)
class GrowthSample:
    s: float
    implied_radius: float  # 2 sqrt(max(0, g(s) - v) / gamma), ambient units
    distance: float  # |s - c| * |y - x|
    consistent: bool


@dataclass(frozen=True)
class BracketResult:
    segment: SegmentRestriction
    lower: float
    upper: float
    candidate: float
    value: float
    evaluations: int
    budget_exhausted: bool = False
    history: tuple = ()  # (l, u, m1, m2, g(m1), g(m2)) per iteration
    gamma: Optional[float] = None
    growth: tuple = ()
    diag_tol: float = 1e-6

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def certificate_radius(self) -> float:
        return 0.5 * (self.upper - self.lower)

    @property
    def gamma_too_large(self) -> bool:
        return any(not g.consistent for g in self.growth)

    @property
    def point(self) -> np.ndarray:
        return self.segment.points(self.candidate)[0]

    def to_dict(self) -> dict:
        out = {
            "bracket": [self.lower, self.upper],
            "candidate": self.candidate,
            "point": self.point.tolist(),
            "value": self.value,
            "evaluations": self.evaluations,
            "certificate_radius": self.certificate_radius,
            "budget_exhausted": self.budget_exhausted,
        }
        if self.gamma is not None:
            out["growth"] = {
                "gamma": self.gamma,
                "diag_tol": self.diag_tol,
                "gamma_too_large": self.gamma_too_large,
                "samples": [
                    {"s": g.s, "implied_radius": g.implied_radius, "distance": g.distance,
                     "consistent": g.consistent}
                    for g in self.growth
                ],
            }
        return out


def evaluation_bound(target_width: float) -> int:
    """Evaluations needed to shrink [0, 1] below ``target_width`` (two per iteration, plus the candidate)."""
    return 2 * math.ceil(math.log(1.0 / target_width) / math.log(1.5)) + 2


@dataclass(frozen=True)
class UnimodalVerdict:
    passed: bool
    witness: Optional[tuple]  # (s_left, s_mid, s_right)
    excess: float
    probes: int


def validate_unimodal(seg: SegmentRestriction, probes: int = 33,
                      tol: float = DEFAULT_TOL) -> UnimodalVerdict:
    """Equispaced scan for an interior value above both flanking minima by more than ``tol``."""
    if probes < 3:
        raise ValueError("need at least 3 probes")
    s = np.linspace(0.0, 1.0, probes)
    s[-1] = 1.0
    v = seg(s)
    best = -np.inf
    witness = None
    for j in range(1, probes - 1):
        a = int(np.argmin(v[:j]))
        b = j + 1 + int(np.argmin(v[j + 1:]))
        excess = v[j] - max(v[a], v[b])
        if excess > best:
            best, witness = float(excess), (float(s[a]), float(s[j]), float(s[b]))
    if best > tol:
        return UnimodalVerdict(False, witness, best, probes)
    return UnimodalVerdict(True, None, best, probes)


def minimize_segment(
    seg: SegmentRestriction,
    target_width: float = 1e-6,
    max_eval: int = 1000,
    validate: bool = False,
    probes: int = 33,
    tol: float = DEFAULT_TOL,
) -> BracketResult:
    """Ternary bracket search for the minimizer of ``g`` on ``[0, 1]``.

    Each iteration probes ``l + (u-l)/3`` and ``l + 2(u-l)/3`` and drops the
    outer third next to the larger value (the right third on ties). Stops once
    ``u - l <= target_width``; if the budget runs out first the current bracket
    is returned with ``budget_exhausted`` set.

    With ``validate=True`` a unimodality scan runs first and NotUnimodal is
    raised on failure.
    """
    if not 0 < target_width < 1:
        raise ValueError("target_width must lie in (0, 1)")
    if validate:
        verdict = validate_unimodal(seg, probes, tol)
        if not verdict.passed:
            raise NotUnimodal(verdict)
    lo, hi = 0.0, 1.0
    evals = 0
    history = []
    exhausted = False
    while hi - lo > target_width:
        if evals + 3 > max_eval:
            exhausted = True
            break
        m1 = lo + (hi - lo) / 3.0
        m2 = lo + 2.0 * (hi - lo) / 3.0
        g1, g2 = seg(m1), seg(m2)
        evals += 2
        history.append((lo, hi, m1, m2, g1, g2))
        if g1 > g2:
            lo = m1
        else:
            hi = m2
    c = 0.5 * (lo + hi)
    v = seg(c)
    evals += 1
    return BracketResult(seg, lo, hi, c, v, evals, exhausted, tuple(history))


def replay(res: BracketResult) -> bool:
    """Re-derive every bracket update from its recorded comparison."""
    lo, hi = 0.0, 1.0
    for (l, u, m1, m2, g1, g2) in res.history:
        if (l, u) != (lo, hi) or res.segment(m1) != g1 or res.segment(m2) != g2:
            return False
        lo, hi = (m1, hi) if g1 > g2 else (lo, m2)
    return (lo, hi) == (res.lower, res.upper)


def growth_diagnostics(res: BracketResult, gamma: float, samples: int = 21,
                       diag_tol: float = 1e-6) -> BracketResult:
    """Compare the quadratic growth radius with the actual distance to the candidate.

    At sample ``s`` the implied radius is ``2 sqrt(max(0, g(s) - v) / gamma)``
    with ``v = g(c)``. Since ``v`` is at least the true minimum value, the radius
    can only understate the true growth radius, so this is a consistency check:
    a sample with ``|s - c||y - x| > r(s) + certificate_radius|y - x| + diag_tol``
    means gamma is too large for this function (or the bracket failed).
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    length = res.segment.length
    s = np.linspace(0.0, 1.0, samples)
    s[-1] = 1.0
    vals = res.segment(s)
    out = []
    for si, gi in zip(s, vals):
        r = 2.0 * math.sqrt(max(0.0, gi - res.value) / gamma)
        dist = float(abs(si - res.candidate) * length)
        ok = dist <= r + res.certificate_radius * length + diag_tol
        out.append(GrowthSample(float(si), r, dist, ok))
    out.append(GrowthSample(res.candidate, 0.0, 0.0, True))
    return replace(res, gamma=float(gamma), growth=tuple(out), diag_tol=diag_tol)
