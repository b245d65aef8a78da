"""Finite-step approximation of upper and lower Dini derivatives.

The limsup / liminf of ``(h(x + t a) - h(x)) / t`` as ``t -> 0+`` is replaced by
the max / min of the quotient over the last ``tail`` steps of a geometric
schedule ``t_k = t0 * rho**k``. That is exact only on well-behaved classes
(smooth functions, one-sided kinks, bounded oscillation at the sampled scales);
nothing is claimed for arbitrary functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteValue, OutOfDomain
from .function_model import FunctionSpec, evaluate_many, restrict_to_segment, segment_points

MIN_STEP = 1e-12


@dataclass(frozen=True)
class StepSchedule:
    t0: float = 1e-2
    rho: float = 0.5
    K: int = 20
    tail: int = 4

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.K < 1 or not 1 <= self.tail <= self.K:
            raise ValueError("need K >= 1 and 1 <= tail <= K")
        if not self.t0 * self.rho ** (self.K - 1) > MIN_STEP:
            raise ValueError("smallest step t0*rho**(K-1) must stay above 1e-12")

    def steps(self, t0: float | None = None) -> np.ndarray:
        return (self.t0 if t0 is None else t0) * self.rho ** np.arange(self.K)

    def to_dict(self) -> dict:
        return {"t0": self.t0, "rho": self.rho, "K": self.K, "tail": self.tail}


DEFAULT_SCHEDULE = StepSchedule()


@dataclass(frozen=True)
class DiniEstimate:
    point: np.ndarray
    direction: np.ndarray
    upper: float
    lower: float
    quotients: np.ndarray
    schedule: StepSchedule
    t0_used: float


@dataclass(frozen=True)
class DiniBatch:
    """Row-wise Dini estimates; rows with ``admissible == False`` hold NaN."""

    upper: np.ndarray
    lower: np.ndarray
    quotients: np.ndarray  # (m, K)
    t0_used: np.ndarray
    admissible: np.ndarray


def admissible_t0(f: FunctionSpec, X, A, schedule: StepSchedule = DEFAULT_SCHEDULE) -> np.ndarray:
    """Largest ``t0 * rho**j`` keeping ``x + t0 a`` in the box, row by row; NaN if none > 1e-12."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    t0 = np.full(X.shape[0], schedule.t0)
    shrinking = ~f.domain.contains(X + t0[:, None] * A)
    while shrinking.any():
        t0[shrinking] *= schedule.rho
        shrinking &= t0 > MIN_STEP
        idx = np.flatnonzero(shrinking)
        shrinking[idx] = ~f.domain.contains(X[idx] + t0[idx, None] * A[idx])
    return np.where(t0 > MIN_STEP, t0, np.nan)


def dini_batch(f: FunctionSpec, X, A, schedule: StepSchedule = DEFAULT_SCHEDULE,
               hx=None) -> DiniBatch:
    """Dini estimates at every row of ``X`` along the matching row of ``A``.

    Rows whose direction leaves the box immediately are marked inadmissible
    instead of raising, so sampled runs can count and skip them.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m = X.shape[0]
    t0 = admissible_t0(f, X, A, schedule)
    admissible = np.isfinite(t0)
    K = schedule.K
    quotients = np.full((m, K), np.nan)
    if admissible.any():
        Xa, Aa, ta = X[admissible], A[admissible], t0[admissible]
        h0 = evaluate_many(f, Xa) if hx is None else np.asarray(hx, dtype=float)[admissible]
        steps = ta[:, None] * schedule.rho ** np.arange(K)[None, :]  # (ma, K)
        pts = Xa[:, None, :] + steps[:, :, None] * Aa[:, None, :]
        vals = evaluate_many(f, pts.reshape(-1, X.shape[1])).reshape(steps.shape)
        quotients[admissible] = (vals - h0[:, None]) / steps
    window = quotients[:, K - schedule.tail:]
    upper = np.max(window, axis=1)
    lower = np.min(window, axis=1)
    return DiniBatch(upper, lower, quotients, t0, admissible)


def dini(f: FunctionSpec, x, a, schedule: StepSchedule = DEFAULT_SCHEDULE) -> DiniEstimate:
    """Upper and lower Dini derivative estimates of ``f`` at ``x`` in direction ``a``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    a = np.asarray(a, dtype=float).reshape(-1)
    hx = evaluate_many(f, x)  # validates x, raises OutOfDomain / NonFiniteValue
    batch = dini_batch(f, x, a, schedule, hx=hx)
    if not batch.admissible[0]:
        raise OutOfDomain(f"no admissible step > {MIN_STEP} from {x.tolist()} along {a.tolist()}")
    if not np.all(np.isfinite(batch.quotients[0])):
        raise NonFiniteValue("non-finite difference quotient")
    return DiniEstimate(
        point=x,
        direction=a,
        upper=float(batch.upper[0]),
        lower=float(batch.lower[0]),
        quotients=batch.quotients[0],
        schedule=schedule,
        t0_used=float(batch.t0_used[0]),
    )


def dini_pair_identity_check(f: FunctionSpec, x, y, s: float,
                             schedule: StepSchedule = DEFAULT_SCHEDULE) -> tuple:
    """Both sides of ``h'_+(x_s; x_s - x) = s * g'_+(s)`` with ``g`` the segment restriction.

    The left side differentiates ``h`` in the ambient space, the right side
    differentiates the one-variable restriction; callers compare the two.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    if np.array_equal(x, y):
        raise ValueError("x and y must differ")
    xs = segment_points(x, y, s)[0]
    lhs = dini(f, xs, xs - x, schedule).upper
    g = restrict_to_segment(f, x, y).as_function()
    rhs = s * dini(g, [s], [1.0], schedule).upper
    return lhs, rhs
