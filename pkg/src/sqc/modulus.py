"""Empirical moduli: the largest gamma each characterization tolerates on a sample.

Each characterization is linear in gamma, so on every effective query it can be
solved for the largest admissible gamma (the per-query *ratio*). The estimate is
the infimum of those ratios clamped at zero. Being an infimum over a finite
sample it is an upper bound on the true modulus, never a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import conditions as C
from .conditions import QuerySet, SampleSpec, SegmentQuery
from .dini import DEFAULT_SCHEDULE, StepSchedule, dini_batch
from .errors import NoEffectiveQueries
from .function_model import FunctionSpec, evaluate_many

NOT_QUASICONVEX = "not_quasiconvex"
NEGATIVE_INFIMUM = "negative_infimum"


@dataclass(frozen=True)
class ModulusEstimate:
    condition: str
    gamma_hat: float
    raw_infimum: float
    witness: SegmentQuery
    n_effective: int
    spec: Optional[SampleSpec]
    flags: frozenset = field(default_factory=frozenset)

    @property
    def not_quasiconvex(self) -> bool:
        return NOT_QUASICONVEX in self.flags

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "gamma_hat": self.gamma_hat,
            "raw_infimum": self.raw_infimum,
            "witness": self.witness.to_dict(),
            "n_effective": self.n_effective,
            "flags": sorted(self.flags),
            "label": "empirical",
        }


def ratios(
    f: FunctionSpec,
    condition: str,
    queries: QuerySet,
    tol: float = C.DEFAULT_TOL,
    schedule: StepSchedule = DEFAULT_SCHEDULE,
    sep_min: float = C.DEFAULT_SEP_MIN,
) -> np.ndarray:
    """Per-query largest admissible gamma; NaN where the query is not effective.

    ==================  ==========================================  =======================
    condition           ratio                                       effective when
    ==================  ==========================================  =======================
    definition          2(max{h(x),h(y)} - h(z)) / (t(1-t)|y-x|^2)  0 < t < 1
    no_integral         4(h(y) - h(z)) / ((1-t^2)|y-x|^2)           0 < t < 1, h(x) <= h(z)
    dini                2 h'_-(y; y-x) / |y-x|^2                    h(x) <= h(y), step fits
    quadratic_growth    4(h(y) - h(x)) / |y-x|^2                    always (x is x_bar)
    ==================  ==========================================  =======================

    Every condition also requires ``|y-x| >= sep_min``.
    """
    X, Y, T = queries.X, queries.Y, queries.T
    d2 = queries.separation ** 2
    live = queries.separation >= sep_min
    hx = evaluate_many(f, X)
    hy = evaluate_many(f, Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        if condition == C.DEFINITION:
            live &= (T > 0) & (T < 1)
            hz = evaluate_many(f, queries.Z)
            r = 2.0 * (np.maximum(hx, hy) - hz) / (T * (1.0 - T) * d2)
        elif condition == C.NO_INTEGRAL:
            hz = evaluate_many(f, queries.Z)
            live &= (T > 0) & (T < 1) & (hx <= hz + tol)
            r = 4.0 * (hy - hz) / ((1.0 - T * T) * d2)
        elif condition == C.DINI:
            live &= hx <= hy + tol
            r = np.full(len(queries), np.nan)
            if live.any():
                batch = dini_batch(f, Y[live], (Y - X)[live], schedule, hx=hy[live])
                r[live] = 2.0 * batch.lower / d2[live]
            live &= np.isfinite(r)
        elif condition == C.QUADRATIC_GROWTH:
            r = 4.0 * (hy - hx) / d2
        else:
            raise ValueError(f"no modulus estimator for condition {condition!r}")
    return np.where(live, r, np.nan)


def estimate_from_queries(
    f: FunctionSpec,
    condition: str,
    queries: QuerySet,
    spec: Optional[SampleSpec] = None,
    tol: float = C.DEFAULT_TOL,
    schedule: StepSchedule = DEFAULT_SCHEDULE,
) -> ModulusEstimate:
    sep_min = spec.sep_min if spec is not None else C.DEFAULT_SEP_MIN
    r = ratios(f, condition, queries, tol, schedule, sep_min)
    live = np.isfinite(r)
    if not live.any():
        raise NoEffectiveQueries(f"no effective queries for {condition} on {f.id}")
    raw = float(np.min(r[live]))
    order = queries.lex_order()
    i = int(order[(r[order] == raw)][0])
    flags = set()
    if raw < 0:
        flags.add(NEGATIVE_INFIMUM)
        if condition == C.DEFINITION:
            flags.add(NOT_QUASICONVEX)
    return ModulusEstimate(condition, max(0.0, raw), raw, queries.query(i),
                           int(live.sum()), spec, frozenset(flags))


def ratio_at(f: FunctionSpec, condition: str, witness: SegmentQuery,
             tol: float = C.DEFAULT_TOL, schedule: StepSchedule = DEFAULT_SCHEDULE) -> float:
    """Recompute the ratio at a single query (used to audit stored witnesses)."""
    return float(ratios(f, condition, QuerySet.of([witness]), tol, schedule, 0.0)[0])


def modulus_definition(f: FunctionSpec, spec: Optional[SampleSpec] = None,
                       tol: float = C.DEFAULT_TOL) -> ModulusEstimate:
    spec = (spec or SampleSpec()).resolved(f.dimension)
    return estimate_from_queries(f, C.DEFINITION, spec.queries(f.domain), spec, tol)


def modulus_no_integral(f: FunctionSpec, spec: Optional[SampleSpec] = None,
                        tol: float = C.DEFAULT_TOL) -> ModulusEstimate:
    spec = (spec or SampleSpec()).resolved(f.dimension)
    return estimate_from_queries(f, C.NO_INTEGRAL, spec.queries(f.domain), spec, tol)


def modulus_dini(f: FunctionSpec, spec: Optional[SampleSpec] = None,
                 schedule: StepSchedule = DEFAULT_SCHEDULE,
                 tol: float = C.DEFAULT_TOL) -> ModulusEstimate:
    spec = (spec or SampleSpec()).resolved(f.dimension)
    return estimate_from_queries(f, C.DINI, spec.pairs(f.domain), spec, tol, schedule)


def growth_queries(f: FunctionSpec, xbar, spec: SampleSpec) -> QuerySet:
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    f.domain.contains(xbar)
    pts = spec.points(f.domain)
    return QuerySet(np.broadcast_to(xbar, pts.shape).copy(), pts, np.ones(len(pts)))


def modulus_growth(f: FunctionSpec, xbar, spec: Optional[SampleSpec] = None) -> ModulusEstimate:
    """Largest gamma with ``h(xbar) + (gamma/4)|y - xbar|^2 <= h(y)`` on every sampled y."""
    spec = (spec or SampleSpec()).resolved(f.dimension)
    evaluate_many(f, np.asarray(xbar, dtype=float).reshape(-1))
    return estimate_from_queries(f, C.QUADRATIC_GROWTH, growth_queries(f, xbar, spec), spec)


ESTIMATORS = (C.DEFINITION, C.NO_INTEGRAL, C.DINI, C.QUADRATIC_GROWTH)
