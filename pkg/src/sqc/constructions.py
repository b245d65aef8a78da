"""Replays of the computable steps inside the characterization proofs.

``partition_chain`` walks the points ``w_i = z + (i/n)(y - z)`` between z and y,
checks the monotone chain and the per-step lower bounds that strong
quasiconvexity forces, and compares their sum with its Riemann limit.
``saks_inequality_check`` evaluates the integrated form of the Dini bound on a
segment, and ``strict_quasiconvexity_probe`` looks for interior points that
are not strictly below the endpoint maximum.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conditions import DEFAULT_TOL, QuerySet, SampleSpec, SegmentQuery
from .errors import PremiseFails
from .function_model import FunctionSpec, SegmentRestriction, evaluate_many, segment_points

COLLINEARITY_TOL = 1e-10
IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class PartitionTrace:
    n: int
    gamma: float
    query: SegmentQuery
    points: np.ndarray  # (n+1, dim), w_0 = z ... w_n = y
    values: np.ndarray  # h(w_i)
    step_bounds: np.ndarray  # b_i, i = 0..n-1
    partial_sum: float  # S_n
    limit: float  # L = (gamma/4)(1 - t^2)|y - x|^2
    h_x: float

    @property
    def error(self) -> float:
        return self.limit - self.partial_sum

    @property
    def predicted_error(self) -> float:
        dyz = float(np.linalg.norm(np.subtract(self.query.y, self.points[0])))
        return self.gamma / 4.0 * dyz * dyz / self.n

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim = self.points.shape[1]
        w.writerow(["i"] + [f"w_{k + 1}" for k in range(dim)] + ["h_w", "b"])
        for i in range(self.n + 1):
            b = repr(float(self.step_bounds[i])) if i < self.n else ""
            w.writerow([i] + [repr(float(v)) for v in self.points[i]]
                       + [repr(float(self.values[i])), b])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "query": self.query.to_dict(),
            "partial_sum": self.partial_sum,
            "limit": self.limit,
            "error": self.error,
            "predicted_error": self.predicted_error,
        }


@dataclass(frozen=True)
class PartitionVerdict:
    """Outcome of a chain replay; margins are the most negative slacks seen."""

    chain_margin: float
    step_margin: float
    aggregate_margin: float
    collinearity_residual: float
    closed_form_residual: float
    error_law_residual: float
    tolerance: float

    @property
    def inequalities_pass(self) -> bool:
        return min(self.chain_margin, self.step_margin, self.aggregate_margin) >= -self.tolerance

    @property
    def identities_hold(self) -> bool:
        return (self.collinearity_residual <= COLLINEARITY_TOL
                and self.closed_form_residual <= IDENTITY_TOL
                and self.error_law_residual <= IDENTITY_TOL)

    @property
    def passed(self) -> bool:
        return self.inequalities_pass and self.identities_hold

    def to_dict(self) -> dict:
        return {
            "chain_margin": self.chain_margin,
            "step_margin": self.step_margin,
            "aggregate_margin": self.aggregate_margin,
            "collinearity_residual": self.collinearity_residual,
            "closed_form_residual": self.closed_form_residual,
            "error_law_residual": self.error_law_residual,
            "passed": self.passed,
        }


def partition_chain(f: FunctionSpec, q: SegmentQuery, gamma: float, n: int,
                    tol: float = DEFAULT_TOL) -> tuple:
    """Build the ``w_i`` chain for query ``q`` and check it.

    Returns ``(trace, verdict)``. Raises PremiseFails unless ``h(x) <= h(z) + tol``.
    Identity residuals are relative to ``max(1, |value|)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < q.t < 1:
        raise ValueError("partition_chain needs 0 < t < 1")
    x, y = np.array(q.x), np.array(q.y)
    z = segment_points(x, y, q.t)[0]
    h_x = float(evaluate_many(f, x)[0])
    h_z = float(evaluate_many(f, z)[0])
    if h_x > h_z + tol:
        raise PremiseFails(f"h(x) = {h_x} > h(z) = {h_z} at {q}")

    i = np.arange(n + 1)
    w = z + (i / n)[:, None] * (y - z)
    w[0], w[n] = z, y
    values = evaluate_many(f, w)
    dzx = float(np.linalg.norm(z - x))
    dyz = float(np.linalg.norm(y - z))
    dyx = float(np.linalg.norm(y - x))
    bounds = gamma / 2.0 * (1.0 / n) * dyz * (dzx + (i[:-1] / n) * dyz)
    s_n = float(np.sum(bounds))
    limit = gamma / 4.0 * (1.0 - q.t * q.t) * dyx * dyx

    chain = np.concatenate([[h_x], values])
    chain_margin = float(np.min(np.diff(chain)))
    step_margin = float(np.min(values[1:] - values[:-1] - bounds))
    aggregate_margin = float(values[n] - values[0] - s_n)

    collinear = np.linalg.norm(w - x, axis=1) - (dzx + (i / n) * dyz)
    closed = gamma / 2.0 * dyz * (dzx + dyz * (0.5 - 0.5 / n))
    predicted = gamma / 4.0 * dyz * dyz / n
    trace = PartitionTrace(n, float(gamma), q, w, values, bounds, s_n, limit, h_x)
    verdict = PartitionVerdict(
        chain_margin=chain_margin,
        step_margin=step_margin,
        aggregate_margin=aggregate_margin,
        collinearity_residual=float(np.max(np.abs(collinear))) / max(1.0, dyx),
        closed_form_residual=abs(s_n - closed) / max(1.0, abs(closed)),
        error_law_residual=abs((limit - s_n) - predicted) / max(1.0, abs(limit)),
        tolerance=tol,
    )
    return trace, verdict


@dataclass(frozen=True)
class SaksCheck:
    segment: SegmentRestriction
    t: float
    lhs: float  # g(1) - g(t)
    rhs: float  # (gamma/4)|y - x|^2 (1 - t^2)
    margin: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    def to_dict(self) -> dict:
        return {"t": self.t, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
                "passed": self.passed}


def saks_inequality_check(f: FunctionSpec, x, y, t: float, gamma: float,
                          tol: float = DEFAULT_TOL) -> SaksCheck:
    """``g(1) - g(t) >= (gamma/4)|y-x|^2 (1 - t^2)`` on the restriction through x and y."""
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    seg = SegmentRestriction(f, x, y)
    lhs = seg(1.0) - seg(t)
    rhs = gamma / 4.0 * seg.length ** 2 * (1.0 - t * t)
    return SaksCheck(seg, float(t), lhs, rhs, lhs - rhs, tol)


@dataclass(frozen=True)
class ProbeVerdict:
    passed: bool
    witness: Optional[tuple]  # (a, b, d) points
    excess: float  # max of h(d) - max{h(a), h(b)} over the sample
    n_triples: int


def strict_quasiconvexity_probe(f: FunctionSpec, spec: Optional[SampleSpec] = None,
                                tol: float = DEFAULT_TOL) -> ProbeVerdict:
    """Search sampled triples ``a != b``, ``d`` strictly inside ``[a, b]`` for
    ``h(d) >= max{h(a), h(b)} + tol``. ``tol = 0`` also flags flat stretches.
    """
    spec = (spec or SampleSpec()).resolved(f.dimension)
    qs = spec.queries(f.domain)
    keep = (qs.T < 1) & (qs.separation > 0)
    qs = QuerySet(qs.X[keep], qs.Y[keep], qs.T[keep])
    ha = evaluate_many(f, qs.X)
    hb = evaluate_many(f, qs.Y)
    hd = evaluate_many(f, qs.Z)
    excess = hd - np.maximum(ha, hb)
    worst = float(np.max(excess))
    if worst >= tol:
        order = qs.lex_order()
        i = int(order[excess[order] == worst][0])
        q = qs.query(i)
        return ProbeVerdict(False, (q.x, q.y, q.z), worst, len(qs))
    return ProbeVerdict(True, None, worst, len(qs))
