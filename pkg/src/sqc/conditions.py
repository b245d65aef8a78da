"""Pointwise and sampled checks of the strong quasiconvexity characterizations.

Every condition is computed by one vectorized kernel over a :class:`QuerySet`;
the single-query ``check_*`` functions run that kernel on a one-row set, so a
verdict never depends on whether it came from a suite or a direct call.

Margins are signed slacks: ``margin >= -tol`` passes. Conditional
characterizations whose premise fails at a query are *vacuous* there and carry
a margin of ``+inf``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dini import DEFAULT_SCHEDULE, StepSchedule, dini_batch
from .errors import IdentityError, OutOfDomain, QueryError, SqcError
from .function_model import FunctionSpec, evaluate_many, gradient_many, segment_points

DEFINITION = "definition"
IMPLICATION_FORM = "implication_form"
NO_INTEGRAL = "no_integral"
DINI = "dini"
GRADIENT = "gradient"
QUADRATIC_GROWTH = "quadratic_growth"
CONDITIONS = (DEFINITION, IMPLICATION_FORM, NO_INTEGRAL, DINI, GRADIENT, QUADRATIC_GROWTH)

SEGMENT_CONDITIONS = (DEFINITION, IMPLICATION_FORM, NO_INTEGRAL)
PAIR_CONDITIONS = (DINI, GRADIENT)

PASS, FAIL, VACUOUS, SKIPPED = "pass", "fail", "vacuous", "skipped"

DEFAULT_TOL = 1e-9
# Dini margins carry finite-step bias and cancellation noise far above DEFAULT_TOL.
DINI_TOL = 1e-5
DEFAULT_SEP_MIN = 1e-8
IDENTITY_TOL = 1e-12

_DEFAULT_GRID = {1: 33, 2: 17}


@dataclass(frozen=True)
class SegmentQuery:
    """The point ``z = x + t(y - x)`` on the segment from x to y."""

    x: tuple
    y: tuple
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        object.__setattr__(self, "y", tuple(float(v) for v in np.atleast_1d(self.y)))
        object.__setattr__(self, "t", float(self.t))
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same dimension")
        if not 0 < self.t <= 1:
            raise ValueError(f"t must lie in (0, 1], got {self.t}")

    @property
    def z(self) -> tuple:
        return tuple(segment_points(self.x, self.y, self.t)[0].tolist())

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(np.subtract(self.y, self.x)))

    def sort_key(self) -> tuple:
        return self.x + self.y + (self.t,)

    def to_dict(self) -> dict:
        return {"x": list(self.x), "y": list(self.y), "t": self.t}


@dataclass(frozen=True)
class ConditionVerdict:
    condition: str
    gamma: float
    status: str
    margin: float
    query: SegmentQuery
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.status != FAIL


@dataclass(frozen=True)
class SampleSpec:
    """Deterministic recipe for query sets.

    Grid points (``grid_per_axis`` per side, corners included) are paired in
    every ordered combination, then ``n_random`` seeded uniform pairs are
    appended; each pair is crossed with ``t = i/(t_grid + 1)``, ``i = 1..t_grid``,
    and ``t = 1``. ``grid_per_axis=None`` picks 33 in 1-D, 17 in 2-D and 5 above.
    """

    seed: int = 42
    n_random: int = 2000
    grid_per_axis: Optional[int] = None
    t_grid: int = 15
    sep_min: float = DEFAULT_SEP_MIN

    def __post_init__(self):
        if self.n_random < 0 or self.t_grid < 1:
            raise ValueError("n_random must be >= 0 and t_grid >= 1")
        if self.grid_per_axis is not None and self.grid_per_axis < 1:
            raise ValueError("grid_per_axis must be positive")

    def resolved(self, dimension: int) -> "SampleSpec":
        if self.grid_per_axis is not None:
            return self
        return replace(self, grid_per_axis=_DEFAULT_GRID.get(dimension, 5))

    def t_values(self) -> np.ndarray:
        m = self.t_grid
        return np.append(np.arange(1, m + 1) / (m + 1), 1.0)

    def _random(self, domain) -> tuple:
        rng = np.random.default_rng(self.seed)
        u = rng.random((self.n_random, 2, domain.dimension))
        span = domain.hi - domain.lo
        return domain.lo + u[:, 0] * span, domain.lo + u[:, 1] * span

    def points(self, domain) -> np.ndarray:
        """Grid points followed by every random endpoint."""
        spec = self.resolved(domain.dimension)
        rx, ry = spec._random(domain)
        return np.concatenate([domain.grid(spec.grid_per_axis), rx, ry])

    def pairs(self, domain) -> "QuerySet":
        """Ordered pairs only, with ``t = 1``."""
        spec = self.resolved(domain.dimension)
        g = domain.grid(spec.grid_per_axis)
        i, j = np.meshgrid(np.arange(len(g)), np.arange(len(g)), indexing="ij")
        keep = (i != j).ravel()
        rx, ry = spec._random(domain)
        X = np.concatenate([g[i.ravel()[keep]], rx])
        Y = np.concatenate([g[j.ravel()[keep]], ry])
        return QuerySet(X, Y, np.ones(len(X)))

    def queries(self, domain) -> "QuerySet":
        pairs = self.pairs(domain)
        t = self.t_values()
        n = len(pairs)
        return QuerySet(
            np.repeat(pairs.X, len(t), axis=0),
            np.repeat(pairs.Y, len(t), axis=0),
            np.tile(t, n),
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_random": self.n_random,
            "grid_per_axis": self.grid_per_axis,
            "t_grid": self.t_grid,
            "sep_min": self.sep_min,
        }


@dataclass(frozen=True)
class QuerySet:
    """Stacked queries: rows of X, Y (shape ``(m, n)``) and T (shape ``(m,)``)."""

    X: np.ndarray
    Y: np.ndarray
    T: np.ndarray

    @classmethod
    def of(cls, queries) -> "QuerySet":
        queries = list(queries)
        return cls(
            np.array([q.x for q in queries], dtype=float),
            np.array([q.y for q in queries], dtype=float),
            np.array([q.t for q in queries], dtype=float),
        )

    def __len__(self):
        return len(self.T)

    def __getitem__(self, idx) -> "QuerySet":
        return QuerySet(self.X[idx], self.Y[idx], self.T[idx])

    def concat(self, other: "QuerySet") -> "QuerySet":
        return QuerySet(np.concatenate([self.X, other.X]),
                        np.concatenate([self.Y, other.Y]),
                        np.concatenate([self.T, other.T]))

    def query(self, i: int) -> SegmentQuery:
        return SegmentQuery(self.X[i], self.Y[i], self.T[i])

    @property
    def Z(self) -> np.ndarray:
        return segment_points(self.X, self.Y, self.T)

    @property
    def separation(self) -> np.ndarray:
        return np.linalg.norm(self.Y - self.X, axis=1)

    def lex_order(self) -> np.ndarray:
        """Row indices sorted lexicographically by (x..., y..., t)."""
        keys = [self.T] + [self.Y[:, k] for k in range(self.Y.shape[1] - 1, -1, -1)]
        keys += [self.X[:, k] for k in range(self.X.shape[1] - 1, -1, -1)]
        return np.lexsort(keys)


@dataclass
class ConditionBatch:
    """Margins and statuses of one condition over a query set."""

    condition: str
    gamma: float
    tolerance: float
    queries: QuerySet
    margins: np.ndarray
    status: np.ndarray
    identity_residual: float = 0.0

    def counts(self) -> dict:
        return {s: int(np.sum(self.status == s)) for s in (PASS, FAIL, VACUOUS, SKIPPED)}

    def worst_index(self) -> Optional[int]:
        """Most negative margin over effective rows; ties go to the lexicographically first query."""
        live = (self.status == PASS) | (self.status == FAIL)
        if not live.any():
            return None
        lo = np.min(self.margins[live])
        order = self.queries.lex_order()
        hits = order[(self.margins[order] == lo) & live[order]]
        return int(hits[0])

    def verdict(self, i: int) -> ConditionVerdict:
        return ConditionVerdict(self.condition, self.gamma, str(self.status[i]),
                                float(self.margins[i]), self.queries.query(i), self.tolerance)

    def verdicts(self) -> list:
        return [self.verdict(i) for i in np.flatnonzero(self.status != SKIPPED)]


def _values(f: FunctionSpec, pts: np.ndarray, queries: QuerySet) -> np.ndarray:
    try:
        return evaluate_many(f, pts)
    except SqcError as exc:
        for i in range(len(pts)):
            try:
                evaluate_many(f, pts[i])
            except SqcError:
                raise QueryError(exc, queries.query(i)) from exc
        raise


def _status(margins, vacuous, skipped, tol) -> np.ndarray:
    status = np.where(margins >= -tol, PASS, FAIL).astype("<U8")
    status[vacuous] = VACUOUS
    status[skipped] = SKIPPED
    return status


def evaluate_condition(
    f: FunctionSpec,
    condition: str,
    queries: QuerySet,
    gamma: float,
    tol: float = DEFAULT_TOL,
    schedule: StepSchedule = DEFAULT_SCHEDULE,
    sep_min: float = DEFAULT_SEP_MIN,
    degenerate: str = SKIPPED,
) -> ConditionBatch:
    """Evaluate ``condition`` at every query.

    Premises are tested with ``tol``; Dini margins pass at ``-max(tol, DINI_TOL)``.
    Rows whose segment is shorter than ``sep_min`` get status ``degenerate``
    (``"skipped"`` in sampled runs, ``"vacuous"`` for direct checks). For
    ``quadratic_growth`` the rows are ``(x_bar, y)`` pairs and are never
    degenerate. Dini rows with no admissible step are skipped.
    """
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    X, Y, T = queries.X, queries.Y, queries.T
    m = len(queries)
    d = queries.separation
    d2 = d * d
    hx = _values(f, X, queries)
    hy = _values(f, Y, queries)
    vacuous = np.zeros(m, dtype=bool)
    skipped = np.zeros(m, dtype=bool)
    short = d < sep_min
    residual = 0.0

    if condition == QUADRATIC_GROWTH:
        margins = hy - hx - gamma / 4.0 * d2
        short = np.zeros(m, dtype=bool)
    elif condition in SEGMENT_CONDITIONS:
        Z = queries.Z
        hz = _values(f, Z, queries)
        if condition == DEFINITION:
            margins = np.maximum(hx, hy) - gamma / 2.0 * T * (1.0 - T) * d2 - hz
        elif condition == IMPLICATION_FORM:
            vacuous = hx > hy + tol
            dzx = np.linalg.norm(Z - X, axis=1)
            dyz = np.linalg.norm(Y - Z, axis=1)
            margins = hy - hz - gamma / 2.0 * dzx * dyz
        else:
            vacuous = hx > hz + tol
            lhs = (1.0 - T * T) * d2
            rhs = d2 - np.linalg.norm(Z - X, axis=1) ** 2
            scale = np.maximum(1.0, d2)
            res = np.abs(lhs - rhs) / scale
            residual = float(res.max()) if m else 0.0
            if residual > IDENTITY_TOL:
                i = int(np.argmax(res))
                raise IdentityError(
                    f"(1-t^2)|y-x|^2 != |y-x|^2 - |z-x|^2 at {queries.query(i)}: residual {residual:.3g}"
                )
            margins = hy - gamma / 4.0 * lhs - hz
    elif condition == DINI:
        vacuous = hx > hy + tol
        live = ~short & ~vacuous
        lower = np.full(m, np.nan)
        if live.any():
            batch = dini_batch(f, Y[live], (Y - X)[live], schedule, hx=hy[live])
            lower[live] = batch.lower
        skipped = live & ~np.isfinite(lower)
        margins = lower - gamma / 2.0 * d2
    else:
        vacuous = hx > hy + tol
        grad = gradient_many(f, Y)
        margins = np.einsum("ij,ij->i", grad, Y - X) - gamma / 2.0 * d2

    margins = np.asarray(margins, dtype=float)
    pass_tol = max(tol, DINI_TOL) if condition == DINI else tol
    if degenerate == VACUOUS:
        vacuous = vacuous | short
    else:
        skipped = skipped | short
    vacuous &= ~skipped
    margins = np.where(vacuous, np.inf, margins)
    margins = np.where(skipped, np.nan, margins)
    return ConditionBatch(condition, float(gamma), float(pass_tol), queries, margins,
                          _status(margins, vacuous, skipped, pass_tol), residual)


def _single(f, condition, x, y, t, gamma, tol, **kw) -> ConditionVerdict:
    q = SegmentQuery(x, y, t)
    batch = evaluate_condition(f, condition, QuerySet.of([q]), gamma, tol,
                               degenerate=VACUOUS, **kw)
    if batch.status[0] == SKIPPED:
        raise OutOfDomain(f"no admissible Dini step at {q}")
    return batch.verdict(0)


def check_definition(f, q: SegmentQuery, gamma, tol=DEFAULT_TOL, sep_min=DEFAULT_SEP_MIN):
    """``h(z) <= max{h(x), h(y)} - (gamma/2) t(1-t) |y-x|^2``."""
    return _single(f, DEFINITION, q.x, q.y, q.t, gamma, tol, sep_min=sep_min)


def check_implication_form(f, q: SegmentQuery, gamma, tol=DEFAULT_TOL, sep_min=DEFAULT_SEP_MIN):
    """``h(x) <= h(y)  =>  h(y) >= h(z) + (gamma/2) |z-x| |y-z|``."""
    return _single(f, IMPLICATION_FORM, q.x, q.y, q.t, gamma, tol, sep_min=sep_min)


def check_no_integral(f, q: SegmentQuery, gamma, tol=DEFAULT_TOL, sep_min=DEFAULT_SEP_MIN):
    """``h(x) <= h(z)  =>  h(z) <= h(y) - (gamma/4)(1-t^2)|y-x|^2``.

    Raises IdentityError if ``(1-t^2)|y-x|^2`` and ``|y-x|^2 - |z-x|^2`` differ
    by more than 1e-12 (relative to ``max(1, |y-x|^2)``).
    """
    return _single(f, NO_INTEGRAL, q.x, q.y, q.t, gamma, tol, sep_min=sep_min)


def check_dini(f, x, y, gamma, tol=DEFAULT_TOL, schedule=DEFAULT_SCHEDULE, sep_min=DEFAULT_SEP_MIN):
    """``h(x) <= h(y)  =>  h'_-(y; y-x) >= (gamma/2)|y-x|^2``, with the lower Dini derivative estimated."""
    return _single(f, DINI, x, y, 1.0, gamma, tol, schedule=schedule, sep_min=sep_min)


def check_gradient(f, x, y, gamma, tol=DEFAULT_TOL, sep_min=DEFAULT_SEP_MIN):
    """``h(x) <= h(y)  =>  <grad h(y), y-x> >= (gamma/2)|y-x|^2``; gamma=0 is Arrow-Enthoven."""
    return _single(f, GRADIENT, x, y, 1.0, gamma, tol, sep_min=sep_min)


def check_quadratic_growth(f, xbar, y, gamma, tol=DEFAULT_TOL):
    """``h(y) >= h(xbar) + (gamma/4)|y-xbar|^2``; the query stores ``xbar`` as x and t=1."""
    return _single(f, QUADRATIC_GROWTH, xbar, y, 1.0, gamma, tol)


@dataclass
class SuiteResult:
    gamma: float
    tolerance: float
    spec: SampleSpec
    batches: dict = field(default_factory=dict)
    xbar: Optional[tuple] = None

    def counts(self) -> dict:
        total = {PASS: 0, FAIL: 0, VACUOUS: 0, SKIPPED: 0}
        for batch in self.batches.values():
            for k, v in batch.counts().items():
                total[k] += v
        return total

    def worst(self) -> Optional[ConditionVerdict]:
        """Most negative margin across conditions (ties: first query, then condition order)."""
        best = None
        for cond in CONDITIONS:
            batch = self.batches.get(cond)
            if batch is None:
                continue
            i = batch.worst_index()
            if i is None:
                continue
            v = batch.verdict(i)
            if best is None or (v.margin, v.query.sort_key()) < (best.margin, best.query.sort_key()):
                best = v
        return best

    @property
    def any_failed(self) -> bool:
        return self.counts()[FAIL] > 0

    def verdicts(self) -> list:
        out = []
        for cond in CONDITIONS:
            if cond in self.batches:
                out.extend(self.batches[cond].verdicts())
        return out


def sample_minimizer(f: FunctionSpec, spec: SampleSpec) -> np.ndarray:
    """Best sampled point, used as x_bar when none is supplied."""
    pts = spec.points(f.domain)
    vals = evaluate_many(f, pts)
    return pts[int(np.argmin(vals))]


def run_suite(
    f: FunctionSpec,
    conditions,
    gamma: float,
    spec: Optional[SampleSpec] = None,
    tol: float = DEFAULT_TOL,
    schedule: StepSchedule = DEFAULT_SCHEDULE,
    xbar=None,
    jobs: int = 1,
) -> SuiteResult:
    """Run every requested condition over the query sets generated by ``spec``.

    Segment conditions use the full (pair x t) query set, the Dini and gradient
    conditions use the pairs alone, and quadratic growth pairs ``xbar`` (the
    best sampled point unless given) with every sample point.
    """
    spec = (spec or SampleSpec()).resolved(f.dimension)
    unknown = set(conditions) - set(CONDITIONS)
    if unknown:
        raise ValueError(f"unknown conditions {sorted(unknown)}")
    conditions = [c for c in CONDITIONS if c in set(conditions)]
    result = SuiteResult(float(gamma), float(tol), spec)
    if not conditions:
        return result

    segment_q = spec.queries(f.domain) if set(conditions) & set(SEGMENT_CONDITIONS) else None
    pair_q = spec.pairs(f.domain) if set(conditions) & set(PAIR_CONDITIONS) else None
    growth_q = None
    if QUADRATIC_GROWTH in conditions:
        xb = sample_minimizer(f, spec) if xbar is None else np.asarray(xbar, dtype=float)
        result.xbar = tuple(float(v) for v in xb)
        pts = spec.points(f.domain)
        pts = pts[np.linalg.norm(pts - xb, axis=1) >= spec.sep_min]
        growth_q = QuerySet(np.broadcast_to(xb, pts.shape).copy(), pts, np.ones(len(pts)))

    def job(cond):
        q = growth_q if cond == QUADRATIC_GROWTH else pair_q if cond in PAIR_CONDITIONS else segment_q
        return evaluate_condition(f, cond, q, gamma, tol, schedule, spec.sep_min)

    if jobs > 1 and len(conditions) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(job, conditions))
    else:
        batches = [job(c) for c in conditions]
    result.batches = dict(zip(conditions, batches))
    return result
