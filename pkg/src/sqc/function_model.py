"""Functions on box domains, their restrictions to line segments, and the catalog.

Every evaluator is vectorized over a stack of points of shape ``(m, n)``; the
scalar entry points wrap that path so a value never depends on which entry
point produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import expr as _expr
from .errors import DimensionMismatch, NoGradient, NonFiniteValue, OutOfDomain

STRONGLY_QUASICONVEX = "strongly_quasiconvex"
QUASICONVEX = "quasiconvex"
NOT_QUASICONVEX = "not_quasiconvex"


@dataclass(frozen=True)
class DomainBox:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper) or not lower:
            raise DimensionMismatch("lower and upper bounds must have the same positive length")
        for lo, hi in zip(lower, upper):
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise ValueError(f"invalid box side [{lo}, {hi}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, lo: float, hi: float, dimension: int) -> "DomainBox":
        return cls((lo,) * dimension, (hi,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    def contains(self, pts) -> np.ndarray:
        """Row-wise membership in the closed box."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def grid(self, per_axis: int) -> np.ndarray:
        """Tensor grid with ``per_axis`` points per side, corners included."""
        axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}


@dataclass(frozen=True)
class GroundTruth:
    known_modulus: Optional[float] = None
    known_minimizer: Optional[tuple] = None
    known_flags: frozenset = frozenset()

    def to_dict(self) -> dict:
        return {
            "known_modulus": self.known_modulus,
            "known_minimizer": None if self.known_minimizer is None else list(self.known_minimizer),
            "known_flags": sorted(self.known_flags),
        }


@dataclass(frozen=True)
class FunctionSpec:
    """A real-valued function on a box.

    ``body`` maps an ``(m, n)`` array of points to ``m`` values and ``gradient``
    (when present) maps it to an ``(m, n)`` array. ``smooth`` marks entries that
    are continuously differentiable on the whole box.
    """

    id: str
    domain: DomainBox
    body: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ground_truth: Optional[GroundTruth] = None
    source: str = "builtin"
    smooth: bool = False
    ast: object = field(default=None, compare=False, repr=False)

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def __call__(self, p):
        return evaluate(self, p)

    def with_domain(self, domain: DomainBox) -> "FunctionSpec":
        """Same body on another box; ground truth is dropped since it may not carry over."""
        if domain.dimension != self.dimension:
            raise DimensionMismatch(f"{self.id} has dimension {self.dimension}")
        return replace(self, domain=domain, ground_truth=None)


def _as_points(f: FunctionSpec, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[np.newaxis, :]
    if pts.ndim != 2 or pts.shape[1] != f.dimension:
        raise DimensionMismatch(
            f"{f.id} takes points of dimension {f.dimension}, got shape {pts.shape}"
        )
    inside = f.domain.contains(pts)
    if not inside.all():
        bad = pts[np.argmin(inside)]
        raise OutOfDomain(f"point {bad.tolist()} lies outside the domain of {f.id}")
    return pts


def evaluate_many(f: FunctionSpec, pts) -> np.ndarray:
    """Evaluate ``f`` at every row of ``pts``."""
    pts = _as_points(f, pts)
    values = np.asarray(f.body(pts), dtype=float).reshape(pts.shape[0])
    if not np.all(np.isfinite(values)):
        bad = pts[np.argmin(np.isfinite(values))]
        raise NonFiniteValue(f"{f.id} is not finite at {bad.tolist()}")
    return values


def evaluate(f: FunctionSpec, p) -> float:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise DimensionMismatch("evaluate takes a single point; use evaluate_many for stacks")
    return float(evaluate_many(f, p)[0])


def gradient_many(f: FunctionSpec, pts) -> np.ndarray:
    if f.gradient is None:
        raise NoGradient(f"{f.id} carries no analytic gradient")
    pts = _as_points(f, pts)
    return np.asarray(f.gradient(pts), dtype=float).reshape(pts.shape)


def segment_points(x, y, t) -> np.ndarray:
    """Rows ``x + t(y - x)``; rows with ``t == 1`` return ``y`` bit-for-bit."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    t = np.asarray(t, dtype=float).reshape(-1, 1)
    z = x + t * (y - x)
    return np.where(t == 1.0, y, z)


class SegmentRestriction:
    """``g(s) = h(x + s(y - x))``, the one-variable slice of ``base`` through x and y."""

    def __init__(self, base: FunctionSpec, x, y):
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        _as_points(base, np.stack([x, y]))
        self.base = base
        self.x = x
        self.y = y

    @property
    def length(self) -> float:
        """Euclidean length of the segment, used to convert s-distances to ambient ones."""
        return float(np.linalg.norm(self.y - self.x))

    def points(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        n = s.shape[0]
        return segment_points(np.broadcast_to(self.x, (n, self.x.size)),
                              np.broadcast_to(self.y, (n, self.y.size)), s)

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        values = evaluate_many(self.base, self.points(s))
        return float(values[0]) if scalar else values

    def s_range(self) -> tuple:
        """Largest parameter interval whose points stay inside the base box."""
        d = self.y - self.x
        lo, hi = -np.inf, np.inf
        for xi, di, blo, bhi in zip(self.x, d, self.base.domain.lower, self.base.domain.upper):
            if di > 0:
                lo, hi = max(lo, (blo - xi) / di), min(hi, (bhi - xi) / di)
            elif di < 0:
                lo, hi = max(lo, (bhi - xi) / di), min(hi, (blo - xi) / di)
        if not np.isfinite(lo):
            lo, hi = 0.0, 1.0
        return min(lo, 0.0), max(hi, 1.0)

    def as_function(self) -> FunctionSpec:
        """The restriction as a one-dimensional FunctionSpec on its full parameter range."""
        lo, hi = self.s_range()
        if lo == hi:
            lo, hi = 0.0, 1.0
        d = self.y - self.x
        base = self.base

        def body(s):
            return evaluate_many(base, self.points(s[:, 0]))

        grad = None
        if base.gradient is not None:
            def grad(s):
                return (gradient_many(base, self.points(s[:, 0])) @ d)[:, np.newaxis]

        return FunctionSpec(
            id=f"{base.id}|segment",
            domain=DomainBox((lo,), (hi,)),
            body=body,
            gradient=grad,
            source=f"restriction of {base.id}",
            smooth=base.smooth,
        )


def restrict_to_segment(f: FunctionSpec, x, y) -> SegmentRestriction:
    return SegmentRestriction(f, x, y)


def function_from_expression(src: str, lower, upper, id: Optional[str] = None) -> FunctionSpec:
    """Build a FunctionSpec from an expression in x1..xn on the box [lower, upper]."""
    domain = DomainBox(tuple(np.atleast_1d(lower)), tuple(np.atleast_1d(upper)))
    ast = _expr.parse(src, domain.dimension)
    return FunctionSpec(
        id=id or src,
        domain=domain,
        body=lambda pts: _expr.eval_ast(ast, pts),
        source=src,
        ast=ast,
    )


# -- catalog -----------------------------------------------------------------


def _example1_g(pts):
    t = pts[:, 0]
    return -9.0 + (t - 1.0) ** 2 * (t - 3.0) ** 2


def _example1_g_grad(pts):
    t = pts[:, 0]
    return (2.0 * (t - 1.0) * (t - 3.0) * (2.0 * t - 4.0))[:, np.newaxis]


def sq_norm(dimension: int = 1) -> FunctionSpec:
    """``||x||^2`` on ``[-1, 1]^n``; modulus 2, minimizer at the origin."""
    return FunctionSpec(
        id="sq_norm" if dimension == 1 else f"sq_norm_{dimension}d",
        domain=DomainBox.cube(-1.0, 1.0, dimension),
        body=lambda pts: np.sum(pts * pts, axis=1),
        gradient=lambda pts: 2.0 * pts,
        ground_truth=GroundTruth(2.0, (0.0,) * dimension,
                                 frozenset({STRONGLY_QUASICONVEX, QUASICONVEX})),
        smooth=True,
    )


def catalog() -> list:
    """Ground-truth instances used by the tests, demos and the command line."""
    return [
        FunctionSpec(
            id="example1_g",
            domain=DomainBox((0.0,), (4.0,)),
            body=_example1_g,
            gradient=_example1_g_grad,
            ground_truth=GroundTruth(known_flags=frozenset({NOT_QUASICONVEX})),
            smooth=True,
        ),
        sq_norm(1),
        sq_norm(2),
        FunctionSpec(
            id="linear_1d",
            domain=DomainBox((0.0,), (1.0,)),
            body=lambda pts: pts[:, 0].copy(),
            gradient=lambda pts: np.ones_like(pts),
            ground_truth=GroundTruth(2.0, (0.0,), frozenset({STRONGLY_QUASICONVEX, QUASICONVEX})),
            smooth=True,
        ),
        FunctionSpec(
            id="abs_1d",
            domain=DomainBox((-1.0,), (1.0,)),
            body=lambda pts: np.abs(pts[:, 0]),
            ground_truth=GroundTruth(known_minimizer=(0.0,), known_flags=frozenset({QUASICONVEX})),
        ),
        FunctionSpec(
            id="cubic_1d",
            domain=DomainBox((-1.0,), (1.0,)),
            body=lambda pts: pts[:, 0] ** 3,
            gradient=lambda pts: 3.0 * pts ** 2,
            ground_truth=GroundTruth(known_flags=frozenset({QUASICONVEX})),
            smooth=True,
        ),
    ]


def get(entry_id: str) -> FunctionSpec:
    for f in catalog():
        if f.id == entry_id:
            return f
    raise KeyError(f"no catalog entry {entry_id!r}; known: {[f.id for f in catalog()]}")
