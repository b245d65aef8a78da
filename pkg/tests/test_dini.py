import numpy as np
import pytest

from sqc import function_model as fm
from sqc.dini import (
    DEFAULT_SCHEDULE,
    StepSchedule,
    admissible_t0,
    dini,
    dini_batch,
    dini_pair_identity_check,
)
from sqc.errors import NonFiniteValue, OutOfDomain


def oscillating():
    """s sin(1/s) with value 0 at the origin."""
    def body(p):
        s = p[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(s == 0, 0.0, s * np.sin(1.0 / s))
    return fm.FunctionSpec("s_sin_inv", fm.DomainBox((-1.0,), (1.0,)), body)


def square():
    return fm.function_from_expression("x1^2", (-2.0,), (2.0,))


def test_abs_at_origin():
    f = fm.get("abs_1d")
    for a in (1.0, -1.0):
        est = dini(f, [0.0], [a])
        assert abs(est.upper - 1.0) <= 1e-9 and abs(est.lower - 1.0) <= 1e-9


def test_square_at_one():
    est = dini(square(), [1.0], [1.0])
    assert abs(est.upper - 2.0) <= 1e-6 and abs(est.lower - 2.0) <= 1e-6


def test_oscillating_quotients_are_sin_of_inverse_step():
    est = dini(oscillating(), [0.0], [1.0])
    t = DEFAULT_SCHEDULE.steps()
    assert np.allclose(est.quotients, np.sin(1.0 / t), rtol=0, atol=1e-12)
    tail = np.sin(1.0 / t[-DEFAULT_SCHEDULE.tail:])
    assert est.upper == pytest.approx(tail.max(), abs=1e-12)
    assert est.lower == pytest.approx(tail.min(), abs=1e-12)


@pytest.mark.xfail(strict=True, reason="sin(1/t_k) on four geometric steps need not come within 0.01 of +-1")
def test_oscillating_reaches_plus_minus_one():
    est = dini(oscillating(), [0.0], [1.0])
    assert est.upper >= 0.99 and est.lower <= -0.99


def test_quotient_definition_and_window():
    f = fm.get("cubic_1d")
    sched = StepSchedule(t0=0.1, rho=0.5, K=6, tail=3)
    est = dini(f, [0.2], [1.0], sched)
    t = 0.1 * 0.5 ** np.arange(6)
    q = ((0.2 + t) ** 3 - 0.2 ** 3) / t
    assert np.allclose(est.quotients, q, rtol=1e-13)
    assert est.upper == est.quotients[3:].max()
    assert est.lower == est.quotients[3:].min()
    assert est.upper >= est.lower


def test_schedule_validation():
    with pytest.raises(ValueError):
        StepSchedule(t0=0)
    with pytest.raises(ValueError):
        StepSchedule(rho=1.0)
    with pytest.raises(ValueError):
        StepSchedule(K=5, tail=6)
    with pytest.raises(ValueError):
        StepSchedule(t0=1e-2, rho=0.1, K=20)  # smallest step below 1e-12
    assert StepSchedule(t0=1e-2, rho=0.5, K=20, tail=8).tail == 8


def test_boundary_shrinks_first_step():
    f = fm.get("sq_norm")
    t0 = admissible_t0(f, [[0.999]], [[1.0]])
    assert 0 < t0[0] <= 0.001
    est = dini(f, [0.999], [1.0])
    assert est.t0_used == t0[0]
    assert abs(est.lower - 1.998) < 1e-6


def test_boundary_outward_direction_inadmissible():
    f = fm.get("sq_norm")
    with pytest.raises(OutOfDomain):
        dini(f, [1.0], [1.0])
    batch = dini_batch(f, [[1.0], [0.0]], [[1.0], [1.0]])
    assert list(batch.admissible) == [False, True]
    assert np.isnan(batch.upper[0]) and np.isfinite(batch.upper[1])


def test_non_finite():
    f = fm.FunctionSpec("blowup", fm.DomainBox((0.0,), (1.0,)),
                        lambda p: np.where(p[:, 0] > 0.5, np.inf, 0.0))
    with pytest.raises(NonFiniteValue):
        dini(f, [0.5], [1.0])


def test_identity_sq_norm():
    lhs, rhs = dini_pair_identity_check(fm.get("sq_norm"), [0.0], [1.0], 0.5)
    assert lhs == pytest.approx(0.5, abs=1e-6) and rhs == pytest.approx(0.5, abs=1e-6)


def test_identity_at_kink():
    lhs, rhs = dini_pair_identity_check(fm.get("abs_1d"), [-1.0], [1.0], 0.5)
    assert abs(lhs - rhs) <= 1e-6


def test_identity_at_smooth_points():
    rng = np.random.default_rng(11)
    for f in fm.catalog():
        if not f.smooth:
            continue
        lo, hi = f.domain.lo, f.domain.hi
        for _ in range(20):
            x, y = rng.uniform(lo, hi), rng.uniform(lo, hi)
            s = rng.uniform(0.05, 0.95)
            lhs, rhs = dini_pair_identity_check(f, x, y, s)
            assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(lhs)), (f.id, x, y, s)


def test_positive_homogeneity():
    rng = np.random.default_rng(12)
    for f in fm.catalog():
        if not f.smooth:
            continue
        lo, hi = f.domain.lo, f.domain.hi
        for _ in range(20):
            x = rng.uniform(lo + 0.1, hi - 0.1)
            a = rng.uniform(-1, 1, f.dimension)
            lam = rng.uniform(0.5, 2.0)
            base = dini(f, x, a, StepSchedule(t0=1e-3))
            scaled = dini(f, x, lam * a, StepSchedule(t0=1e-3 / lam))
            assert np.allclose(scaled.quotients, lam * base.quotients, rtol=0, atol=1e-8)


def test_smooth_entries_match_gradient():
    rng = np.random.default_rng(50)
    for f in fm.catalog():
        if not f.smooth:
            continue
        lo, hi = f.domain.lo, f.domain.hi
        X = rng.uniform(lo + 0.02, hi - 0.02, (50, f.dimension))
        A = rng.uniform(-1, 1, (50, f.dimension))
        batch = dini_batch(f, X, A)
        want = np.einsum("ij,ij->i", fm.gradient_many(f, X), A)
        assert np.all(np.abs(batch.upper - want) <= 1e-5), f.id
        assert np.all(np.abs(batch.lower - want) <= 1e-5), f.id
        assert np.all(batch.upper >= batch.lower)
