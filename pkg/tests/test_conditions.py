import numpy as np
import pytest

from sqc import conditions as C
from sqc import function_model as fm
from sqc.conditions import SampleSpec, SegmentQuery
from sqc.errors import NoGradient, OutOfDomain

SQ = fm.get("sq_norm")
G = fm.get("example1_g")
# Dini steps go forward from y, so y must not sit on the outer face of the box.
SQ_WIDE = SQ.with_domain(fm.DomainBox((-2.0,), (2.0,)))


def q(x, y, t):
    return SegmentQuery([x], [y], t)


# -- definition ------------------------------------------------------------------

def test_definition_symmetric_pair_is_tight():
    v = C.check_definition(SQ, q(-1, 1, 0.5), 2.0)
    assert v.margin == 0.0 and v.status == C.PASS


def test_definition_example1_fails():
    v = C.check_definition(G, q(1, 3, 0.5), 0.0)
    assert v.margin == -1.0 and v.status == C.FAIL


def test_definition_at_t_one():
    rng = np.random.default_rng(1)
    for f in fm.catalog():
        for _ in range(10):
            x, y = rng.uniform(f.domain.lo, f.domain.hi), rng.uniform(f.domain.lo, f.domain.hi)
            v = C.check_definition(f, SegmentQuery(x, y, 1.0), 7.0)
            hx, hy = fm.evaluate(f, x), fm.evaluate(f, y)
            assert v.margin == max(hx, hy) - hy and v.passed


# -- implication form --------------------------------------------------------------

def test_implication_tight():
    v = C.check_implication_form(SQ, q(-1, 1, 0.5), 2.0)
    assert v.margin == 0.0 and v.status == C.PASS


def test_implication_vacuous():
    for t in (0.1, 0.5, 1.0):
        for gamma in (0.0, 2.0, 50.0):
            v = C.check_implication_form(SQ, q(1, 0, t), gamma)
            assert v.status == C.VACUOUS and v.margin == np.inf


def test_implication_example1():
    v = C.check_implication_form(G, q(1, 3, 0.5), 0.0)
    assert v.margin == -1.0 and v.status == C.FAIL


# -- no-integral ---------------------------------------------------------------------

def test_no_integral_pass():
    v = C.check_no_integral(SQ, q(0, 1, 0.5), 2.0)
    assert v.margin == 0.375 and v.status == C.PASS


def test_no_integral_vacuous():
    assert C.check_no_integral(SQ, q(1, 0, 0.5), 2.0).status == C.VACUOUS


def test_no_integral_example1():
    v = C.check_no_integral(G, q(1, 3, 0.5), 0.0)
    assert v.margin == -1.0 and v.status == C.FAIL


# -- Dini ------------------------------------------------------------------------------

def test_dini_pass():
    v = C.check_dini(SQ_WIDE, [0.0], [1.0], 2.0)
    assert v.margin == pytest.approx(1.0, abs=1e-6) and v.passed


def test_dini_vacuous():
    assert C.check_dini(SQ, [1.0], [0.0], 2.0).status == C.VACUOUS


def test_dini_tight():
    v = C.check_dini(SQ_WIDE, [-1.0], [1.0], 2.0)
    assert v.margin == pytest.approx(0.0, abs=1e-6) and v.passed


def test_dini_on_outer_face_has_no_step():
    with pytest.raises(OutOfDomain):
        C.check_dini(SQ, [0.0], [1.0], 2.0)


# -- gradient ----------------------------------------------------------------------

def test_gradient_tight():
    v = C.check_gradient(SQ, [-1.0], [1.0], 2.0)
    assert v.margin == 0.0 and v.passed


def test_gradient_arrow_enthoven():
    v = C.check_gradient(fm.get("cubic_1d"), [0.0], [1.0], 0.0)
    assert v.margin == 3.0 and v.passed


def test_gradient_rejects_large_gamma():
    v = C.check_gradient(SQ, [-1.0], [1.0], 2.5)
    assert v.margin == -1.0 and v.status == C.FAIL


def test_gradient_needs_gradient():
    with pytest.raises(NoGradient):
        C.check_gradient(fm.get("abs_1d"), [-0.5], [0.5], 0.0)


def test_arrow_enthoven_formula_bitwise():
    rng = np.random.default_rng(100)
    for f in fm.catalog():
        if f.gradient is None:
            continue
        X = rng.uniform(f.domain.lo, f.domain.hi, (100, f.dimension))
        Y = rng.uniform(f.domain.lo, f.domain.hi, (100, f.dimension))
        qs = C.QuerySet(X, Y, np.ones(100))
        batch = C.evaluate_condition(f, C.GRADIENT, qs, 0.0)
        want = np.einsum("ij,ij->i", fm.gradient_many(f, Y), Y - X)
        live = batch.status != C.VACUOUS
        assert np.array_equal(batch.margins[live], want[live])
        assert np.array_equal(batch.status[live] == C.PASS, want[live] >= -batch.tolerance)


# -- quadratic growth --------------------------------------------------------------

def test_growth_sq_norm():
    for y in np.linspace(-1, 1, 21):
        v = C.check_quadratic_growth(SQ, [0.0], [y], 2.0)
        assert v.margin == pytest.approx(y * y / 2, abs=1e-15) and v.passed


def test_growth_two_minimizers():
    for gamma in (0.01, 0.1, 1.0, 3.0):
        v = C.check_quadratic_growth(G, [1.0], [3.0], gamma)
        assert v.margin == pytest.approx(-gamma) and v.status == C.FAIL


def test_growth_identity_case():
    for f in fm.catalog():
        p = f.domain.lo + 0.3 * (f.domain.hi - f.domain.lo)
        v = C.check_quadratic_growth(f, p, p, 5.0)
        assert v.margin == 0.0 and v.passed


# -- suite ---------------------------------------------------------------------------

def test_suite_sq_norm_2d_no_fails():
    res = C.run_suite(fm.get("sq_norm_2d"), [C.DEFINITION], 2.0)
    assert res.counts()[C.FAIL] == 0 and res.counts()[C.PASS] > 0


def test_suite_example1_witness():
    res = C.run_suite(G, [C.DEFINITION], 0.1)
    assert res.any_failed
    w = res.worst()
    assert (w.query.x, w.query.y, w.query.t) == ((1.0,), (3.0,), 0.5)
    assert w.margin == pytest.approx(-1.05)


def test_suite_empty_conditions():
    res = C.run_suite(SQ, [], 2.0)
    assert res.verdicts() == [] and res.counts() == {C.PASS: 0, C.FAIL: 0, C.VACUOUS: 0, C.SKIPPED: 0}
    assert res.worst() is None


def test_suite_unknown_condition():
    with pytest.raises(ValueError):
        C.run_suite(SQ, ["bogus"], 2.0)


def test_suite_all_conditions_sq_norm():
    res = C.run_suite(SQ, C.CONDITIONS, 2.0)
    assert not res.any_failed
    assert res.xbar == (0.0,)


def test_suite_jobs_do_not_change_results():
    a = C.run_suite(fm.get("sq_norm_2d"), C.CONDITIONS, 2.0, SampleSpec(n_random=200))
    b = C.run_suite(fm.get("sq_norm_2d"), C.CONDITIONS, 2.0, SampleSpec(n_random=200), jobs=4)
    for c in C.CONDITIONS:
        assert np.array_equal(a.batches[c].margins, b.batches[c].margins, equal_nan=True)


def test_sample_spec_reproducible_and_shaped():
    spec = SampleSpec(seed=3, n_random=10, grid_per_axis=4, t_grid=3)
    a, b = spec.queries(SQ.domain), spec.queries(SQ.domain)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.T, b.T)
    assert len(a) == (4 * 3 + 10) * 4
    assert sorted(set(a.T.tolist())) == [0.25, 0.5, 0.75, 1.0]


def test_degenerate_queries_skipped_in_suite_vacuous_in_checks():
    qs = C.QuerySet(np.array([[0.2]]), np.array([[0.2]]), np.array([0.5]))
    batch = C.evaluate_condition(SQ, C.DEFINITION, qs, 2.0)
    assert batch.status[0] == C.SKIPPED
    assert C.check_definition(SQ, q(0.2, 0.2, 0.5), 2.0).status == C.VACUOUS


def test_worst_ties_break_lexicographically():
    # every definition margin at gamma=0 on a constant is zero
    const = fm.function_from_expression("0*x1 + 1", (-1.0,), (1.0,))
    res = C.run_suite(const, [C.DEFINITION], 0.0, SampleSpec(n_random=0, grid_per_axis=3, t_grid=1))
    w = res.worst()
    assert (w.query.x, w.query.y, w.query.t) == ((-1.0,), (0.0,), 0.5)


# -- invariants ----------------------------------------------------------------------

def test_vacuity_is_premise_exact():
    spec = SampleSpec(n_random=300)
    tol = C.DEFAULT_TOL
    for f in fm.catalog():
        res = C.run_suite(f, [c for c in C.CONDITIONS if f.gradient is not None or c != C.GRADIENT], 1.0, spec)
        for cond, batch in res.batches.items():
            idx = np.flatnonzero(batch.status == C.VACUOUS)
            qs = batch.queries[idx]
            hx = fm.evaluate_many(f, qs.X)
            other = fm.evaluate_many(f, qs.Z if cond == C.NO_INTEGRAL else qs.Y)
            assert np.all(hx > other + tol), (f.id, cond)


def test_margins_monotone_in_gamma():
    rng = np.random.default_rng(100)
    gammas = [0.0, 0.5, 1.0, 2.0, 4.0]
    for f in (SQ, G, fm.get("linear_1d"), fm.get("cubic_1d")):
        X = rng.uniform(f.domain.lo, f.domain.hi, (100, 1))
        Y = rng.uniform(f.domain.lo, f.domain.hi, (100, 1))
        T = rng.uniform(0.01, 1.0, 100)
        qs = C.QuerySet(X, Y, T)
        for cond in C.CONDITIONS:
            rows = [C.evaluate_condition(f, cond, qs, g) for g in gammas]
            m = np.array([r.margins for r in rows])
            live = np.isfinite(m).all(axis=0)
            assert np.all(np.diff(m[:, live], axis=0) <= 0), (f.id, cond)
            passed = np.array([r.status == C.PASS for r in rows])[:, live]
            # a pass at a larger gamma implies a pass at every smaller one
            assert np.all(passed[:-1] >= passed[1:])


@pytest.mark.parametrize("fid", ["sq_norm", "linear_1d"])
def test_definition_pass_implies_no_integral_pass(fid):
    f = fm.get(fid)
    res = C.run_suite(f, [C.DEFINITION, C.NO_INTEGRAL], 2.0)
    assert res.batches[C.DEFINITION].counts()[C.FAIL] == 0
    assert res.batches[C.NO_INTEGRAL].counts()[C.FAIL] == 0


def test_definition_pass_implies_dini_pass_on_smooth_entries():
    for f in fm.catalog():
        if not f.smooth or f.ground_truth.known_modulus is None:
            continue
        res = C.run_suite(f, [C.DEFINITION, C.DINI], f.ground_truth.known_modulus)
        assert res.batches[C.DEFINITION].counts()[C.FAIL] == 0
        assert res.batches[C.DINI].counts()[C.FAIL] == 0, f.id


def test_no_integral_identity_on_generated_queries():
    for f in (SQ, fm.get("sq_norm_2d"), G):
        res = C.run_suite(f, [C.NO_INTEGRAL], 1.0)
        assert res.batches[C.NO_INTEGRAL].identity_residual <= 1e-12
