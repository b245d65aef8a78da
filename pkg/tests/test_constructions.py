import csv
import io

import numpy as np
import pytest

from sqc import conditions as C
from sqc import function_model as fm
from sqc.conditions import SampleSpec, SegmentQuery
from sqc.constructions import partition_chain, saks_inequality_check, strict_quasiconvexity_probe
from sqc.errors import PremiseFails

SQ = fm.get("sq_norm")
G = fm.get("example1_g")
Q = SegmentQuery([0.0], [1.0], 0.5)


def test_partition_n4_values():
    trace, verdict = partition_chain(SQ, Q, 2.0, 4)
    assert trace.partial_sum == 0.34375
    assert trace.limit == 0.375
    assert trace.values[-1] - trace.values[0] == 0.75
    assert verdict.passed and verdict.step_margin >= 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 16, 64, 1000])
def test_error_law_exact_on_textbook_query(n):
    trace, _ = partition_chain(SQ, Q, 2.0, n)
    assert abs(trace.error - 0.125 / n) <= 1e-12
    assert trace.predicted_error == pytest.approx(0.125 / n, abs=1e-15)


def test_single_step_matches_implication_bound():
    rng = np.random.default_rng(4)
    for _ in range(20):
        x, y = rng.uniform(-1, 1, 2)
        t = rng.uniform(0.05, 0.95)
        q = SegmentQuery([x], [y], t)
        if x * x > (x + t * (y - x)) ** 2:
            continue
        trace, _ = partition_chain(SQ, q, 2.0, 1)
        z = x + t * (y - x)
        assert trace.partial_sum == pytest.approx(abs(y - z) * abs(z - x), rel=1e-12)


def test_points_are_exact():
    trace, _ = partition_chain(fm.get("sq_norm_2d"), SegmentQuery([0.1, -0.3], [0.9, 0.4], 0.25), 2.0, 8)
    z = np.array(SegmentQuery([0.1, -0.3], [0.9, 0.4], 0.25).z)
    assert np.array_equal(trace.points[0], z)
    assert np.array_equal(trace.points[-1], [0.9, 0.4])
    for i in range(9):
        assert np.array_equal(trace.points[i], z + (i / 8) * (np.array([0.9, 0.4]) - z))


def test_premise_fails():
    with pytest.raises(PremiseFails):
        partition_chain(SQ, SegmentQuery([1.0], [0.0], 0.5), 2.0, 4)


def test_bad_arguments():
    with pytest.raises(ValueError):
        partition_chain(SQ, Q, 2.0, 0)
    with pytest.raises(ValueError):
        partition_chain(SQ, SegmentQuery([0.0], [1.0], 1.0), 2.0, 4)


def test_chain_detects_example1():
    _, verdict = partition_chain(G, SegmentQuery([1.0], [3.0], 0.5), 0.5, 4)
    assert verdict.identities_hold and not verdict.inequalities_pass


def test_csv_columns():
    trace, _ = partition_chain(fm.get("sq_norm_2d"), SegmentQuery([0.0, 0.0], [1.0, 0.0], 0.5), 2.0, 2)
    rows = list(csv.reader(io.StringIO(trace.to_csv())))
    assert rows[0] == ["i", "w_1", "w_2", "h_w", "b"]
    assert len(rows) == 4 and rows[-1][-1] == ""
    assert float(rows[1][3]) == 0.25


def seeded_premise_queries(f, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x, y = rng.uniform(f.domain.lo, f.domain.hi, (2, f.dimension))
        t = rng.uniform(0.01, 0.99)
        q = SegmentQuery(x, y, t)
        if fm.evaluate(f, x) <= fm.evaluate(f, q.z):
            out.append(q)
    return out


def test_chain_passes_at_true_modulus_for_all_dyadic_n():
    for f in fm.catalog():
        gt = f.ground_truth
        if gt is None or fm.STRONGLY_QUASICONVEX not in gt.known_flags:
            continue
        for q in seeded_premise_queries(f, 50, 17):
            for k in range(11):
                _, verdict = partition_chain(f, q, gt.known_modulus, 2 ** k)
                assert verdict.passed, (f.id, q, 2 ** k, verdict)


def test_error_law_regardless_of_function():
    rng = np.random.default_rng(8)
    f = fm.get("abs_1d")
    for q in seeded_premise_queries(f, 30, 3):
        gamma = rng.uniform(0, 5)
        for n in (1, 7, 128):
            trace, verdict = partition_chain(f, q, gamma, n)
            assert verdict.identities_hold


def test_chain_limit_agrees_with_no_integral():
    for q in seeded_premise_queries(SQ, 30, 21):
        traces = [partition_chain(SQ, q, 2.0, n) for n in (1, 16, 1024)]
        aggregate_ok = all(v.aggregate_margin >= -1e-9 for _, v in traces)
        limit_ok = C.check_no_integral(SQ, q, 2.0).passed
        assert aggregate_ok == limit_ok


# -- integrated Dini bound --------------------------------------------------------

def test_saks_examples():
    s = saks_inequality_check(SQ, [0.0], [1.0], 0.5, 2.0)
    assert (s.lhs, s.rhs, s.passed) == (0.75, 0.375, True)
    s = saks_inequality_check(SQ, [0.0], [1.0], 1.0, 2.0)
    assert (s.lhs, s.rhs, s.margin, s.passed) == (0.0, 0.0, 0.0, True)
    s = saks_inequality_check(G, [1.0], [3.0], 0.5, 0.5)
    assert (s.lhs, s.rhs, s.passed) == (-1.0, 0.375, False)
    assert s.margin == s.lhs - s.rhs


# -- strictness probe --------------------------------------------------------------

def test_probe_sq_norm():
    v = strict_quasiconvexity_probe(SQ, SampleSpec(n_random=300))
    assert v.passed and v.witness is None


def test_probe_example1():
    v = strict_quasiconvexity_probe(G, SampleSpec(n_random=300))
    assert not v.passed
    a, b, d = v.witness
    assert v.excess >= 1.0 - 1e-12
    h = [fm.evaluate(G, p) for p in (a, b, d)]
    assert h[2] - max(h[0], h[1]) == v.excess
    # the grid contains the textbook triple (1, 3, 2), whose excess is exactly 1
    assert fm.evaluate(G, [2.0]) - max(fm.evaluate(G, [1.0]), fm.evaluate(G, [3.0])) == 1.0


def test_probe_constant():
    const = fm.function_from_expression("0*x1 + 2", (-1.0,), (1.0,))
    assert not strict_quasiconvexity_probe(const, SampleSpec(n_random=20), tol=0.0).passed
    assert strict_quasiconvexity_probe(const, SampleSpec(n_random=20)).passed
