import math
from dataclasses import replace

import numpy as np
import pytest

from sqc import function_model as fm
from sqc.errors import NotUnimodal
from sqc.minimizer import (
    evaluation_bound,
    growth_diagnostics,
    minimize_segment,
    replay,
    validate_unimodal,
)


def line(src, lo=0.0, hi=1.0):
    f = fm.function_from_expression(src, (lo,), (hi,))
    return fm.SegmentRestriction(f, [lo], [hi])


def test_shifted_square():
    res = minimize_segment(line("(x1-0.3)^2"), 1e-6)
    assert res.lower <= 0.3 <= res.upper
    assert res.width <= 1e-6
    assert abs(res.candidate - 0.3) <= 5e-7
    assert res.evaluations <= evaluation_bound(1e-6)
    assert replay(res)


def test_sq_norm_affine_segment():
    f = fm.get("sq_norm").with_domain(fm.DomainBox((-2.0,), (2.0,)))
    res = minimize_segment(fm.SegmentRestriction(f, [-1.0], [2.0]), 1e-6)
    assert abs(res.candidate - 1 / 3) <= 1e-6
    assert np.allclose(res.point, [0.0], atol=3e-6)


def test_constant_collapses_left():
    res = minimize_segment(line("0*x1 + 5"), 1e-6)
    assert res.lower == 0.0 and res.width <= 1e-6
    assert res.value == 5.0


def test_budget_exhausted():
    res = minimize_segment(line("(x1-0.3)^2"), 1e-6, max_eval=11)
    assert res.budget_exhausted and res.evaluations <= 11
    assert res.lower <= 0.3 <= res.upper


def test_evaluation_bound_formula():
    assert evaluation_bound(1e-6) == 2 * math.ceil(math.log(1e6) / math.log(1.5)) + 2


def test_bad_width():
    with pytest.raises(ValueError):
        minimize_segment(line("x1"), 0.0)


def test_replay_detects_tampering():
    res = minimize_segment(line("(x1-0.3)^2"), 1e-3)
    h = list(res.history)
    l, u, m1, m2, g1, g2 = h[2]
    h[2] = (l, u, m1, m2, g2, g1)
    assert not replay(replace(res, history=tuple(h)))


def test_unimodal_validation():
    g = fm.get("example1_g")
    with pytest.raises(NotUnimodal) as info:
        minimize_segment(fm.SegmentRestriction(g, [0.0], [4.0]), validate=True, probes=9)
    a, d, b = info.value.verdict.witness
    assert (4 * a, 4 * d, 4 * b) == (1.0, 2.0, 3.0)


def test_unimodal_passes():
    rng = np.random.default_rng(2)
    f = fm.get("sq_norm_2d")
    for _ in range(20):
        x, y = rng.uniform(-1, 1, (2, 2))
        assert validate_unimodal(fm.SegmentRestriction(f, x, y)).passed
    assert validate_unimodal(line("x1^3", -1, 1), probes=3).passed
    with pytest.raises(ValueError):
        validate_unimodal(line("x1"), probes=2)


def test_growth_consistent_at_true_modulus():
    f = fm.get("sq_norm_2d")
    res = growth_diagnostics(minimize_segment(fm.SegmentRestriction(f, [-1.0, -0.5], [1.0, 0.8])), 2.0)
    assert not res.gamma_too_large
    assert res.to_dict()["growth"]["gamma"] == 2.0


def test_growth_flags_large_gamma():
    f = fm.get("sq_norm")
    res = growth_diagnostics(minimize_segment(fm.SegmentRestriction(f, [-1.0], [1.0])), 100.0)
    assert res.gamma_too_large


def test_growth_needs_positive_gamma():
    res = minimize_segment(line("x1"))
    with pytest.raises(ValueError):
        growth_diagnostics(res, 0.0)


def test_seeded_segments_contain_projection():
    f = fm.get("sq_norm_2d")
    rng = np.random.default_rng(8)
    for _ in range(50):
        x, y = rng.uniform(-1, 1, (2, 2))
        d = y - x
        s_star = min(1.0, max(0.0, -float(x @ d) / float(d @ d)))
        res = minimize_segment(fm.SegmentRestriction(f, x, y))
        assert res.lower - 1e-12 <= s_star <= res.upper + 1e-12
