"""Ternary bracket search on a segment with a replayable certificate."""

from sqc import function_model as fm
from sqc.errors import NotUnimodal
from sqc.minimizer import evaluation_bound, growth_diagnostics, minimize_segment, replay

sq = fm.get("sq_norm_2d")
seg = fm.SegmentRestriction(sq, [-1.0, -0.5], [1.0, 0.8])
res = growth_diagnostics(minimize_segment(seg, 1e-8), gamma=2.0)
print(f"bracket [{res.lower:.10f}, {res.upper:.10f}], point {res.point}")
print(f"{res.evaluations} evaluations (bound {evaluation_bound(1e-8)}), replay ok: {replay(res)}")
print("growth consistent at gamma=2:", not res.gamma_too_large)

try:
    minimize_segment(fm.SegmentRestriction(fm.get("example1_g"), [0.0], [4.0]), validate=True)
except NotUnimodal as exc:
    print("\nexample1_g:", exc)
