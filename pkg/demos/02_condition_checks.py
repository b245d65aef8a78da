"""Sampled verdicts for every characterization, with margins and the worst witness."""

from sqc import conditions as C
from sqc import function_model as fm

sq = fm.get("sq_norm")
res = C.run_suite(sq, C.CONDITIONS, gamma=2.0)
print("sq_norm at gamma=2")
for cond, batch in res.batches.items():
    print(f"  {cond:18s} {batch.counts()}")

# A single query: example1_g breaks plain quasiconvexity at x=1, y=3, t=1/2.
g = fm.get("example1_g")
v = C.check_definition(g, C.SegmentQuery([1.0], [3.0], 0.5), gamma=0.0)
print(f"\nexample1_g definition at gamma=0: {v.status}, margin {v.margin:.3g}")

# Asking for too large a modulus makes even the square fail somewhere.
res = C.run_suite(sq, [C.DEFINITION], gamma=3.0)
w = res.worst()
print(f"sq_norm at gamma=3: {res.counts()[C.FAIL]} failures, worst margin {w.margin:.3g} "
      f"at x={w.query.x}, y={w.query.y}, t={w.query.t}")
