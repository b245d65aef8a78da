"""Replaying the partition chain and the Saks-type recovery inequality."""

from sqc import function_model as fm
from sqc.conditions import SegmentQuery
from sqc.constructions import partition_chain, saks_inequality_check, strict_quasiconvexity_probe

sq = fm.get("sq_norm")
q = SegmentQuery([0.0], [1.0], 0.5)  # needs h(x) <= h(z)
print("   n   partial sum      limit       error    gamma/4*|y-z|^2/n")
for n in (1, 4, 16, 64, 256):
    trace, verdict = partition_chain(sq, q, 2.0, n)
    print(f"{n:4d}  {trace.partial_sum:11.8f}  {trace.limit:9.6f}  {trace.error:10.3e}  "
          f"{trace.predicted_error:10.3e}  {'ok' if verdict.passed else 'FAIL'}")

chk = saks_inequality_check(sq, [0.0], [1.0], 0.25, 2.0)
print(f"\nrecovery inequality: lhs {chk.lhs:.4f} >= rhs {chk.rhs:.4f}: {chk.passed}")

for fid in ("sq_norm", "example1_g"):
    p = strict_quasiconvexity_probe(fm.get(fid))
    print(f"strict quasiconvexity probe on {fid}: passed={p.passed}, excess={p.excess:.3g}")
