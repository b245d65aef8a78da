"""A function satisfying every hypothesis of the lemma yet failing quasiconvexity."""

from sqc.counterexample import run_audit

audit = run_audit(401)
print("values:", audit.values)
for h in audit.hypotheses:
    print(f"  {h.name:26s} {'pass' if h.passed else 'FAIL'}")
v = audit.violation.known
print(f"g({v.mid}) - max(g({v.u1}), g({v.u2})) = {v.violation}")
found = audit.violation.found
print(f"grid search: worst triple ({found.u1}, {found.mid}, {found.u2}) exceeds by {found.violation}")
print("stated conclusion still holds:", audit.conclusion.holds)
print("reproduced:", audit.reproduced)
