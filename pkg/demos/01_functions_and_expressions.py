"""Building functions: catalog entries, user expressions and segment restrictions."""

import numpy as np

from sqc import expr
from sqc import function_model as fm

# The catalog ships a handful of reference functions with known properties.
for f in fm.catalog():
    gt = f.ground_truth
    print(f"{f.id:12s} dim={f.dimension} box=[{f.domain.lo}, {f.domain.hi}] "
          f"modulus={gt.known_modulus if gt else None} flags={sorted(gt.known_flags) if gt else []}")

# Expressions are parsed once into an AST and evaluated on many points at once.
node = expr.parse("sqrt(abs(x1)) + x2^2", 2)
print("\nprinted back:", expr.to_source(node))
f = fm.function_from_expression("sqrt(abs(x1)) + x2^2", (-1.0, -1.0), (1.0, 1.0))
pts = np.array([[0.0, 0.0], [0.25, 0.5], [-1.0, 1.0]])
print("values:", fm.evaluate_many(f, pts))

# Restricting to a segment gives a one-variable function g(s) = h(x + s(y - x)).
seg = fm.restrict_to_segment(fm.get("sq_norm_2d"), [-1.0, -1.0], [1.0, 0.5])
s = np.linspace(0, 1, 5)
print("\ng(s) on the segment:", seg(s))
