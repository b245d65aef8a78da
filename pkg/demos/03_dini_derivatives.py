"""Finite-difference Dini estimates on smooth and kinked functions."""

import numpy as np

from sqc import dini
from sqc import function_model as fm

absf = fm.function_from_expression("abs(x1)", (-1.0,), (1.0,))
for a in (1.0, -1.0):
    est = dini.dini(absf, [0.0], [a])
    print(f"|x| at 0 along {a:+}: upper {est.upper:.6g}, lower {est.lower:.6g}")

# On a smooth function both estimates approach the directional derivative.
sq = fm.get("sq_norm_2d")
x, a = np.array([0.3, -0.4]), np.array([1.0, 2.0])
est = dini.dini(sq, x, a)
print(f"\nsq_norm_2d: lower {est.lower:.8f}, gradient.a {float(fm.gradient_many(sq, x[None])[0] @ a):.8f}")

# A coarser schedule trades accuracy for fewer evaluations.
coarse = dini.StepSchedule(t0=0.1, rho=0.5, K=6, tail=2)
print("coarse schedule:", dini.dini(sq, x, a, coarse).lower)
