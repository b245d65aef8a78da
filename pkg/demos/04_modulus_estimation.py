"""Empirical moduli from the definition, the no-integral form, Dini and growth."""

from sqc import function_model as fm
from sqc import modulus as M
from sqc.conditions import SampleSpec

sq = fm.get("sq_norm")
for name, est in [("definition", M.modulus_definition(sq)),
                  ("no_integral", M.modulus_no_integral(sq)),
                  ("dini", M.modulus_dini(sq)),
                  ("growth", M.modulus_growth(sq, [0.0]))]:
    print(f"sq_norm {name:12s} gamma_hat={est.gamma_hat:.4f} over {est.n_effective} queries")

# Sample estimates are upper bounds on the true infimum, so refining the t grid
# can only move them down.
lin = fm.get("linear_1d")
for t_grid in (15, 63, 255):
    est = M.modulus_definition(lin, SampleSpec(t_grid=t_grid))
    print(f"linear_1d, t_grid={t_grid:3d}: {est.gamma_hat:.4f}")

# A negative infimum means the function is not even quasiconvex.
g = M.modulus_definition(fm.get("example1_g"))
print(f"\nexample1_g: gamma_hat={g.gamma_hat}, raw={g.raw_infimum:.3f}, flags={sorted(g.flags)}")
