"""
Algebraic tail of the solution
==============================

u(r) decays like alpha / r^4 with an amplitude fixed by rho, e and the
small-k curvature beta of the structure factor.
"""

from simpleq import PotentialSpec, SolveParams, grid_for, sample, solve
from simpleq import analysis as an

spec = PotentialSpec("exponential")
for e in (1e-2, 1e-3):
    # the fit window sits near 10/sqrt(e), so the box has to be large
    V = sample(spec, grid_for(spec, e, box_factor=160))
    sol = solve(V, SolveParams(e))
    rep = an.decay_fit(sol)
    print(f"e = {e:g}: p = {rep.p:.4f} on [{rep.r_lo:.0f}, {rep.r_hi:.0f}], "
          f"alpha = {rep.alpha_hat:.5g} vs predicted {rep.alpha_pred:.5g}")
    print(f"   beta from the moment {rep.beta:.6g}, from small k {an.beta_small_k(sol):.6g}")
