"""
One solve of the simple equation
================================

At fixed e the iteration produces a shrinking enclosure a_n <= 1/rho <= b_n.
"""

import numpy as np

from simpleq import PotentialSpec, SolveParams, grid_for, sample, solve

spec = PotentialSpec("exponential")
e = 1e-2
V = sample(spec, grid_for(spec, e))
sol = solve(V, SolveParams(e))

print(f"rho = {sol.rho:.12g} after {sol.iterations} steps ({sol.stop_reason})")
print(f"enclosure of rho: {sol.rho_bounds}")
print(f"rho int u - 1 = {sol.constraint_residual:.1e}, S(0) = {sol.s_of_k.at_zero:.12f}")

# the lower end trails the limit like 2/(rho n) while b_n settles much faster
tr = sol.trace
for n in (1, 10, 100, tr.n[-1]):
    print(f"n={n:5d}  1/rho - a_n = {1 / sol.rho - tr.a[n]:.3e}   b_n - 1/rho = {tr.b[n] - 1 / sol.rho:.3e}")

# u stays in [0, 1] and is largest at the origin
print("u(0) =", sol.u.values[0], " min u =", sol.u.values.min())
