"""
Scattering length of a potential
=================================

The zero-energy scattering solution decays like a/r, and a sets the
low-density scale of everything else.
"""

import numpy as np

from simpleq import PotentialSpec, RadialGrid, grid_for, sample, solve_scattering

# e^{-r}: the boundary and integral estimates of a should agree closely
for spec in (PotentialSpec("exponential"), PotentialSpec("gaussian", 2.0, 1.0),
             PotentialSpec("square_well", 5.0, 1.0)):
    res = solve_scattering(sample(spec, grid_for(spec, 1.0)))
    print(f"{spec.label():24s} a = {res.a:.10f}   boundary/integral mismatch {res.agreement:.1e}")

# a square well has a = R - tanh(sqrt(v0) R) / sqrt(v0); the jump at R limits the
# sampled well to first order in the spacing, so take a fine grid
fine = RadialGrid(20480, 1 / 512)
for v0 in (1.0, 10.0, 100.0, 1000.0):
    a = solve_scattering(sample(PotentialSpec("square_well", v0, 1.0), fine)).a
    exact = 1 - np.tanh(np.sqrt(v0)) / np.sqrt(v0)
    print(f"well v0 = {v0:6g}: a = {a:.6f}, closed form {exact:.6f}")
