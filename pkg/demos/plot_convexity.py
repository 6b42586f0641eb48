"""
Convexity of rho e
==================

(1/4 pi) d^2(rho e)/d rho^2 goes from the scattering length at low density
to int V / (4 pi) at high density; for e^{-r} that is 2.
"""

import os

import numpy as np

from simpleq import PotentialSpec
from simpleq import analysis as an
from simpleq.plotting import convexity_svg

curve = an.trace_curve(PotentialSpec("exponential"), np.logspace(-6, 2, 33))
prof = an.convexity_profile(curve)
print(f"low-density end {prof[0][1]:.4f} (a = {curve.a:.4f})")
print(f"high-density end {prof[-1][1]:.4f}")
print("all positive:", all(v > 0 for _, v in prof))

# e / ((rho/2) int V) creeps up to 1 from below
print("high-density ratio:", an.high_density_check(curve)[-1][1])

os.makedirs("demo_output", exist_ok=True)
with open(os.path.join("demo_output", "convexity.svg"), "w") as fh:
    fh.write(convexity_svg(prof))
