"""
Energy per particle versus density
==================================

Sweep e over eight decades and look at e / (4 pi rho), which runs from a/2
at low density to int V / (8 pi) at high density.
"""

import os

import numpy as np

from simpleq import PotentialSpec
from simpleq import analysis as an
from simpleq.io import write_curve_csv
from simpleq.plotting import curve_svg

spec = PotentialSpec("exponential")
curve = an.trace_curve(spec, np.logspace(-6, 2, 25))

for rho, y in zip(curve.rho[::4], curve.e_over_4pi_rho[::4]):
    print(f"rho = {rho:10.3e}   e/(4 pi rho) = {y:.6f}")
print(f"a/2 = {curve.a / 2:.6f}, int V/(8 pi) = {curve.intv / (8 * np.pi):.6f}")

# the low-density correction approaches 128/(15 sqrt(pi))
rho, c = an.lhy_check(curve, max_rho_a3=1e-5)[0]
print(f"c_hat = {c:.4f} at rho a^3 = {rho * curve.a**3:.1e} (limit {an.LHY_CONSTANT:.4f})")

out = "demo_output"
os.makedirs(out, exist_ok=True)
write_curve_csv(os.path.join(out, "curve.csv"), curve)
with open(os.path.join(out, "curve.svg"), "w") as fh:
    fh.write(curve_svg(curve))
