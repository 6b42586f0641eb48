"""Numerical solver for the simple equation of the Bose gas ground-state energy."""
from .radial import (RadialGrid, RadialField, integrate_radial, l1_distance,
                     pointwise_max_violation, default_grid)
from .potentials import PotentialSpec, sample, integral_v, parse_potential
from .transforms import (SpectralField, radial_fourier, inverse_radial_fourier,
                         autoconvolve, structure_factor)
from .operators import ScatteringResult, apply_yukawa, apply_resolvent, solve_scattering
from .solver import (SolveParams, IterationTrace, Solution, iterate_step, solve,
                     residual_fixed_point, grid_for)

__version__ = "0.1.0"
