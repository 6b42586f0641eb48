import dataclasses

import numpy as np
import pytest

from simpleq.operators import apply_resolvent
from simpleq.potentials import PotentialSpec, sample
from simpleq.radial import RadialField, RadialGrid, integrate_radial, pointwise_max_violation
from simpleq.solver import (SolveParams, SolverBreakdown, grid_for, iterate_step,
                            residual_fixed_point, solve)
from simpleq.transforms import autoconvolve

EXP = PotentialSpec("exponential")


def run(e, **kw):
    V = sample(EXP, grid_for(EXP, e))
    return V, solve(V, SolveParams(e, **kw))


@pytest.fixture(scope="module")
def sol_e2():
    return run(1e-2)


@pytest.fixture(scope="module")
def sol_e4():
    return run(1e-4)


def test_a_priori_bounds(sol_e4):
    V, s = sol_e4
    intv = integrate_radial(V)
    e = 1e-4
    assert 2 * e / intv <= s.rho <= 4 * e / intv
    # the numbers quoted for V = e^{-r}, where int V = 8 pi
    assert 2.5e-5 / np.pi * (1 - 1e-6) <= s.rho <= 5e-5 / np.pi * (1 + 1e-6)


def test_telescoping_identity(sol_e2, sol_e4):
    for _, s in (sol_e2, sol_e4):
        assert np.all(s.trace.telescoping_residual() <= 1e-8)


def test_bracket_invariants(sol_e2):
    _, s = sol_e2
    a, b = s.trace.a, s.trace.b
    assert np.all(np.diff(a) >= -1e-12 * b[1:])
    assert np.all(np.diff(b) <= 1e-12 * b[1:])
    assert np.all(a < b)
    assert np.all(np.diff(s.trace.rho) >= -1e-12 * s.trace.rho[1:])
    # sandwich around the limit
    assert np.all(a <= 1 / s.rho) and np.all(1 / s.rho <= b * (1 + 1e-15))


def test_rate_bound(sol_e2):
    _, s = sol_e2
    n = s.trace.n[1:]
    c = n * (s.trace.b[1:] - s.trace.a[1:]) ** 2
    assert np.isfinite(c.max())
    # the bound n (b_n - a_n)^2 <= C does not grow along the run
    assert c[-1] <= c.max()


def test_solution_range_and_lower_bound(sol_e2):
    V, s = sol_e2
    assert pointwise_max_violation(s.u, 0, 1) <= 1e-12
    u1 = apply_resolvent(V, V, 1e-2)
    assert np.all(s.u.values >= u1.values - 1e-12)


def test_iterates_increase(sol_e2):
    _, s = sol_e2
    assert s.trace.min_increment >= -1e-12


def test_structure_factor_at_solution(sol_e2):
    _, s = sol_e2
    np.testing.assert_allclose(s.s_of_k.at_zero, 1.0, atol=10 * 1e-10)
    assert np.max(np.abs(s.s_of_k.values)) <= 1 + 1e-10


def test_residuals(sol_e2, sol_e4):
    for _, s in (sol_e2, sol_e4):
        assert s.converged
        assert s.residual_fixed_point <= 100 * 1e-10
        assert s.constraint_residual <= 10 * 1e-10


def test_rho_is_limit_of_rho_n(sol_e2):
    _, s = sol_e2
    assert s.rho == 1 / s.b_final
    lo, hi = s.rho_bounds
    assert lo <= s.rho <= hi


def test_grid_refinement():
    e = 1e-2
    g = grid_for(EXP, e)
    r1 = solve(sample(EXP, g), SolveParams(e)).rho
    r2 = solve(sample(EXP, g.refine()), SolveParams(e)).rho
    assert abs(r1 - r2) <= 1e-4 * r2


def test_box_size_insensitive():
    e = 1e-2
    r1 = solve(sample(EXP, grid_for(EXP, e, box_factor=20)), SolveParams(e)).rho
    r2 = solve(sample(EXP, grid_for(EXP, e, box_factor=60)), SolveParams(e)).rho
    np.testing.assert_allclose(r1, r2, rtol=1e-6)


def test_radial_monotonicity_diagnostic(sol_e2):
    _, s = sol_e2
    # reported, not claimed: u decreases away from the origin for this potential
    assert np.all(np.diff(s.u.values) <= 1e-12)


def test_iterate_step_first_steps():
    e = 0.1
    g = RadialGrid(4096, 1 / 16)
    V = sample(EXP, g)
    rho0 = 2 * e / integrate_radial(V)
    u1, rho1 = iterate_step(RadialField.zeros(g), rho0, V, e)
    ref = apply_resolvent(V, V, e)
    np.testing.assert_allclose(u1.values, ref.values, atol=1e-13)
    np.testing.assert_allclose(rho1, 2 * e / integrate_radial(RadialField(g, V.values * (1 - ref.values))))
    u2, rho2 = iterate_step(u1, rho1, V, e)
    assert np.all(u2.values >= u1.values - 1e-12)
    assert rho2 >= rho1


def test_iterate_step_zero_potential():
    g = RadialGrid(256, 0.1)
    with pytest.raises(SolverBreakdown):
        iterate_step(RadialField.zeros(g), 1.0, RadialField.zeros(g), 0.1)


def test_residual_fixed_point_examples():
    e = 0.1
    g = RadialGrid(4096, 1 / 16)
    V = sample(EXP, g)
    assert residual_fixed_point(RadialField.zeros(g), 1.0, V, e) > 0
    rho0 = 2 * e / integrate_radial(V)
    u1 = apply_resolvent(V, V, e)
    got = residual_fixed_point(u1, rho0, V, e)
    extra = apply_resolvent(RadialField(g, 2 * e * rho0 * autoconvolve(u1).values), V, e)
    want = integrate_radial(RadialField(g, np.abs(extra.values))) / integrate_radial(u1)
    np.testing.assert_allclose(got, want, rtol=1e-5)


def test_rejects_zero_potential():
    g = RadialGrid(256, 0.1)
    with pytest.raises(ValueError):
        solve(RadialField.zeros(g), SolveParams(0.1))


def test_params_validation():
    for bad in (dict(e=0.0), dict(e=1.0, bracket_tol=0), dict(e=1.0, bracket_tol=1.5),
                dict(e=1.0, max_iter=0)):
        with pytest.raises(ValueError):
            SolveParams(**bad)


def test_max_iter_flags_non_convergence():
    _, s = run(1.0, max_iter=3)
    assert not s.converged and s.stop_reason == "max_iter"
    assert s.iterations == 3


def test_bracket_stop_is_certified():
    # a loose tolerance is reached by the enclosure itself
    _, s = run(1.0, bracket_tol=1e-2)
    assert s.certified and s.stop_reason == "bracket"
    assert (s.b_final - s.a_final) / s.b_final < 1e-2


def sharp_bounds(V, e):
    u1 = apply_resolvent(V, V, e)
    lo = 2 * e / integrate_radial(RadialField(V.grid, V.values * (1 - u1.values)))
    return lo, 1 / integrate_radial(u1)


def test_other_families_solve():
    for spec in (PotentialSpec("gaussian", 2.0, 1.0), PotentialSpec("square_well", 5.0, 1.0)):
        e = 0.05
        V = sample(spec, grid_for(spec, e))
        s = solve(V, SolveParams(e))
        assert s.converged
        lo, hi = sharp_bounds(V, e)
        assert lo * (1 - 1e-10) <= s.rho <= hi * (1 + 1e-10)
        assert s.rho >= 2 * e / integrate_radial(V)
        assert pointwise_max_violation(s.u, 0, 1) <= 1e-12


def test_simple_upper_bound_needs_strong_scattering():
    # rho <= 4e / int V follows only when int V (1 - u_1) >= int V / 2; a weak
    # square well breaks that, while the sharp enclosure still holds
    spec = PotentialSpec("square_well", 5.0, 1.0)
    e = 0.05
    V = sample(spec, grid_for(spec, e))
    s = solve(V, SolveParams(e))
    lo, hi = sharp_bounds(V, e)
    assert lo <= s.rho <= hi
    assert s.rho > 4 * e / integrate_radial(V)


def test_sharp_bounds_exponential(sol_e4):
    V, s = sol_e4
    lo, hi = sharp_bounds(V, 1e-4)
    np.testing.assert_allclose(hi, 2 * lo, rtol=1e-8)
    assert lo <= s.rho <= hi


def test_last_iterate_below_solution(sol_e2):
    _, s = sol_e2
    assert np.all(s.u_last.values <= s.u.values + 1e-12)
    assert dataclasses.is_dataclass(s)
