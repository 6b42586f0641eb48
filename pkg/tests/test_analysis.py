import dataclasses
import warnings

import numpy as np
import pytest

from simpleq import analysis as an
from simpleq.analysis import EnergyCurve
from simpleq.potentials import PotentialSpec, sample
from simpleq.radial import RadialField, integrate_radial
from simpleq.solver import IterationTrace, SolveParams, grid_for, solve

EXP = PotentialSpec("exponential")


@pytest.fixture(scope="module")
def curve():
    return an.trace_curve(EXP, np.logspace(-4, 1, 11), threads=0)


@pytest.fixture(scope="module")
def decay_solution():
    e = 1e-2
    V = sample(EXP, grid_for(EXP, e, box_factor=160))
    return solve(V, SolveParams(e))


def test_curve_rows(curve):
    assert len(curve) == 11
    assert np.all(np.diff(curve.e) > 0)
    assert np.all(curve.rho_lo <= curve.rho) and np.all(curve.rho <= curve.rho_hi)
    assert curve.converged.all()
    assert curve.monotone_violations() == []
    assert np.all(np.diff(curve.rho_e) > 0)
    np.testing.assert_allclose(curve.a, 1.2543564, rtol=1e-6)


def test_curve_a_priori_bounds(curve):
    assert np.all(curve.e >= 0.25 * curve.intv * curve.rho * (1 - 1e-10))
    assert np.all(curve.e <= 0.5 * curve.intv * curve.rho * (1 + 1e-10))


def test_curve_threads_do_not_change_results():
    ev = np.logspace(-2, 0, 3)
    a = an.trace_curve(EXP, ev, threads=0)
    b = an.trace_curve(EXP, ev, threads=3)
    np.testing.assert_array_equal(a.rho, b.rho)
    np.testing.assert_array_equal(a.rho_hi, b.rho_hi)


def test_curve_rejects_unsorted():
    with pytest.raises(ValueError):
        an.trace_curve(EXP, [1e-2, 1e-3])
    with pytest.raises(ValueError):
        EnergyCurve([2.0, 1.0], [1, 2], [1, 2], [1, 2])


def test_thread_count(monkeypatch):
    monkeypatch.setenv("SIMPLEQ_THREADS", "0")
    assert an.thread_count() == 0
    monkeypatch.setenv("SIMPLEQ_THREADS", "3")
    assert an.thread_count() == 3
    monkeypatch.setenv("SIMPLEQ_THREADS", "x")
    with pytest.raises(ValueError):
        an.thread_count()
    monkeypatch.delenv("SIMPLEQ_THREADS")
    assert an.thread_count() >= 1


def test_invert_curve(curve):
    i = 4
    assert an.invert_curve(curve, curve.rho[i]) == curve.e[i]
    mid = np.sqrt(curve.rho[0] * curve.rho[1])
    assert curve.e[0] < an.invert_curve(curve, mid) < curve.e[1]
    with pytest.raises(ValueError):
        an.invert_curve(curve, curve.rho[-1] * 2)


def test_invert_curve_low_density(curve):
    rho = curve.rho[0] * 1.3
    e = an.invert_curve(curve, rho)
    a = curve.a
    lhy = 2 * np.pi * rho * a * (1 + an.LHY_CONSTANT * np.sqrt(rho * a**3))
    np.testing.assert_allclose(e, lhy, rtol=2e-3)


def test_invert_curve_non_monotone():
    c = EnergyCurve([1.0, 2.0, 3.0], [1.0, 0.5, 2.0], [1.0, 0.5, 2.0], [1.0, 0.5, 2.0])
    with pytest.raises(an.CurveNotMonotone, match="conjecture"):
        an.invert_curve(c, 0.7)
    with pytest.raises(an.CurveNotMonotone):
        an.convexity_profile(c)


def test_lhy_constant():
    np.testing.assert_allclose(an.LHY_CONSTANT, 4.8144, atol=1e-4)


def test_lhy_check(curve):
    out = an.lhy_check(curve)
    assert len(out) >= 2
    rho, c = zip(*out)
    assert list(rho) == sorted(rho)
    assert abs(c[0] - an.LHY_CONSTANT) < 0.1 * an.LHY_CONSTANT
    # negative control: a wrong scattering length moves c_hat far from the limit
    wrong = an.lhy_check(curve, a=2 * curve.a, max_rho_a3=1.0)
    assert abs(wrong[0][1] - an.LHY_CONSTANT) > 10 * abs(c[0] - an.LHY_CONSTANT)


def test_high_density_check(curve):
    out = an.high_density_check(curve)
    ratios = np.array([q for _, q in out])
    assert np.all(ratios <= 1 + 1e-10)
    assert np.all(ratios >= 0.5)
    assert np.all(np.diff(ratios) >= 0)


def test_beta_trivial_state():
    e = 0.1
    V = sample(EXP, grid_for(EXP, e))
    sol = solve(V, SolveParams(e, max_iter=2))
    intv = integrate_radial(V)
    zero = dataclasses.replace(sol, u=RadialField.zeros(V.grid), rho=2 * e / intv)
    # (rho / 12 e) 4 pi int r^4 e^{-r} dr = (2e / 8 pi)(96 pi) / (12 e) = 2,
    # up to the trapezoid error of int V at dr = 1/8
    np.testing.assert_allclose(an.extract_beta(zero, check=False), 2.0, rtol=1e-5)


def test_beta_estimators_agree(decay_solution):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        beta = an.extract_beta(decay_solution)
    assert beta > 0
    np.testing.assert_allclose(an.beta_small_k(decay_solution), beta, rtol=1e-2)


def test_decay_fit(decay_solution):
    rep = an.decay_fit(decay_solution)
    assert abs(rep.p - 4) <= 0.2
    assert rep.rel_dev <= 0.1
    assert rep.power_law
    assert rep.r_lo >= 2.5 / np.sqrt(1e-2)


def test_decay_fit_exponent_stable_under_larger_box(decay_solution):
    e = 1e-2
    V = sample(EXP, grid_for(EXP, e, box_factor=320))
    wide = solve(V, SolveParams(e))
    assert abs(an.decay_fit(wide).p - an.decay_fit(decay_solution).p) <= 0.05


def test_decay_fit_flags_exponential_field(decay_solution):
    g = decay_solution.grid
    fake = dataclasses.replace(decay_solution, u=RadialField(g, np.exp(-g.r / 100)))
    rep = an.decay_fit(fake)
    assert not rep.power_law
    p, alpha, rms = an.fit_power_law(g.r[1:], g.r[1:] ** -4.0 * 3)
    np.testing.assert_allclose([p, alpha, rms], [4, 3, 0], atol=1e-9)


def test_decay_fit_window_errors(decay_solution):
    with pytest.raises(ValueError, match="r_max"):
        an.decay_fit(decay_solution, window=(100, decay_solution.grid.r_max))
    with pytest.raises(ValueError):
        an.decay_fit(decay_solution, window=(50, 40))


def test_convexity_profile(curve):
    prof = an.convexity_profile(curve)
    assert len(prof) == len(curve) - 2
    assert all(v > 0 for _, v in prof)


def test_convexity_stencil_exact_for_quadratics():
    rho = np.array([1.0, 1.5, 3.0, 3.2, 7.0])
    e = 2 * rho + 1  # rho e = 2 rho^2 + rho
    c = EnergyCurve(e, rho, rho, rho)
    np.testing.assert_allclose([v for _, v in an.convexity_profile(c)], 4 / (4 * np.pi))
    with pytest.raises(ValueError):
        an.convexity_profile(EnergyCurve(e[:2], rho[:2], rho[:2], rho[:2]))


def test_compare_reference(curve):
    ref = list(zip(curve.rho, curve.e))
    assert an.compare_reference(curve, ref) == 0
    up = [(r, e / 0.95) for r, e in ref]
    np.testing.assert_allclose(an.compare_reference(curve, up), 0.05, atol=1e-12)
    scaled = [(r, 1.05 * e) for r, e in ref]
    np.testing.assert_allclose(an.compare_reference(curve, scaled), 0.05 / 1.05, atol=1e-12)
    with pytest.warns(UserWarning, match="outside"):
        an.compare_reference(curve, ref + [(curve.rho[-1] * 10, 1.0)])


def synthetic_trace(a_of_n, b=1.0, n=300):
    ns = np.arange(n + 1)
    return IterationTrace(ns, a_of_n(ns.astype(float)), np.full(n + 1, b))


def test_convergence_rate_detectors():
    const = synthetic_trace(lambda n: np.full(n.size, 0.5))
    assert abs(an.convergence_rate(const)) <= 1e-12
    cubic = synthetic_trace(lambda n: 1 - 1 / (1 + n) ** 3)
    np.testing.assert_allclose(an.convergence_rate(cubic, limit=1.0), -3, atol=0.1)
    with pytest.raises(ValueError):
        an.convergence_rate(synthetic_trace(lambda n: n * 0, n=10))


def test_rate_constant_finite(curve):
    e = 1e-2
    V = sample(EXP, grid_for(EXP, e))
    tr = solve(V, SolveParams(e)).trace
    C = an.rate_constant(tr)
    n = tr.n[1:]
    assert np.all((tr.b[1:] - tr.a[1:]) ** 2 <= C / n * (1 + 1e-12))
