"""Energy curves and the quantitative checks run on them.

Covers low- and high-density asymptotics, the small-k coefficient of the
structure factor, the power-law tail of u, convexity of rho e, comparison
with reference data, and convergence rates of the iteration.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .operators import solve_scattering
from .potentials import PotentialSpec, integral_v, sample
from .radial import RadialField
from .solver import IterationTrace, Solution, SolveParams, grid_for, solve

__all__ = [
    "LHY_CONSTANT",
    "EnergyCurve",
    "DecayReport",
    "CurveNotMonotone",
    "thread_count",
    "trace_curve",
    "invert_curve",
    "lhy_check",
    "high_density_check",
    "extract_beta",
    "beta_small_k",
    "fit_power_law",
    "decay_fit",
    "convexity_profile",
    "compare_reference",
    "convergence_rate",
    "rate_constant",
]

LHY_CONSTANT = 128 / (15 * np.sqrt(np.pi))


class CurveNotMonotone(ValueError):
    """rho(e) is not strictly increasing on the sampled curve.

    Monotonicity of rho(e) is conjectured, not proved, so this is a finding
    about the data rather than a usage error.
    """


@dataclass(frozen=True, eq=False)
class EnergyCurve:
    """Sampled points ``(e, rho(e))`` with enclosures.

    Attributes
    ----------
    e, rho, rho_lo, rho_hi : ndarray
        One entry per row, e strictly increasing.
    converged : ndarray of bool
    potential : str
        Label of the potential.
    a : float or None
        Scattering length of the potential.
    intv : float or None
        Integral of the potential.
    diagnostics : dict of ndarray
        Per-row solver diagnostics, when the curve was computed here.
    """

    e: np.ndarray
    rho: np.ndarray
    rho_lo: np.ndarray
    rho_hi: np.ndarray
    converged: np.ndarray = None
    potential: str = ""
    a: float | None = None
    intv: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("e", "rho", "rho_lo", "rho_hi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.e.size
        if any(getattr(self, x).shape != (n,) for x in ("rho", "rho_lo", "rho_hi")):
            raise ValueError("curve columns must have equal length")
        if np.any(np.diff(self.e) <= 0):
            raise ValueError("e must be strictly increasing across rows")
        conv = np.ones(n, bool) if self.converged is None else np.asarray(self.converged, bool)
        object.__setattr__(self, "converged", conv)

    def __len__(self):
        return self.e.size

    @property
    def e_over_4pi_rho(self) -> np.ndarray:
        return self.e / (4 * np.pi * self.rho)

    @property
    def rho_e(self) -> np.ndarray:
        return self.rho * self.e

    def monotone_violations(self) -> list:
        """Row indices i where ``rho[i+1] <= rho[i]``."""
        return [int(i) for i in np.nonzero(np.diff(self.rho) <= 0)[0]]


def thread_count() -> int:
    """Worker count from ``SIMPLEQ_THREADS`` (0 means serial), else the CPU count."""
    env = os.environ.get("SIMPLEQ_THREADS")
    if env is None or env.strip() == "":
        return os.cpu_count() or 1
    try:
        n = int(env)
    except ValueError:
        raise ValueError(f"SIMPLEQ_THREADS must be an integer, got {env!r}") from None
    if n < 0:
        raise ValueError(f"SIMPLEQ_THREADS must be >= 0, got {n}")
    return n


def _row(spec, e, bracket_tol, max_iter, box_factor, grid):
    g = grid if grid is not None else grid_for(spec, e, box_factor)
    V = sample(spec, g)
    sol = solve(V, SolveParams(e, bracket_tol=bracket_tol, max_iter=max_iter))
    tr = sol.trace
    diag = {
        "iterations": sol.iterations,
        "n_points": g.n_points,
        "gap": float(tr.gap[-1]),
        "rho_first": 1 / tr.b[1] if len(tr) > 1 else np.nan,
        "rho_first_hi": 1 / tr.a[1] if len(tr) > 1 else np.nan,
        "telescoping": float(tr.telescoping_residual().max()),
        "a_step_min": float(np.min(np.diff(tr.a))),
        "b_step_max": float(np.max(np.diff(tr.b))),
        "ab_margin_min": float(np.min((tr.b - tr.a) / tr.b)),
        "min_increment": tr.min_increment,
        "range_violation": float(max(0.0, -sol.u.values.min(), sol.u.values.max() - 1)),
        "constraint_residual": sol.constraint_residual,
        "residual_fixed_point": sol.residual_fixed_point,
        "intv": float(np.dot(g.weights(), V.values)),
        "s0": sol.s_of_k.at_zero,
        "s_max": float(np.max(sol.s_of_k.values)),
        "certified": sol.certified,
    }
    return sol, diag


def trace_curve(potential: PotentialSpec, e_values, bracket_tol: float = 1e-10,
                max_iter: int = 100_000, box_factor: float = 30.0, grid=None,
                threads: int | None = None, keep_solutions: bool = False) -> EnergyCurve:
    """Solve at every e and collect the curve.

    Parameters
    ----------
    potential : PotentialSpec
    e_values : sequence of float
        Strictly increasing, positive.
    bracket_tol, max_iter : see `SolveParams`.
    box_factor : float
        Box radius in units of ``1/sqrt(e)`` for the default grids.
    grid : RadialGrid, optional
        Use this grid for every solve instead of the default per-e grids.
    threads : int, optional
        Concurrent solves; defaults to `thread_count`. 0 or 1 runs serially.
    keep_solutions : bool
        Attach the `Solution` objects as ``diagnostics["solutions"]``.

    Returns
    -------
    EnergyCurve
        Rows are ordered by e regardless of completion order. Non-converged
        solves are kept and flagged.
    """
    ev = np.asarray(e_values, dtype=float)
    if ev.ndim != 1 or ev.size == 0 or np.any(ev <= 0) or np.any(np.diff(ev) <= 0):
        raise ValueError("e_values must be positive and strictly increasing")
    nthreads = thread_count() if threads is None else threads
    job = lambda e: _row(potential, e, bracket_tol, max_iter, box_factor, grid)
    if nthreads <= 1:
        results = [job(e) for e in ev]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(job, ev))
    sols = [s for s, _ in results]
    diags = {k: np.array([d[k] for _, d in results]) for k in results[0][1]}
    if keep_solutions:
        diags["solutions"] = sols
    sgrid = grid if grid is not None else grid_for(potential, ev[-1], box_factor)
    a = solve_scattering(sample(potential, sgrid)).a
    return EnergyCurve(
        e=ev,
        rho=np.array([s.rho for s in sols]),
        rho_lo=np.array([s.rho_bounds[0] for s in sols]),
        rho_hi=np.array([s.rho_bounds[1] for s in sols]),
        converged=np.array([s.converged for s in sols]),
        potential=potential.label(),
        a=a,
        intv=integral_v(potential, sgrid),
        diagnostics=diags,
    )


def _require_monotone(curve: EnergyCurve):
    bad = curve.monotone_violations()
    if bad:
        raise CurveNotMonotone(
            f"rho(e) is not strictly increasing at rows {bad}; monotonicity of rho(e) "
            "is an open conjecture and this curve is a counterexample or under-resolved"
        )


def invert_curve(curve: EnergyCurve, rho_target: float) -> float:
    """e at density ``rho_target`` by monotone cubic interpolation of (log rho, log e)."""
    _require_monotone(curve)
    lo, hi = curve.rho[0], curve.rho[-1]
    if not lo <= rho_target <= hi:
        raise ValueError(f"rho_target={rho_target:g} outside the curve range [{lo:g}, {hi:g}]")
    hit = np.nonzero(curve.rho == rho_target)[0]
    if hit.size:
        return float(curve.e[hit[0]])
    f = PchipInterpolator(np.log(curve.rho), np.log(curve.e))
    return float(np.exp(f(np.log(rho_target))))


def lhy_check(curve: EnergyCurve, a: float | None = None, max_rho_a3: float = 1e-4) -> list:
    """``c_hat = (e / (2 pi rho a) - 1) / sqrt(rho a^3)`` on low-density rows.

    Parameters
    ----------
    curve : EnergyCurve
    a : float, optional
        Scattering length, default ``curve.a``.
    max_rho_a3 : float
        Only rows with ``rho a^3`` below this are reported.

    Returns
    -------
    list of (rho, c_hat)
        In increasing rho. The expected limit as rho -> 0 is `LHY_CONSTANT`.
    """
    a = curve.a if a is None else a
    if a is None or not a > 0:
        raise ValueError("a positive scattering length is required")
    out = []
    for e, rho in zip(curve.e, curve.rho):
        x = rho * a**3
        if x <= max_rho_a3:
            out.append((float(rho), float((e / (2 * np.pi * rho * a) - 1) / np.sqrt(x))))
    return out


def high_density_check(curve: EnergyCurve, intv: float | None = None) -> list:
    """``e / ((rho / 2) int V)`` per row, as (rho, ratio). Bounded above by 1."""
    intv = curve.intv if intv is None else intv
    if intv is None or not intv > 0:
        raise ValueError("a positive potential integral is required")
    return [(float(r), float(e / (0.5 * r * intv))) for e, r in zip(curve.e, curve.rho)]


def _h_local(sol: Solution):
    v = sol.V.values
    nz = np.nonzero(v > 0)[0]
    m = int(nz[-1]) + 1 if nz.size else 1
    r = sol.grid.r[:m + 1]
    return r, v[:m + 1] * (1 - sol.u.values[:m + 1])


def beta_small_k(sol: Solution, nodes: int = 3) -> float:
    """beta from a least-squares fit ``S(k) = s0 - beta k^2`` on the smallest k nodes."""
    k = sol.s_of_k.k[:nodes]
    S = sol.s_of_k.values[:nodes]
    A = np.column_stack([np.ones_like(k), -k * k])
    (_, beta), *_ = np.linalg.lstsq(A, S, rcond=None)
    return float(beta)


def extract_beta(sol: Solution, check: bool = True) -> float:
    """Small-k coefficient of ``S(k) = 1 - beta k^2 + O(k^4)``.

    Computed from the second moment, ``beta = (rho / 12 e) int |x|^2 (1 - u) V``,
    with the same trapezoid rule as the other integrals. With ``check`` the
    value is compared against `beta_small_k` and a warning is issued if they
    differ by more than 1%.

    Raises
    ------
    ValueError
        If beta is not positive.
    """
    r, h = _h_local(sol)
    w = 4 * np.pi * sol.grid.spacing * r**4
    beta = sol.rho / (12 * sol.e) * float(np.dot(w, h))
    if not beta > 0:
        raise ValueError(f"beta = {beta:g} is not positive")
    if check:
        fit = beta_small_k(sol)
        if abs(fit - beta) > 0.01 * beta:
            warnings.warn(f"beta moment {beta:.6g} and small-k fit {fit:.6g} differ by more than 1%")
    return beta


@dataclass(frozen=True)
class DecayReport:
    """Power-law fit ``u(r) ~ alpha / r^p`` on a window.

    Attributes
    ----------
    p : float
        Fitted exponent (positive for decay).
    alpha_hat : float
        Fitted amplitude.
    alpha_pred : float
        ``sqrt(1/(2e) + beta) / (pi^2 rho)``.
    beta : float
    r_lo, r_hi : float
        Fit window.
    rms : float
        Root-mean-square residual of the log-log fit.
    power_law : bool
        Whether ``rms`` is below the threshold used for the fit.
    """

    p: float
    alpha_hat: float
    alpha_pred: float
    beta: float
    r_lo: float
    r_hi: float
    rms: float
    power_law: bool

    @property
    def rel_dev(self) -> float:
        return abs(self.alpha_hat - self.alpha_pred) / self.alpha_pred

    def to_dict(self) -> dict:
        return {
            "p": self.p, "alpha_hat": self.alpha_hat, "alpha_pred": self.alpha_pred,
            "beta": self.beta, "r_lo": self.r_lo, "r_hi": self.r_hi,
            "rel_dev": self.rel_dev, "rms": self.rms, "power_law": self.power_law,
        }


def fit_power_law(r: np.ndarray, u: np.ndarray):
    """Least-squares line through (log r, log u). Returns (p, alpha, rms)."""
    x, y = np.log(r), np.log(u)
    slope, icpt = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return float(-slope), float(np.exp(icpt)), rms


def decay_fit(sol: Solution, window=None, rms_threshold: float = 0.02,
              floor: float = 1e-14) -> DecayReport:
    """Fit the algebraic tail of ``sol.u``.

    The default window is ``[r_lo, 4 r_lo]`` with ``r_lo = max(10 / sqrt(e), 5 R)``,
    where R is the mean radius of the potential. At that distance the
    Yukawa-scale part is below ``e^-20`` and the ``r^-5`` correction to the
    tail is a few percent. The window must end before ``r_max / 3``, where
    images from the box boundary set in.

    Raises
    ------
    ValueError
        If the window leaves the usable part of the grid, holds too few nodes,
        or u falls below ``100 * floor * max u`` in it.
    """
    e = sol.e
    grid = sol.grid
    r = grid.r
    v = sol.V.values
    w = grid.weights()
    r_pot = float(np.dot(w, r * v) / np.dot(w, v))
    if window is None:
        r_lo = max(10 / np.sqrt(e), 5 * r_pot)
        r_hi = 4 * r_lo
    else:
        r_lo, r_hi = map(float, window)
    if not r_lo < r_hi:
        raise ValueError(f"empty fit window [{r_lo:g}, {r_hi:g}]")
    if r_hi > grid.r_max / 3:
        raise ValueError(
            f"fit window ends at {r_hi:g} but the grid only supports {grid.r_max / 3:g}; "
            f"increase r_max to at least {3 * r_hi:g}"
        )
    sel = (r >= r_lo) & (r <= r_hi)
    if sel.sum() < 8:
        raise ValueError("fewer than 8 nodes in the fit window; increase r_max or refine the grid")
    uw = sol.u.values[sel]
    if not np.all(uw > 100 * floor * np.max(np.abs(sol.u.values))):
        raise ValueError("the tail is below the discretization floor in the fit window; increase r_max")
    p, alpha, rms = fit_power_law(r[sel], uw)
    beta = extract_beta(sol, check=False)
    alpha_pred = np.sqrt(1 / (2 * e) + beta) / (np.pi**2 * sol.rho)
    return DecayReport(p, alpha, float(alpha_pred), beta, float(r_lo), float(r_hi), rms,
                       rms <= rms_threshold)


def convexity_profile(curve: EnergyCurve) -> list:
    """``(1/4 pi) d^2(rho e)/d rho^2`` by three-point differences on the samples.

    Returns
    -------
    list of (rho, value)
        One entry per interior row.
    """
    if len(curve) < 3:
        raise ValueError("need at least three rows")
    _require_monotone(curve)
    x, y = curve.rho, curve.rho_e
    h0 = np.diff(x)[:-1]
    h1 = np.diff(x)[1:]
    d2 = 2 * ((y[2:] - y[1:-1]) / h1 - (y[1:-1] - y[:-2]) / h0) / (h0 + h1)
    return [(float(r), float(v)) for r, v in zip(x[1:-1], d2 / (4 * np.pi))]


def compare_reference(curve: EnergyCurve, reference) -> float:
    """Largest ``|e_curve(rho) - e_ref| / e_ref`` over reference rows.

    Rows outside the density range of the curve are skipped with a warning.
    """
    worst = 0.0
    used = 0
    for rho, e_ref in reference:
        if not curve.rho[0] <= rho <= curve.rho[-1]:
            warnings.warn(f"reference row rho={rho:g} is outside the curve range; skipped")
            continue
        worst = max(worst, abs(invert_curve(curve, rho) - e_ref) / e_ref)
        used += 1
    if used == 0:
        raise ValueError("no reference rows inside the curve range")
    return float(worst)


def convergence_rate(trace: IterationTrace, n_range=(10, 200), limit: float | None = None,
                     side: str = "lower") -> float:
    """Log-log slope of the distance to ``1/rho`` versus n.

    Parameters
    ----------
    trace : IterationTrace
    n_range : (int, int)
        Steps included in the fit.
    limit : float, optional
        ``1/rho``; defaults to the last ``b_n``.
    side : {"lower", "upper"}
        ``1/rho - a_n`` (the L1 distance of u_n to u) or ``b_n - 1/rho``.
    """
    if len(trace) < 20:
        raise ValueError("need at least 20 recorded steps")
    lim = trace.b[-1] if limit is None else limit
    sel = (trace.n >= n_range[0]) & (trace.n <= n_range[1])
    d = lim - trace.a[sel] if side == "lower" else trace.b[sel] - lim
    ok = d > 0
    if ok.sum() < 2:
        raise ValueError("not enough positive distances in the range")
    return float(np.polyfit(np.log(trace.n[sel][ok]), np.log(d[ok]), 1)[0])


def rate_constant(trace: IterationTrace) -> float:
    """``max_n n (b_n - a_n)^2`` over the run."""
    n = trace.n[1:]
    return float(np.max(n * (trace.b[1:] - trace.a[1:]) ** 2))
