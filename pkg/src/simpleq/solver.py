"""Monotone fixed-point iteration for the constrained equation

    (-Delta + 4e + V) u = V + 2 e rho u*u,     e = (rho / 2) int (1 - u) V.

Starting from ``u_0 = 0`` the iteration is

    u_n = K_e (V + 2 e rho_{n-1} u_{n-1}*u_{n-1}),   rho_n = 2e / int (1 - u_n) V,

with ``K_e = (-Delta + 4e + V)^-1``. The iterates increase monotonically, and
``a_n = int u_n`` and ``b_n = 1/rho_n`` enclose ``1/rho(e)`` from below and
above.

Implementation notes
--------------------
The iterates have a slowly decaying ``r^-4`` tail, so a large part of their
mass lies far outside any practical box. The iterate is therefore carried
exactly in Fourier space, wavenumber by wavenumber:

    u_hat_n = (h_hat_n + 2 e rho_{n-1} u_hat_{n-1}^2) / (k^2 + 4e),
    h_n = V (1 - u_n).

The short-range function h_n only needs u_n where V is non-negligible. There
``u_n = z + w``, with ``w = G_e(2 e rho u*u)`` from the spectral data and
``z = K_e(V (1 - w))`` from a small tridiagonal solve. ``a_n`` is the exact
k = 0 value of the recursion, and the telescoping relation
``2 a_n = b_n + a_{n-1}^2 / b_{n-1}`` holds to rounding.

``rho_n`` converges quickly. ``a_n`` trails ``1/rho`` by about ``2/(rho n)``,
because each step adds only the mass of one more convolution shell. The
iteration therefore stops when ``rho_n`` has stagnated at rounding level, or
when the enclosure closes below ``bracket_tol``. The remaining steps are
then summed in closed form. With h frozen, the per-wavenumber recursion
converges to the smaller root

    u_hat = (F - sqrt(F^2 - S)) / rho,   F = 1 + k^2 / 4e,   S = rho h_hat / 2e,

and the reported ``Solution.u`` is one further application of the map to
that limit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .operators import _field_from_w, decay_ratio, numerov_solve, support_index
from .radial import RadialField, RadialGrid, integrate_radial
from .transforms import SpectralField, radial_fourier

__all__ = [
    "SolveParams",
    "IterationTrace",
    "Solution",
    "iterate_step",
    "solve",
    "residual_fixed_point",
    "fixed_point_map",
    "SolverBreakdown",
    "grid_for",
]


class SolverBreakdown(RuntimeError):
    """The iteration produced ``int (1 - u) V <= 0``."""


@dataclass(frozen=True)
class SolveParams:
    """Options for `solve`.

    Parameters
    ----------
    e : float
        Energy parameter, > 0.
    bracket_tol : float
        Stop when ``(b_n - a_n) / b_n`` falls below this.
    max_iter : int
        Iteration cap.
    grid : RadialGrid, optional
        Overrides the grid of the potential field when resampling is handled
        by the caller. Kept for bookkeeping; `solve` uses ``V.grid``.
    stall_tol : float
        Stop once ``b_{n-1} - b_n <= stall_tol * b_n``, i.e. ``rho_n`` no longer
        moves. A negative value disables this test.
    min_iter : int
        Steps taken before the stagnation test is applied.
    """

    e: float
    bracket_tol: float = 1e-10
    max_iter: int = 100_000
    grid: RadialGrid | None = None
    stall_tol: float = 1e-14
    min_iter: int = 10

    def __post_init__(self):
        if not (np.isfinite(self.e) and self.e > 0):
            raise ValueError(f"e must be positive, got {self.e!r}")
        if not 0 < self.bracket_tol < 1:
            raise ValueError(f"bracket_tol must lie in (0, 1), got {self.bracket_tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """Per-step scalars, starting at n = 0 (``u_0 = 0``).

    Attributes
    ----------
    n : ndarray of int
    a : ndarray
        ``int u_n``.
    b : ndarray
        ``(1/2e) int (1 - u_n) V``.
    min_increment : float
        Smallest ``u_n - u_{n-1}`` seen on the potential support.
    """

    n: np.ndarray
    a: np.ndarray
    b: np.ndarray
    min_increment: float = 0.0

    @property
    def rho(self) -> np.ndarray:
        return 1 / self.b

    @property
    def gap(self) -> np.ndarray:
        """Relative enclosure width ``(b_n - a_n) / b_n``."""
        return (self.b - self.a) / self.b

    def telescoping_residual(self) -> np.ndarray:
        """``|2 a_n - b_n - a_{n-1}^2 / b_{n-1}| / b_n`` for n >= 1."""
        a, b = self.a, self.b
        return np.abs(2 * a[1:] - b[1:] - a[:-1] ** 2 / b[:-1]) / b[1:]

    def __len__(self):
        return self.n.size


@dataclass(frozen=True, eq=False)
class Solution:
    """Result of `solve`.

    Attributes
    ----------
    u : RadialField
        Converged solution (tail summed in closed form).
    e, rho : float
        The point ``(e, rho(e))``; ``rho = lim rho_n = 1 / b_final``.
    a_final, b_final : float
        Last enclosure ``a_n <= 1/rho <= b_n``.
    trace : IterationTrace
    residual_fixed_point : float
        Relative L1 size of ``u - Phi(u)``.
    constraint_residual : float
        ``|rho int u - 1|``, using the exact mass of ``u_hat``.
    s_of_k : SpectralField
        Structure factor; ``at_zero`` is S(0).
    u_hat : SpectralField
        Fourier transform of u, ``at_zero`` its integral.
    u_last : RadialField
        Last iterate ``u_n``.
    V : RadialField
    converged : bool
        The iteration stopped on the enclosure or on stagnation of rho_n.
    certified : bool
        The enclosure itself closed below ``bracket_tol``.
    stop_reason : str
        ``"bracket"``, ``"stagnation"`` or ``"max_iter"``.
    """

    u: RadialField
    e: float
    rho: float
    a_final: float
    b_final: float
    trace: IterationTrace
    residual_fixed_point: float
    constraint_residual: float
    s_of_k: SpectralField
    u_hat: SpectralField
    u_last: RadialField
    V: RadialField
    converged: bool
    certified: bool
    stop_reason: str
    params: SolveParams = field(repr=False, default=None)

    @property
    def iterations(self) -> int:
        return int(self.trace.n[-1])

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @property
    def rho_bounds(self):
        """Enclosure ``(1/b_final, 1/a_final)`` of rho from the iteration."""
        return 1 / self.b_final, (1 / self.a_final if self.a_final > 0 else np.inf)


class _Map:
    """The map ``u_hat -> u`` restricted to what the iteration needs.

    Holds the grid, the short-range window where V is non-negligible, and the
    quadrature weights on that window.
    """

    def __init__(self, V: RadialField, e: float):
        if not e > 0:
            raise ValueError(f"e must be positive, got {e!r}")
        v = V.values
        if np.any(v < 0):
            raise ValueError("V must be non-negative")
        grid = V.grid
        n = grid.n_points
        self.grid, self.e, self.V = grid, e, V
        self.dr = grid.spacing
        self.k = grid.k
        self.k2e = self.k**2 + 4 * e
        self.r = grid.r
        # unknowns 1..m of the short-range solve, node m+1 is the closure
        self.m = min(max(support_index(v) + 1, 2), n - 1)
        m = self.m
        self.rl = self.r[:m + 1]
        self.vl = v[:m + 1]
        self.c = np.empty(m + 2)
        self.c[:m + 1] = 4 * e + self.vl
        self.c[m + 1] = 4 * e + (v[m + 1] if m + 1 <= n else 0.0)
        self.q = decay_ratio(4 * e, self.dr)
        self.wq = 4 * np.pi * self.dr * self.rl**2
        if m == n:
            self.wq[-1] *= 0.5
        self.pref = 2 * np.pi * self.dr / self.k
        self.cinv = grid.dk / (2 * np.pi**2)

    def integral(self, h_local: np.ndarray) -> float:
        return float(np.dot(self.wq, h_local))

    def fields(self, uh: np.ndarray, rho: float):
        """Return (u on the window, w on the whole grid, z on the window).

        ``w = G_e(2 e rho u*u)`` and ``z = K_e(V (1 - w))``.
        """
        e, m = self.e, self.m
        wh = 2 * e * rho * uh * uh / self.k2e
        w = np.zeros(self.grid.n_points + 1)
        w[1:-1] = self.cinv / self.r[1:-1] * 0.5 * scipy.fft.dst(self.k * wh, type=1)
        w[0] = self.cinv * np.dot(self.k * self.k, wh)
        s = np.zeros(m + 2)
        s[:m + 1] = self.rl * self.vl * (1 - w[:m + 1])
        zw = numerov_solve(self.c, s, self.dr, self.q)
        z = _field_from_w(self.rl, zw)
        return z + w[:m + 1], w, z

    def h_hat(self, h_local: np.ndarray) -> np.ndarray:
        x = np.zeros(self.grid.n_points - 1)
        x[:self.m] = self.rl[1:] * h_local[1:]
        return self.pref * scipy.fft.dst(x, type=1)

    def full(self, w: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Assemble u = z + w on the whole grid; z decays like its discrete mode."""
        m = self.m
        u = w.copy()
        u[:m + 1] += z
        j = np.arange(m + 1, self.grid.n_points + 1)
        with np.errstate(under="ignore"):
            u[m + 1:] += z[m] * self.rl[m] / self.r[j] * self.q ** (j - m)
        return u


def fixed_point_map(u_hat: SpectralField, rho: float, V: RadialField, e: float) -> RadialField:
    """``Phi(u) = K_e(V + 2 e rho u*u)`` evaluated from the transform of u."""
    mp = _Map(V, e)
    _, w, z = mp.fields(np.asarray(u_hat.values), rho)
    return RadialField(V.grid, mp.full(w, z))


def iterate_step(u_prev: RadialField, rho_prev: float, V: RadialField, e: float):
    """One step of the iteration from a field sampled on the grid.

    The transform of ``u_prev`` is taken over the box, so any mass outside
    ``r_max`` is ignored. `solve` avoids this by carrying the transform itself.

    Returns
    -------
    (RadialField, float)
        ``u_next`` and ``rho_next = 2e / int (1 - u_next) V``.

    Raises
    ------
    SolverBreakdown
        If ``int (1 - u_next) V <= 0``.
    """
    if u_prev.grid != V.grid:
        raise ValueError("u_prev and V must share a grid")
    if rho_prev < 0:
        raise ValueError(f"rho_prev must be non-negative, got {rho_prev!r}")
    u_next = fixed_point_map(radial_fourier(u_prev), rho_prev, V, e)
    ih = integrate_radial(RadialField(V.grid, (1 - u_next.values) * V.values))
    if not ih > 0:
        raise SolverBreakdown(f"int (1 - u) V = {ih:.3e} <= 0; the iteration is undefined")
    return u_next, 2 * e / ih


def residual_fixed_point(u: RadialField, rho: float, V: RadialField, e: float,
                         u_hat: SpectralField | None = None) -> float:
    """``||u - Phi(u)||_1 / ||u||_1`` with ``Phi(u) = K_e(V + 2 e rho u*u)``.

    ``u_hat`` supplies the exact transform of u. Without it the transform is
    taken over the box.
    """
    if u_hat is None:
        u_hat = radial_fourier(u)
    phi = fixed_point_map(u_hat, rho, V, e)
    diff = integrate_radial(RadialField(u.grid, np.abs(u.values - phi.values)))
    norm = integrate_radial(RadialField(u.grid, np.abs(u.values)))
    if norm == 0:
        return np.inf if diff > 0 else 0.0
    return diff / norm


def _complete(hh: np.ndarray, k2: np.ndarray, rho: float, e: float) -> np.ndarray:
    # limit of x -> (hh + 2 e rho x^2) / (k^2 + 4e) started below the root
    S = rho * hh / (2 * e)
    F = 1 + k2 / (4 * e)
    disc = np.maximum(F * F - S, 0.0)
    return S / (F + np.sqrt(disc)) / rho


def solve(V: RadialField, params: SolveParams) -> Solution:
    """Run the monotone iteration to convergence.

    Parameters
    ----------
    V : RadialField
        Non-negative potential with positive integral, sampled on the grid
        used for the solve.
    params : SolveParams

    Returns
    -------
    Solution
        ``converged`` is False when ``max_iter`` was reached first.

    Raises
    ------
    ValueError
        For V with vanishing integral or negative values.
    SolverBreakdown
        If ``int (1 - u_n) V`` stops being positive.
    """
    e = float(params.e)
    mp = _Map(V, e)
    intv = mp.integral(mp.vl)
    if not intv > 0:
        raise ValueError("the potential has zero integral; rho(e) is undefined")
    m = mp.m
    uh = np.zeros_like(mp.k)
    a, b = 0.0, intv / (2 * e)
    rho = 1 / b
    ns, avals, bvals = [0], [a], [b]
    u_prev = np.zeros(m + 1)
    min_inc = np.inf
    stop = "max_iter"
    hh = np.zeros_like(mp.k)
    for n in range(1, int(params.max_iter) + 1):
        ul, w_last, z_last = mp.fields(uh, rho)
        min_inc = min(min_inc, float(np.min(ul - u_prev)))
        u_prev = ul
        h = mp.vl * (1 - ul)
        ih = mp.integral(h)
        if not ih > 0:
            raise SolverBreakdown(f"int (1 - u_n) V = {ih:.3e} <= 0 at step {n}")
        hh = mp.h_hat(h)
        a_new = (ih + 2 * e * rho * a * a) / (4 * e)
        b_new = ih / (2 * e)
        uh = (hh + 2 * e * rho * uh * uh) / mp.k2e
        drop = b - b_new
        a, b = a_new, b_new
        rho = 1 / b
        ns.append(n)
        avals.append(a)
        bvals.append(b)
        if (b - a) / b < params.bracket_tol:
            stop = "bracket"
            break
        if n >= params.min_iter and params.stall_tol >= 0 and drop <= params.stall_tol * b:
            stop = "stagnation"
            break
    trace = IterationTrace(np.array(ns), np.array(avals), np.array(bvals), min_inc)

    u_last = RadialField(V.grid, mp.full(w_last, z_last))

    # closed-form sum of the remaining steps, then one application of the map
    uinf = _complete(hh, mp.k**2, rho, e)
    ul_c, w_c, z_c = mp.fields(uinf, rho)
    u = RadialField(V.grid, mp.full(w_c, z_c))
    h_c = mp.vl * (1 - ul_c)
    ih_c = mp.integral(h_c)
    hh_c = mp.h_hat(h_c)
    uh_c = (hh_c + 2 * e * rho * uinf * uinf) / mp.k2e
    mass_c = (ih_c + 2 * e / rho) / (4 * e)
    u_hat = SpectralField(V.grid, uh_c, at_zero=mass_c)
    s_of_k = SpectralField(V.grid, rho * hh_c / (2 * e), at_zero=rho * ih_c / (2 * e))

    res = residual_fixed_point(u, rho, V, e, u_hat=u_hat)
    return Solution(
        u=u, e=e, rho=rho, a_final=a, b_final=b, trace=trace,
        residual_fixed_point=res,
        constraint_residual=abs(rho * mass_c - 1),
        s_of_k=s_of_k, u_hat=u_hat, u_last=u_last, V=V,
        converged=stop != "max_iter", certified=stop == "bracket",
        stop_reason=stop, params=params,
    )


def grid_for(spec, e: float, box_factor: float = 30.0, points_per_range: int = 8,
             min_points: int = 2**13) -> RadialGrid:
    """Default grid for potential ``spec`` at energy ``e``.

    The spacing is ``spec.scale / points_per_range``. The box holds the
    potential support, eight ranges, and ``box_factor / sqrt(e)``.
    """
    from .radial import default_grid

    support = max(8 * spec.scale, spec.support)
    return default_grid(e, spec.scale / points_per_range, support, box_factor, min_points)
