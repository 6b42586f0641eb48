"""Radial Fourier transform on the DST-I grid pairing.

For a radial f, ``f_hat(k) = (4 pi / k) int_0^inf r sin(kr) f(r) dr`` and
``f(r) = 1 / (2 pi^2 r) int_0^inf k sin(kr) f_hat(k) dk``. On the grid
r_j = j dr (j = 0..N) and k_m = m pi / r_max (m = 1..N-1) both integrals become
a type-I discrete sine transform. The discrete pair is exactly invertible.
Values beyond r_max are treated as zero, so ``f(r_max)`` does not enter.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .radial import RadialField, RadialGrid, integrate_radial

__all__ = [
    "SpectralField",
    "radial_fourier",
    "inverse_radial_fourier",
    "autoconvolve",
    "structure_factor",
    "spectral_pairing",
    "dst1",
]


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Samples ``f_hat(k_m)`` on the wavenumber grid conjugate to ``grid``.

    Parameters
    ----------
    grid : RadialGrid
        The spatial grid. Wavenumbers are ``grid.k``.
    values : array_like
        Length ``grid.n_points - 1``.
    at_zero : float, optional
        The k -> 0 value, i.e. the integral of f over R^3, when known.
    """

    grid: RadialGrid
    values: np.ndarray
    at_zero: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points - 1,):
            raise ValueError(f"values has shape {v.shape}, expected ({self.grid.n_points - 1},)")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectral values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.at_zero is not None:
            object.__setattr__(self, "at_zero", float(self.at_zero))

    @property
    def k(self) -> np.ndarray:
        return self.grid.k


def _sine_matrix_apply(x: np.ndarray) -> np.ndarray:
    # y_m = 2 sum_j x_j sin(pi m j / N), evaluated directly in O(N^2)
    n = x.size + 1
    j = np.arange(1, n)
    out = np.empty_like(x)
    step = max(1, 2**22 // n)
    for start in range(0, n - 1, step):
        m = j[start:start + step, None]
        out[start:start + step] = 2 * np.sin(np.pi * ((m * j[None, :]) % (2 * n)) / n) @ x
    return out


def dst1(x: np.ndarray, direct: bool = False) -> np.ndarray:
    """Unnormalized type-I DST, ``y_m = 2 sum_j x_j sin(pi (m+1)(j+1) / (n+1))``."""
    if direct:
        return _sine_matrix_apply(np.asarray(x, dtype=float))
    return scipy.fft.dst(x, type=1)


def radial_fourier(f: RadialField, direct: bool = False) -> SpectralField:
    """Radial Fourier transform of a field.

    Parameters
    ----------
    f : RadialField
    direct : bool
        Use the O(N^2) sine sum instead of the FFT. Kept as an independent
        reference path.

    Returns
    -------
    SpectralField
        ``f_hat(k_m)``, with ``at_zero`` set to the k -> 0 limit of the same
        quadrature.
    """
    g = f.grid
    r = g.r[1:-1]
    k = g.k
    x = r * f.values[1:-1]
    vals = 2 * np.pi * g.spacing / k * dst1(x, direct)
    return SpectralField(g, vals, at_zero=4 * np.pi * g.spacing * np.dot(r, x))


def inverse_radial_fourier(fh: SpectralField, direct: bool = False) -> RadialField:
    """Inverse radial Fourier transform. ``f(r_max)`` is returned as zero."""
    g = fh.grid
    k = g.k
    r = g.r[1:-1]
    c = g.dk / (2 * np.pi**2)
    out = np.zeros(g.n_points + 1)
    out[1:-1] = c / r * 0.5 * dst1(k * fh.values, direct)
    out[0] = c * np.dot(k * k, fh.values)
    return RadialField(g, out)


def autoconvolve(f: RadialField) -> RadialField:
    """Self-convolution ``f * f`` over R^3, via the transform square."""
    fh = radial_fourier(f)
    return inverse_radial_fourier(SpectralField(fh.grid, fh.values**2))


def structure_factor(u: RadialField, V: RadialField, rho: float, e: float) -> SpectralField:
    """``S(k) = (rho / 2e) FT[(1 - u) V](k)``; ``at_zero`` holds S(0) by direct quadrature."""
    if not (e > 0 and rho > 0):
        raise ValueError(f"need e > 0 and rho > 0, got e={e!r}, rho={rho!r}")
    if u.grid != V.grid:
        raise ValueError("u and V must share a grid")
    h = RadialField(u.grid, (1 - u.values) * V.values)
    c = rho / (2 * e)
    hh = radial_fourier(h)
    return SpectralField(u.grid, c * hh.values, at_zero=c * integrate_radial(h))


def spectral_pairing(fh: SpectralField, gh: SpectralField) -> float:
    """``(2 pi)^-3 int f_hat g_hat dk`` over R^3 by the k-grid rectangle rule."""
    k = fh.grid.k
    return float(fh.grid.dk / (2 * np.pi**2) * np.dot(k * k, fh.values * gh.values))
