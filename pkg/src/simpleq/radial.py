"""Uniform radial grids, radial fields and their quadrature.

A radially symmetric function f(|x|) on R^3 is stored by its samples at the
nodes r_j = j * dr, j = 0..N. Integrals over R^3 use the composite trapezoid
rule applied to 4 pi r^2 f(r).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

__all__ = [
    "RadialGrid",
    "RadialField",
    "integrate_radial",
    "l1_distance",
    "pointwise_max_violation",
    "default_grid",
]


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid with nodes ``r_j = j * spacing`` for ``j = 0..n_points``.

    Parameters
    ----------
    n_points : int
        Number of intervals N. The grid has N + 1 nodes and ``r_max = N * spacing``.
    spacing : float
        Node spacing.
    """

    n_points: int
    spacing: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise ValueError(f"spacing must be positive and finite, got {self.spacing!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "spacing", float(self.spacing))

    @classmethod
    def from_rmax(cls, r_max: float, n_points: int) -> "RadialGrid":
        return cls(n_points, r_max / n_points)

    @property
    def r_max(self) -> float:
        return self.n_points * self.spacing

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.n_points + 1) * self.spacing

    @property
    def dk(self) -> float:
        """Spacing of the conjugate wavenumber grid, pi / r_max."""
        return np.pi / self.r_max

    @property
    def k(self) -> np.ndarray:
        """Conjugate wavenumbers ``k_m = m pi / r_max`` for ``m = 1..N-1``."""
        return np.arange(1, self.n_points) * self.dk

    def refine(self) -> "RadialGrid":
        """Grid with half the spacing and the same r_max."""
        return RadialGrid(2 * self.n_points, self.spacing / 2)

    def weights(self) -> np.ndarray:
        """Trapezoid weights for the integral of f over R^3."""
        w = 4 * np.pi * self.spacing * self.r**2
        w[-1] *= 0.5
        return w


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples of a radial function on a `RadialGrid`.

    Parameters
    ----------
    grid : RadialGrid
    values : array_like
        ``f(r_j)`` for every node, length ``grid.n_points + 1``.
    """

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points + 1,):
            raise ValueError(
                f"values has shape {v.shape}, expected ({self.grid.n_points + 1},)"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite (corrupted field)")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @classmethod
    def from_function(cls, grid: RadialGrid, func) -> "RadialField":
        return cls(grid, func(grid.r))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.n_points + 1))

    def __len__(self):
        return self.values.size


def integrate_radial(f: RadialField) -> float:
    """Trapezoid approximation of ``4 pi int_0^r_max r^2 f(r) dr``.

    Raises
    ------
    ValueError
        If the field contains non-finite values.
    """
    v = np.asarray(f.values)
    if not np.all(np.isfinite(v)):
        raise ValueError("field values must be finite (corrupted field)")
    return float(np.dot(f.grid.weights(), v))


def _same_grid(f: RadialField, g: RadialField):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


def l1_distance(f: RadialField, g: RadialField) -> float:
    """L1 distance over R^3 between two fields on the same grid."""
    _same_grid(f, g)
    return integrate_radial(RadialField(f.grid, np.abs(f.values - g.values)))


def pointwise_max_violation(f: RadialField, lo: float, hi: float) -> float:
    """Largest excursion of f outside ``[lo, hi]``, zero if f stays inside."""
    v = f.values
    return float(max(0.0, lo - v.min(), v.max() - hi))


def default_grid(e: float, spacing: float, support: float = 0.0,
                 box_factor: float = 30.0, min_points: int = 2**13) -> RadialGrid:
    """Grid used for a solve at energy ``e``.

    The spacing resolves the potential. The box must hold the potential
    support and the Yukawa scale, ``r_max >= box_factor / sqrt(e)``. The node
    count is the smallest FFT-friendly size above ``min_points`` that reaches
    that radius.

    Parameters
    ----------
    e : float
        Energy parameter, > 0.
    spacing : float
        Node spacing.
    support : float
        Radius beyond which the potential is negligible.
    box_factor : float
        Box radius in units of ``1/sqrt(e)``.
    min_points : int
        Lower bound on the number of intervals.
    """
    if not e > 0:
        raise ValueError(f"e must be positive, got {e!r}")
    r_target = max(support, box_factor / np.sqrt(e))
    n = max(int(min_points), int(np.ceil(r_target / spacing)))
    return RadialGrid(scipy.fft.next_fast_len(n, real=True), spacing)
