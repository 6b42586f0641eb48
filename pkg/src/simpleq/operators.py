"""Yukawa operator, full resolvent, and the zero-energy scattering problem.

The resolvent ``K_e = (-Delta + 4e + V)^-1`` and the scattering equation are
radial boundary value problems. With ``w = r f`` they become
``-w'' + c(r) w = s(r)`` on a uniform grid, which is discretized with the
fourth-order Numerov stencil. The system stays tridiagonal with negative
off-diagonals and a dominant diagonal, so the discrete operator keeps a
positive inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .radial import RadialField, integrate_radial
from .transforms import SpectralField, inverse_radial_fourier, radial_fourier

__all__ = [
    "ScatteringResult",
    "apply_yukawa",
    "apply_resolvent",
    "solve_scattering",
    "decay_ratio",
    "numerov_solve",
    "support_index",
]


def decay_ratio(kappa2: float, dr: float) -> float:
    """Ratio ``w_{j+1} / w_j`` of the decaying discrete solution of ``w'' = kappa2 w``."""
    x = dr * dr * kappa2
    t = (1 + 5 * x / 12) / (1 - x / 12)
    # t - sqrt(t^2 - 1) written to avoid cancellation for small x
    return 1.0 / (t + np.sqrt(t * t - 1))


def numerov_solve(c: np.ndarray, s: np.ndarray, dr: float, tail: float) -> np.ndarray:
    """Solve ``-w'' + c w = s`` with ``w_0 = 0`` and ``w_{M+1} = tail * w_M``.

    Parameters
    ----------
    c, s : ndarray
        Coefficient and source at nodes ``0..M+1``. ``s[M+1]`` is the source
        just outside the solved range.
    dr : float
        Node spacing.
    tail : float
        Closure ratio: 1 for a flat far field, `decay_ratio` for a decaying one.

    Returns
    -------
    ndarray
        ``w_1..w_M``.
    """
    m = c.size - 2
    h = dr * dr / 12
    off = -(1 - h * c)
    ab = np.empty((3, m))
    ab[0, 0] = 0.0
    ab[0, 1:] = off[2:m + 1]
    ab[1] = 2 + 10 * h * c[1:m + 1]
    ab[1, -1] += off[m + 1] * tail
    ab[2, :-1] = off[1:m]
    ab[2, -1] = 0.0
    rhs = h * (s[2:m + 2] + 10 * s[1:m + 1] + s[0:m])
    if np.any(off >= 0) or np.any(ab[1] <= 0):
        raise ValueError("resolvent system is not an M-matrix; reduce the grid spacing")
    try:
        w = solve_banded((1, 1), ab, rhs, check_finite=False)
    except LinAlgError as exc:
        raise ValueError(f"singular tridiagonal system: {exc}") from None
    if not np.all(np.isfinite(w)):
        raise ValueError("singular tridiagonal system: non-finite solution")
    return w


def _field_from_w(r: np.ndarray, w: np.ndarray) -> np.ndarray:
    # f = w / r, the origin from the even quadratic through f_1 and f_2
    f = np.empty(w.size + 1)
    f[1:] = w / r[1:w.size + 1]
    f[0] = (4 * f[1] - f[2]) / 3 if w.size >= 2 else f[1]
    return f


def support_index(V: np.ndarray, rel: float = 1e-16) -> int:
    """Index of the last node where ``V > rel * max V`` (0 if V vanishes)."""
    vmax = np.max(V)
    if vmax <= 0:
        return 0
    return int(np.nonzero(V > rel * vmax)[0][-1])


def apply_yukawa(g: RadialField, e: float) -> RadialField:
    """``(-Delta + 4e)^-1 g`` by spectral division."""
    if not e > 0:
        raise ValueError(f"the Yukawa operator needs e > 0, got {e!r}")
    gh = radial_fourier(g)
    return inverse_radial_fourier(SpectralField(g.grid, gh.values / (gh.k**2 + 4 * e)))


def apply_resolvent(g: RadialField, V: RadialField, e: float) -> RadialField:
    """``(-Delta + 4e + V)^-1 g`` by a tridiagonal solve on the whole grid.

    The far end uses the discrete decaying mode of the free operator, so no
    artificial reflection is introduced when ``g`` and ``V`` have decayed.
    """
    if not e > 0:
        raise ValueError(f"the resolvent needs e > 0, got {e!r}")
    if g.grid != V.grid:
        raise ValueError("g and V must share a grid")
    if np.any(V.values < 0):
        raise ValueError("V must be non-negative")
    grid = g.grid
    n = grid.n_points
    r = grid.r
    c = np.empty(n + 2)
    c[:n + 1] = 4 * e + V.values
    c[n + 1] = 4 * e
    s = np.zeros(n + 2)
    s[:n + 1] = r * g.values
    w = numerov_solve(c, s, grid.spacing, decay_ratio(4 * e, grid.spacing))
    return RadialField(grid, _field_from_w(r, w))


@dataclass(frozen=True)
class ScatteringResult:
    """Zero-energy scattering solution.

    Attributes
    ----------
    phi : RadialField
        Scattering solution, ``phi ~ a / r`` outside the potential.
    a_boundary : float
        ``r phi(r)`` at the outer edge.
    a_integral : float
        ``(1 / 4 pi) int V (1 - phi)``.
    a : float
        Adopted value (``a_integral``).
    """

    phi: RadialField
    a_boundary: float
    a_integral: float

    @property
    def a(self) -> float:
        return self.a_integral

    @property
    def agreement(self) -> float:
        """Relative difference between the two estimates."""
        if self.a_integral == 0:
            return abs(self.a_boundary)
        return abs(self.a_boundary - self.a_integral) / abs(self.a_integral)


def solve_scattering(V: RadialField) -> ScatteringResult:
    """Solve ``-Delta phi = (1 - phi) V`` with ``phi -> 0`` at infinity.

    ``w = r phi`` obeys ``-w'' + V w = r V`` with ``w(0) = 0``. Outside the
    support of V it is constant, equal to the scattering length.

    Raises
    ------
    ValueError
        If V is negative somewhere or has not decayed at the edge of the grid.
    """
    grid = V.grid
    v = V.values
    if np.any(v < 0):
        raise ValueError("V must be non-negative")
    vmax = float(np.max(v))
    if vmax == 0:
        return ScatteringResult(RadialField.zeros(grid), 0.0, 0.0)
    if v[-1] >= 1e-12 * vmax:
        raise ValueError(
            f"V has not decayed at r_max={grid.r_max:g} (V/max V = {v[-1] / vmax:.2e}); "
            "use a larger grid"
        )
    r = grid.r
    m = min(support_index(v) + 1, grid.n_points - 1)
    c = v[:m + 2]
    s = r[:m + 2] * c
    w = numerov_solve(c, s, grid.spacing, 1.0)
    wfull = np.full(grid.n_points, w[-1])
    wfull[:m] = w
    phi = RadialField(grid, _field_from_w(r, wfull))
    a_int = integrate_radial(RadialField(grid, v * (1 - phi.values))) / (4 * np.pi)
    return ScatteringResult(phi, float(wfull[-1]), float(a_int))
