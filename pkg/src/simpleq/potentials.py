"""Repulsive radial potentials.

Four families are available: ``exponential`` (A e^{-r/L}), ``gaussian``
(A e^{-(r/L)^2}), ``square_well`` (A on r <= L) and ``tabulated`` (linear
interpolation of (r, V) pairs).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radial import RadialField, RadialGrid, integrate_radial

__all__ = ["PotentialSpec", "sample", "integral_v", "parse_potential", "FAMILIES"]

FAMILIES = ("exponential", "gaussian", "square_well", "tabulated")

# relative size below which the potential is treated as zero
NEGLIGIBLE = 1e-16


@dataclass(frozen=True)
class PotentialSpec:
    """A non-negative radial potential.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    amplitude : float
        Peak value A (ignored for tabulated potentials).
    range : float
        Decay length L, or the well radius.
    table : tuple of (r, V) pairs, optional
        Samples for ``family="tabulated"``, with increasing r starting at 0.
    zero_extend : bool
        Whether a tabulated potential vanishes beyond its last node. If False
        the table must cover every grid it is sampled on.
    """

    family: str
    amplitude: float = 1.0
    range: float = 1.0
    table: tuple | None = None
    zero_extend: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.family == "tabulated":
            if self.table is None or len(self.table) < 2:
                raise ValueError("tabulated potential needs at least two (r, V) rows")
            t = np.asarray(self.table, dtype=float)
            if t.ndim != 2 or t.shape[1] != 2 or not np.all(np.isfinite(t)):
                raise ValueError("table must be a finite list of (r, V) pairs")
            if t[0, 0] != 0 or np.any(np.diff(t[:, 0]) <= 0):
                raise ValueError("table r column must start at 0 and increase strictly")
            if np.any(t[:, 1] < 0):
                raise ValueError("table V column has negative values; V must be non-negative")
            object.__setattr__(self, "table", tuple(map(tuple, t.tolist())))
        else:
            for name in ("amplitude", "range"):
                x = getattr(self, name)
                if not (math.isfinite(x) and x > 0):
                    raise ValueError(f"{name} must be positive and finite, got {x!r}")

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        A, L = self.amplitude, self.range
        if self.family == "exponential":
            return A * np.exp(-r / L)
        if self.family == "gaussian":
            return A * np.exp(-(r / L) ** 2)
        if self.family == "square_well":
            return np.where(r <= L, A, 0.0)
        t = np.asarray(self.table)
        if not self.zero_extend and np.max(r, initial=0.0) > t[-1, 0]:
            raise ValueError(
                f"tabulated potential ends at r={t[-1, 0]:g} but is sampled up to "
                f"r={np.max(r):g}; extend the table or allow zero extension"
            )
        return np.maximum(np.interp(r, t[:, 0], t[:, 1], right=0.0), 0.0)

    @property
    def scale(self) -> float:
        """Characteristic range of the potential."""
        if self.family != "tabulated":
            return self.range
        t = np.asarray(self.table)
        pos = np.nonzero(t[:, 1] > 0)[0]
        return float(t[pos[-1], 0]) if pos.size else float(t[-1, 0])

    @property
    def support(self) -> float:
        """Radius beyond which V is below ``NEGLIGIBLE`` times its maximum."""
        L = self.range
        if self.family == "exponential":
            return L * math.log(1 / NEGLIGIBLE)
        if self.family == "gaussian":
            return L * math.sqrt(math.log(1 / NEGLIGIBLE))
        if self.family == "square_well":
            return L
        t = np.asarray(self.table)
        if not self.zero_extend:
            return float(t[-1, 0])
        pos = np.nonzero(t[:, 1] > 0)[0]
        return float(t[min(pos[-1] + 1, len(t) - 1), 0]) if pos.size else 0.0

    @property
    def decay_constants(self):
        """(A, B) with V(r) <= A e^{-B r} beyond the range, or None if unknown."""
        if self.family in ("exponential", "gaussian"):
            return self.amplitude, 1 / self.range
        if self.family == "square_well":
            return self.amplitude, math.inf
        return None

    def label(self) -> str:
        if self.family == "exponential":
            return f"exp:{self.amplitude:g},{self.range:g}"
        if self.family == "gaussian":
            return f"gauss:{self.amplitude:g},{self.range:g}"
        if self.family == "square_well":
            return f"well:{self.amplitude:g},{self.range:g}"
        return "tabulated"


def sample(spec: PotentialSpec, grid: RadialGrid) -> RadialField:
    """Potential values at the grid nodes."""
    return RadialField(grid, spec(grid.r))


def integral_v(spec: PotentialSpec, grid: RadialGrid) -> float:
    """Trapezoid value of the integral of V over R^3."""
    return integrate_radial(sample(spec, grid))


def _floats(text: str, field: str) -> list:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise ValueError(f"potential: cannot parse numbers in {field!r}") from None
    return vals


def parse_potential(text: str, table_reader=None) -> PotentialSpec:
    """Parse ``exp:A[,L]``, ``gauss:A[,L]``, ``well:v0,R`` or ``file:path.csv``.

    ``A`` is the amplitude and ``L`` the range, 1 when omitted. ``table_reader``
    maps a path to a list of (r, V) rows; it defaults to the CSV reader in
    `simpleq.io`.
    """
    if ":" not in text:
        raise ValueError(f"potential: expected 'family:parameters', got {text!r}")
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        if table_reader is None:
            from .io import read_potential_csv as table_reader
        return PotentialSpec("tabulated", table=tuple(table_reader(rest)))
    names = {"exp": "exponential", "gauss": "gaussian", "well": "square_well"}
    if kind not in names:
        raise ValueError(f"potential: unknown family {kind!r}; use exp, gauss, well or file")
    vals = _floats(rest, text)
    if kind == "well" and len(vals) != 2:
        raise ValueError("potential: well needs two numbers, 'well:v0,R'")
    if len(vals) not in (1, 2):
        raise ValueError(f"potential: {kind} takes 'A' or 'A,L', got {rest!r}")
    amp = vals[0]
    rng = vals[1] if len(vals) == 2 else 1.0
    return PotentialSpec(names[kind], amp, rng)
