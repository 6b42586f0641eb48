"""CSV and JSON files for fields, curves, potentials and reference data.

Numbers are written with 17 significant digits, which round-trips doubles.
Every file is written to a temporary name in the target directory and then
renamed, so a failed run leaves no partial output.
"""
from __future__ import annotations

import csv
import json
import math
import os
import tempfile

import numpy as np

from .radial import RadialField, RadialGrid
from .transforms import SpectralField

__all__ = [
    "fmt",
    "atomic_write",
    "write_csv",
    "read_csv",
    "write_json",
    "write_field_csv",
    "read_field_csv",
    "write_spectral_csv",
    "write_curve_csv",
    "read_curve_csv",
    "read_reference_csv",
    "read_potential_csv",
    "solution_summary",
]


def fmt(x) -> str:
    return f"{float(x):.17g}"


def atomic_write(path, text: str):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, columns):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(fmt(x) for x in row))
    atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path, header) -> dict:
    """Read a numeric CSV whose header must equal ``header``.

    Raises
    ------
    ValueError
        Naming the file, line and column of the first problem.
    """
    path = os.fspath(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValueError(f"{path}: cannot read file ({exc.strerror})") from None
    if not rows:
        raise ValueError(f"{path}: empty file, expected header {','.join(header)}")
    got = [h.strip() for h in rows[0]]
    if got != list(header):
        raise ValueError(f"{path}: header {','.join(got)!r} does not match {','.join(header)!r}")
    cols = [[] for _ in header]
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for j, (name, cell) in enumerate(zip(header, row)):
            try:
                x = float(cell)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: field {name!r} is not a number: {cell!r}") from None
            if not math.isfinite(x):
                raise ValueError(f"{path}:{lineno}: field {name!r} is not finite")
            cols[j].append(x)
    return {name: np.array(c) for name, c in zip(header, cols)}


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, obj):
    atomic_write(path, json.dumps(_clean(obj), indent=2) + "\n")


def write_field_csv(path, f: RadialField):
    write_csv(path, ("r", "value"), (f.grid.r, f.values))


def read_field_csv(path) -> RadialField:
    d = read_csv(path, ("r", "value"))
    r = d["r"]
    if r.size < 3 or r[0] != 0:
        raise ValueError(f"{path}: field 'r' must start at 0 and have at least 3 nodes")
    grid = RadialGrid(r.size - 1, r[1])
    if not np.allclose(r, grid.r, rtol=1e-12, atol=0):
        raise ValueError(f"{path}: field 'r' is not a uniform grid")
    return RadialField(grid, d["value"])


def write_spectral_csv(path, fh: SpectralField):
    write_csv(path, ("k", "value"), (fh.k, fh.values))


CURVE_HEADER = ("e", "rho", "rho_lo", "rho_hi", "e_over_4pi_rho")


def write_curve_csv(path, curve):
    write_csv(path, CURVE_HEADER,
              (curve.e, curve.rho, curve.rho_lo, curve.rho_hi, curve.e_over_4pi_rho))


def read_curve_csv(path):
    from .analysis import EnergyCurve

    d = read_csv(path, CURVE_HEADER)
    if d["e"].size == 0:
        raise ValueError(f"{path}: curve has no rows")
    try:
        return EnergyCurve(d["e"], d["rho"], d["rho_lo"], d["rho_hi"])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def read_reference_csv(path) -> list:
    d = read_csv(path, ("rho", "e"))
    if np.any(d["rho"] <= 0) or np.any(d["e"] <= 0):
        raise ValueError(f"{path}: fields 'rho' and 'e' must be positive")
    return list(zip(d["rho"].tolist(), d["e"].tolist()))


def read_potential_csv(path) -> list:
    d = read_csv(path, ("r", "V"))
    if np.any(d["V"] < 0):
        raise ValueError(f"{path}: field 'V' has negative values; V must be non-negative")
    return list(zip(d["r"].tolist(), d["V"].tolist()))


def solution_summary(sol) -> dict:
    g = sol.grid
    return {
        "e": sol.e,
        "rho": sol.rho,
        "a_final": sol.a_final,
        "b_final": sol.b_final,
        "iterations": sol.iterations,
        "residual_fixed_point": sol.residual_fixed_point,
        "constraint_residual": sol.constraint_residual,
        "grid": {"n": g.n_points, "dr": g.spacing, "rmax": g.r_max},
        "converged": sol.converged,
        "certified": sol.certified,
        "stop_reason": sol.stop_reason,
        "s0": sol.s_of_k.at_zero,
    }
