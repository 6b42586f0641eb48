"""Command-line front end.

Subcommands: solve, curve, scattering, decay, convexity, asymptotics, compare.
Exit status is 0 on success, 1 if a solve did not converge, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import analysis as an
from . import io
from .operators import solve_scattering
from .plotting import convexity_svg, curve_svg
from .potentials import parse_potential, sample
from .radial import RadialGrid
from .solver import SolveParams, grid_for, solve

__all__ = ["RunConfig", "run", "main", "build_parser"]

COMMANDS = ("solve", "curve", "scattering", "decay", "convexity", "asymptotics", "compare")


@dataclass
class RunConfig:
    command: str
    potential: str = "exp:1.0"
    e: float | None = None
    e_min: float | None = None
    e_max: float | None = None
    points: int | None = None
    grid_n: int | None = None
    grid_rmax: float | None = None
    tol: float = 1e-10
    max_iter: int = 100_000
    out: str = "."
    svg: bool = False
    curve: str | None = None
    reference: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"command: must be one of {', '.join(COMMANDS)}")
        if self.e is not None and not (math.isfinite(self.e) and self.e > 0):
            raise ValueError("--e: must be a positive number")
        if self.grid_n is not None and self.grid_n < 2:
            raise ValueError("--grid-n: must be at least 2")
        if self.grid_rmax is not None and not self.grid_rmax > 0:
            raise ValueError("--grid-rmax: must be positive")
        if not 0 < self.tol < 1:
            raise ValueError("--tol: must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("--max-iter: must be at least 1")

    def e_values(self) -> np.ndarray:
        if None in (self.e_min, self.e_max, self.points):
            raise ValueError("--e-min/--e-max/--points: all three are required")
        if not (self.e_min > 0 and self.e_max > self.e_min):
            raise ValueError("--e-min/--e-max: need 0 < e-min < e-max")
        if self.points < 2:
            raise ValueError("--points: must be at least 2")
        return np.logspace(math.log10(self.e_min), math.log10(self.e_max), self.points)


def _grid(cfg: RunConfig, spec, e: float, box_factor: float = 30.0):
    if cfg.grid_n is None and cfg.grid_rmax is None:
        return grid_for(spec, e, box_factor)
    dr = spec.scale / 8
    if cfg.grid_rmax is None:
        return RadialGrid(cfg.grid_n, dr)
    n = cfg.grid_n if cfg.grid_n is not None else math.ceil(cfg.grid_rmax / dr)
    return RadialGrid.from_rmax(cfg.grid_rmax, n)


def _fixed_grid(cfg: RunConfig, spec):
    if cfg.grid_n is None and cfg.grid_rmax is None:
        return None
    return _grid(cfg, spec, 1.0)


def _path(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.out, name)


def _curve(cfg: RunConfig, spec):
    return an.trace_curve(spec, cfg.e_values(), bracket_tol=cfg.tol, max_iter=cfg.max_iter,
                          grid=_fixed_grid(cfg, spec))


def _cmd_solve(cfg, spec):
    if cfg.e is None:
        raise ValueError("--e: required for solve")
    V = sample(spec, _grid(cfg, spec, cfg.e))
    sol = solve(V, SolveParams(cfg.e, bracket_tol=cfg.tol, max_iter=cfg.max_iter))
    io.write_json(_path(cfg, "solution.json"), io.solution_summary(sol))
    io.write_field_csv(_path(cfg, "u.csv"), sol.u)
    io.write_spectral_csv(_path(cfg, "s_of_k.csv"), sol.s_of_k)
    print(f"e={sol.e:.6g} rho={sol.rho:.12g} iterations={sol.iterations} stop={sol.stop_reason}")
    return 0 if sol.converged else 1


def _cmd_curve(cfg, spec):
    curve = _curve(cfg, spec)
    io.write_curve_csv(_path(cfg, "curve.csv"), curve)
    if cfg.svg:
        io.atomic_write(_path(cfg, "curve.svg"), curve_svg(curve))
    bad = curve.monotone_violations()
    print(f"{len(curve)} rows, a={curve.a:.8g}, rho monotone: {'yes' if not bad else bad}")
    return 0 if curve.converged.all() else 1


def _cmd_scattering(cfg, spec):
    grid = _fixed_grid(cfg, spec) or grid_for(spec, 1.0)
    res = solve_scattering(sample(spec, grid))
    io.write_json(_path(cfg, "scattering.json"), {
        "a": res.a, "a_boundary": res.a_boundary, "a_integral": res.a_integral,
        "agreement": res.agreement,
        "grid": {"n": grid.n_points, "dr": grid.spacing, "rmax": grid.r_max},
    })
    io.write_field_csv(_path(cfg, "phi.csv"), res.phi)
    print(f"a={res.a:.12g} a_boundary={res.a_boundary:.12g}")
    if res.agreement > 0.01:
        print("warning: boundary and integral estimates of a differ by more than 1%", file=sys.stderr)
    return 0


def _cmd_decay(cfg, spec):
    if cfg.e is None:
        raise ValueError("--e: required for decay")
    V = sample(spec, _grid(cfg, spec, cfg.e, box_factor=160.0))
    sol = solve(V, SolveParams(cfg.e, bracket_tol=cfg.tol, max_iter=cfg.max_iter))
    rep = an.decay_fit(sol)
    d = rep.to_dict()
    d.update(e=sol.e, rho=sol.rho, beta_small_k=an.beta_small_k(sol))
    io.write_json(_path(cfg, "decay.json"), d)
    print(f"p={rep.p:.4f} alpha_hat={rep.alpha_hat:.6g} alpha_pred={rep.alpha_pred:.6g} "
          f"rel_dev={rep.rel_dev:.3g}")
    return 0 if sol.converged else 1


def _load_or_trace(cfg, spec):
    if cfg.curve is not None:
        return io.read_curve_csv(cfg.curve)
    return _curve(cfg, spec)


def _cmd_convexity(cfg, spec):
    curve = _load_or_trace(cfg, spec)
    prof = an.convexity_profile(curve)
    rho, val = zip(*prof)
    io.write_csv(_path(cfg, "convexity.csv"), ("rho", "second_diff"), (rho, val))
    if cfg.svg:
        io.atomic_write(_path(cfg, "convexity.svg"), convexity_svg(prof))
    print(f"min={min(val):.6g} low-density end={val[0]:.6g} high-density end={val[-1]:.6g}")
    return 0 if curve.converged.all() else 1


def _cmd_asymptotics(cfg, spec):
    curve = _load_or_trace(cfg, spec)
    grid = grid_for(spec, 1.0)
    a = curve.a if curve.a is not None else solve_scattering(sample(spec, grid)).a
    intv = curve.intv if curve.intv is not None else float(np.dot(grid.weights(), spec(grid.r)))
    lhy = an.lhy_check(curve, a=a)
    hd = an.high_density_check(curve, intv=intv)
    io.write_json(_path(cfg, "asymptotics.json"), {
        "a": a, "intv": intv, "lhy_constant": an.LHY_CONSTANT,
        "lhy": [{"rho": r, "c_hat": c} for r, c in lhy],
        "high_density": [{"rho": r, "ratio": q} for r, q in hd],
    })
    if lhy:
        print(f"c_hat at smallest rho: {lhy[0][1]:.6g} (limit {an.LHY_CONSTANT:.6g})")
    print(f"ratio at largest rho: {hd[-1][1]:.6g}")
    return 0 if curve.converged.all() else 1


def _cmd_compare(cfg, spec):
    if cfg.curve is None or cfg.reference is None:
        raise ValueError("--curve/--reference: both are required for compare")
    curve = io.read_curve_csv(cfg.curve)
    ref = io.read_reference_csv(cfg.reference)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dev = an.compare_reference(curve, ref)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    io.write_json(_path(cfg, "compare.json"), {"max_relative_deviation": dev})
    print(f"max relative deviation: {dev:.6g}")
    return 0


_DISPATCH = {
    "solve": _cmd_solve, "curve": _cmd_curve, "scattering": _cmd_scattering,
    "decay": _cmd_decay, "convexity": _cmd_convexity, "asymptotics": _cmd_asymptotics,
    "compare": _cmd_compare,
}


def run(cfg: RunConfig) -> int:
    """Execute one command. Returns the exit status."""
    try:
        cfg.validate()
        spec = parse_potential(cfg.potential)
        return _DISPATCH[cfg.command](cfg, spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simpleq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--potential", default="exp:1.0",
                       help="exp:A[,L] | gauss:A[,L] | well:v0,R | file:path.csv")
        s.add_argument("--e", type=float)
        s.add_argument("--e-min", type=float)
        s.add_argument("--e-max", type=float)
        s.add_argument("--points", type=int)
        s.add_argument("--grid-n", type=int)
        s.add_argument("--grid-rmax", type=float)
        s.add_argument("--tol", type=float, default=1e-10)
        s.add_argument("--max-iter", type=int, default=100_000)
        s.add_argument("--out", default=".")
        s.add_argument("--svg", action="store_true")
        s.add_argument("--curve")
        s.add_argument("--reference")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
