"""Static SVG line plots with a base-10 logarithmic density axis.

Output depends only on the input numbers, so identical data gives
byte-identical files.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["line_plot_svg", "curve_svg", "convexity_svg", "decade_ticks"]

W, H = 640, 420
ML, MR, MT, MB = 70, 20, 40, 50


def decade_ticks(lo: float, hi: float) -> list:
    """Integer decades d with ``lo <= d < hi`` (log10 units)."""
    lo, hi = round(lo, 9), round(hi, 9)
    return list(range(math.ceil(lo), math.ceil(hi)))


def _nice_step(span: float) -> float:
    raw = span / 5 if span > 0 else 1.0
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _f(x: float) -> str:
    return f"{x:.2f}"


def line_plot_svg(rho, y, ylabel: str, title: str = "") -> str:
    """Polyline of ``y`` against ``log10(rho)`` with decade gridlines."""
    rho = np.asarray(rho, dtype=float)
    y = np.asarray(y, dtype=float)
    if rho.size < 2 or rho.size != y.size:
        raise ValueError("need at least two points with matching lengths")
    if np.any(rho <= 0):
        raise ValueError("rho must be positive for a logarithmic axis")
    x = np.log10(rho)
    x0, x1 = float(x.min()), float(x.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    y0, y1 = float(y.min()), float(y.max())
    step = _nice_step(y1 - y0)
    y0 = math.floor(y0 / step) * step
    y1 = math.ceil(y1 / step) * step
    if y1 == y0:
        y1 = y0 + step
    pw, ph = W - ML - MR, H - MT - MB
    px = lambda v: ML + (v - x0) / (x1 - x0) * pw
    py = lambda v: MT + (y1 - v) / (y1 - y0) * ph
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{W / 2:.0f}" y="22" text-anchor="middle" font-size="15">{title}</text>')
    for d in decade_ticks(x0, x1):
        X = _f(px(d))
        out.append(f'<line class="xgrid" x1="{X}" y1="{MT}" x2="{X}" y2="{MT + ph}" stroke="#cccccc"/>')
        out.append(f'<text x="{X}" y="{MT + ph + 18}" text-anchor="middle" font-size="12">1e{d}</text>')
    nt = int(round((y1 - y0) / step))
    for i in range(nt + 1):
        v = y0 + i * step
        Y = _f(py(v))
        out.append(f'<line class="ygrid" x1="{ML}" y1="{Y}" x2="{ML + pw}" y2="{Y}" stroke="#eeeeee"/>')
        out.append(f'<text x="{ML - 6}" y="{Y}" text-anchor="end" font-size="12">{v:.4g}</text>')
    out.append(f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(x, y))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
    out.append(f'<text x="{ML + pw / 2:.0f}" y="{H - 10}" text-anchor="middle" font-size="13">rho</text>')
    out.append(f'<text x="16" y="{MT + ph / 2:.0f}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 16 {MT + ph / 2:.0f})">{ylabel}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def curve_svg(curve) -> str:
    return line_plot_svg(curve.rho, curve.e_over_4pi_rho, "e / (4 pi rho)", "energy curve")


def convexity_svg(profile) -> str:
    rho, val = zip(*profile)
    return line_plot_svg(rho, val, "(1/4pi) d2(rho e)/drho2", "convexity of rho e")
