"""Minimal static SVG line plots.

Only what the command line needs: polylines, linear axes with a few ticks
and a legend. Output depends on the data alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
REGIME_COLORS = {"nonlinear": "#1f77b4", "linear": "#d62728"}

W, H = 640, 420
ML, MR, MT, MB = 70, 150, 40, 50


@dataclass(frozen=True)
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str
    color: str
    markers: bool = False


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def _num(v: float) -> str:
    return format(v, ".6g")


def render(series: Sequence[Series], title: str, xlabel: str, ylabel: str) -> str:
    xs = [s.x[np.isfinite(s.x) & np.isfinite(s.y)] for s in series]
    ys = [s.y[np.isfinite(s.x) & np.isfinite(s.y)] for s in series]
    allx = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    if allx.size == 0:
        allx, ally = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = W - ML - MR, H - MT - MB

    def px(x):
        return ML + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MT + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{ML + pw / 2:.2f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{MT + ph}" x2="{X:.2f}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{MT + ph + 18}" text-anchor="middle">{_num(t)}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        out.append(f'<line x1="{ML - 5}" y1="{Y:.2f}" x2="{ML}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{Y + 4:.2f}" text-anchor="end">{_num(t)}</text>')
    out.append(f'<text x="{ML + pw / 2:.2f}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MT + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MT + ph / 2:.2f})">{escape(ylabel)}</text>')
    seen = []
    for s, sx, sy in zip(series, xs, ys):
        if sx.size == 0:
            continue
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(sx, sy))
        if s.markers:
            for a, b in zip(sx, sy):
                out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2.5" fill="{s.color}"/>')
        else:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" stroke-width="1.5"/>')
        if (s.label, s.color) not in seen:
            seen.append((s.label, s.color))
    for k, (label, color) in enumerate(seen):
        y = MT + 14 + 16 * k
        out.append(f'<line x1="{W - MR + 10}" y1="{y - 4}" x2="{W - MR + 30}" y2="{y - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - MR + 35}" y="{y}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save(path: Path, series: Sequence[Series], title: str, xlabel: str, ylabel: str) -> Path:
    path.write_text(render(series, title, xlabel, ylabel), encoding="utf-8")
    return path


def phase_series(sol) -> list[Series]:
    """Arcs of a solution in the ``(u, v)`` plane, colored by regime."""
    return [Series(np.asarray(a.u), np.asarray(a.v), a.regime.value, REGIME_COLORS[a.regime.value])
            for a in sol.arcs]
