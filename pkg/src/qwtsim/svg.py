"""Minimal SVG plots: line/scatter series on linear or log axes, and heatmaps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Series", "plot", "heatmap"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    style: str = "line"  # "line" | "points"
    dashed: bool = False


@dataclass
class _Axis:
    lo: float
    hi: float
    log: bool
    ticks: list = field(default_factory=list)

    def t(self, v):
        if self.log:
            return (math.log10(v) - math.log10(self.lo)) / (math.log10(self.hi) - math.log10(self.lo))
        return (v - self.lo) / (self.hi - self.lo)


def _axis(values, log):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if log:
        v = v[v > 0]
    if len(v) == 0:
        return _Axis(1.0, 10.0, log)
    lo, hi = float(v.min()), float(v.max())
    if log:
        lo, hi = 10 ** math.floor(math.log10(lo)), 10 ** math.ceil(math.log10(hi))
        if lo == hi:
            hi = lo * 10
        ticks = [10.0**e for e in range(int(round(math.log10(lo))), int(round(math.log10(hi))) + 1)]
    else:
        if lo == hi:
            lo, hi = lo - 1, hi + 1
        pad = 0.05 * (hi - lo)
        lo, hi = lo - pad, hi + pad
        ticks = list(np.linspace(lo, hi, 5))
    return _Axis(lo, hi, log, ticks)


def _fmt(v, log):
    if log:
        return f"1e{int(round(math.log10(v)))}"
    return f"{v:.3g}"


def plot(series, path=None, title="", xlabel="", ylabel="", logx=False, logy=False,
         ref_slopes=(), width=560, height=420) -> str:
    """Render ``series``; ``ref_slopes`` are ``(slope, x0, y0, label)`` power-law guide lines."""
    series = list(series)
    xs = np.concatenate([np.asarray(s.x, float) for s in series]) if series else np.array([1.0])
    ys = np.concatenate([np.asarray(s.y, float) for s in series]) if series else np.array([1.0])
    ax, ay = _axis(xs, logx), _axis(ys, logy)
    ml, mr, mt, mb = 70, 20, 35, 50
    pw, ph = width - ml - mr, height - mt - mb

    def px(v):
        return ml + pw * ax.t(v)

    def py(v):
        return mt + ph * (1 - ay.t(v))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="13">{title}</text>',
           f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
           f'<text x="15" y="{mt + ph / 2}" text-anchor="middle" '
           f'transform="rotate(-90 15 {mt + ph / 2})">{ylabel}</text>']
    for v in ax.ticks:
        x = px(v)
        out.append(f'<line x1="{x:.1f}" y1="{mt + ph}" x2="{x:.1f}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{mt + ph + 16}" text-anchor="middle">{_fmt(v, logx)}</text>')
    for v in ay.ticks:
        y = py(v)
        out.append(f'<line x1="{ml - 4}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{y + 4:.1f}" text-anchor="end">{_fmt(v, logy)}</text>')
    out.append(f'<clipPath id="c"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath>')
    out.append('<g clip-path="url(#c)">')
    for i, s in enumerate(series):
        col = _COLORS[i % len(_COLORS)]
        x, y = np.asarray(s.x, float), np.asarray(s.y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        pts = [(px(a), py(b)) for a, b in zip(x[ok], y[ok])]
        if s.style == "points":
            out.extend(f'<circle cx="{a:.1f}" cy="{b:.1f}" r="3" fill="{col}"/>' for a, b in pts)
        elif pts:
            dash = ' stroke-dasharray="5,3"' if s.dashed else ""
            d = " ".join(f"{a:.1f},{b:.1f}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{col}" stroke-width="1.2"{dash}/>')
    for slope, x0, y0, _ in ref_slopes:
        x1, x2 = ax.lo, ax.hi
        f = (lambda xv: y0 * (xv / x0) ** slope) if logx else (lambda xv: y0 + slope * (xv - x0))
        out.append(f'<line x1="{px(x1):.1f}" y1="{py(f(x1)):.1f}" x2="{px(x2):.1f}" y2="{py(f(x2)):.1f}" '
                   'stroke="gray" stroke-dasharray="2,3"/>')
    out.append("</g>")
    labels = [(s.label, _COLORS[i % len(_COLORS)]) for i, s in enumerate(series) if s.label]
    labels += [(r[3], "gray") for r in ref_slopes if r[3]]
    for i, (lab, col) in enumerate(labels):
        y = mt + 14 + 14 * i
        out.append(f'<text x="{ml + pw - 6}" y="{y}" text-anchor="end" fill="{col}">{lab}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def heatmap(z, path=None, title="", size=400) -> str:
    """Grey-scale density plot of a 2-D array (row 0 at the top)."""
    z = np.asarray(z, dtype=float)
    ny, nx = z.shape
    zmax = z.max() if z.max() > 0 else 1.0
    cw, ch = size / nx, size / ny
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 20}" height="{size + 40}" '
           'font-family="sans-serif" font-size="12">',
           f'<text x="{size / 2 + 10}" y="18" text-anchor="middle">{title}</text>']
    for i in range(ny):
        for j in range(nx):
            v = z[i, j] / zmax
            if v <= 0:
                continue
            g = int(round(255 * (1 - v)))
            out.append(f'<rect x="{10 + j * cw:.2f}" y="{30 + i * ch:.2f}" width="{cw:.2f}" '
                       f'height="{ch:.2f}" fill="rgb({g},{g},{g})"/>')
    out.append(f'<rect x="10" y="30" width="{size}" height="{size}" fill="none" stroke="black"/>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
