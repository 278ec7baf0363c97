"""Minimal deterministic SVG line charts (axes, series, legend)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"]

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 55


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    style: str = "line"  # line | dashed | markers
    yerr: np.ndarray | None = None
    color: str | None = None
    width: float = 1.5
    opacity: float = 1.0
    in_legend: bool = True


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def _fmt(v):
    return f"{v:.2f}"


def line_chart(series, title="", xlabel="", ylabel="", logx=False, ylim=None) -> str:
    xs = [np.asarray(s.x, dtype=float) for s in series if len(s.x)]
    ys = [np.asarray(s.y, dtype=float) for s in series if len(s.y)]
    allx = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    allx = allx[np.isfinite(allx)]
    ally = ally[np.isfinite(ally)]
    if logx:
        allx = allx[allx > 0]
    tx = np.log10 if logx else (lambda v: np.asarray(v, dtype=float))
    x0, x1 = (float(tx(allx.min())), float(tx(allx.max()))) if allx.size else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if ylim is None:
        y0, y1 = (float(ally.min()), float(ally.max())) if ally.size else (0.0, 1.0)
        pad = 0.05 * (y1 - y0 or 1.0)
        y0, y1 = y0 - pad, y1 + pad
    else:
        y0, y1 = ylim
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(v):
        return LEFT + (float(tx(v)) - x0) / (x1 - x0) * pw

    def py(v):
        return TOP + (1.0 - (float(v) - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if logx:
        xt = [10 ** k for k in range(math.floor(x0), math.ceil(x1) + 1)]
        xt += [m * 10 ** k for k in range(math.floor(x0), math.ceil(x1) + 1) for m in (2, 5)]
        xt = sorted(v for v in xt if x0 - 1e-9 <= math.log10(v) <= x1 + 1e-9)
    else:
        xt = _ticks(x0, x1)
    for v in xt:
        X = px(v)
        out.append(f'<line x1="{_fmt(X)}" y1="{TOP + ph}" x2="{_fmt(X)}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{TOP + ph + 18}" text-anchor="middle">{v:g}</text>')
    for v in _ticks(y0, y1):
        Y = py(v)
        out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(Y)}" x2="{LEFT}" y2="{_fmt(Y)}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{v:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    out.append(f'<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath>')
    out.append('<g clip-path="url(#plot)">')
    legend = []
    for k, s in enumerate(series):
        color = s.color or PALETTE[k % len(PALETTE)]
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y) & ((x > 0) if logx else True)
        pts = [(px(a), py(b)) for a, b in zip(x[ok], y[ok])]
        if s.style in ("line", "dashed") and len(pts) > 1:
            dash = ' stroke-dasharray="6,4"' if s.style == "dashed" else ""
            d = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
            out.append(
                f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="{s.width}" '
                f'stroke-opacity="{s.opacity}"{dash}/>'
            )
        if s.style == "markers" or len(pts) == 1:
            for a, b in pts:
                out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="3" fill="{color}"/>')
        if s.yerr is not None:
            e = np.asarray(s.yerr, dtype=float)[ok]
            for xv, yv, ev in zip(x[ok], y[ok], e):
                X = px(xv)
                out.append(
                    f'<line x1="{_fmt(X)}" y1="{_fmt(py(yv - ev))}" x2="{_fmt(X)}" '
                    f'y2="{_fmt(py(yv + ev))}" stroke="{color}"/>'
                )
        if s.in_legend:
            legend.append((s.label, color, s.style))
    out.append("</g>")
    lx = W - RIGHT + 12
    for k, (label, color, style) in enumerate(legend):
        ly = TOP + 12 + 16 * k
        dash = ' stroke-dasharray="6,4"' if style == "dashed" else ""
        if style == "markers":
            out.append(f'<circle cx="{lx + 10}" cy="{ly - 4}" r="3" fill="{color}"/>')
        else:
            out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}"{dash}/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(path, svg: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(svg)
