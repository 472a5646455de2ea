"""Dependency-free SVG line and bar charts.

Output depends only on the inputs: coordinates are printed with fixed
precision and elements are emitted in series order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")


@dataclass(frozen=True)
class Series:
    label: str
    x: tuple
    y: tuple

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError(f"series {self.label!r}: x and y lengths differ")
        if len(self.x) == 0:
            raise ValueError(f"series {self.label!r} is empty")


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 10))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:g}"


def _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi, xticks=True):
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - xlo) / (xhi - xlo) * pw

    def sy(y):
        return TOP + ph - (y - ylo) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for t in _nice_ticks(xlo, xhi) if xticks else ():
        if xlo <= t <= xhi:
            x = sx(t)
            out.append(f'<line x1="{_fmt(x)}" y1="{TOP + ph}" x2="{_fmt(x)}" y2="{TOP + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(x)}" y="{TOP + ph + 18}" text-anchor="middle">{_label(t)}</text>')
    for t in _nice_ticks(ylo, yhi):
        if ylo <= t <= yhi:
            y = sy(t)
            out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end">{_label(t)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    return out, sx, sy


def _legend(labels) -> list[str]:
    out = []
    x0 = WIDTH - RIGHT + 15
    for i, label in enumerate(labels):
        y = TOP + 10 + 20 * i
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{x0}" y="{y - 9}" width="18" height="10" fill="{color}" class="legend"/>')
        out.append(f'<text x="{x0 + 24}" y="{y}">{escape(label)}</text>')
    return out


def _bounds(values, pad_zero: bool = False):
    values = [v for v in values if math.isfinite(v)] or [0.0]
    lo, hi = min(values), max(values)
    if pad_zero:
        lo = min(lo, 0.0)
    if hi == lo:
        hi = lo + (abs(lo) if lo else 1.0)
    return lo, hi


def line_svg(series, title: str, xlabel: str, ylabel: str) -> str:
    series = list(series)
    if not series:
        raise ValueError("no series to plot")
    xs = [float(v) for s in series for v in s.x]
    ys = [float(v) for s in series for v in s.y]
    xlo, xhi = _bounds(xs)
    ylo, yhi = _bounds(ys, pad_zero=True)
    out, sx, sy = _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi)
    for i, s in enumerate(series):
        # undefined values (runs that never finished) leave gaps
        kept = [(float(x), float(y)) for x, y in zip(s.x, s.y) if math.isfinite(float(y))]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in kept)
        if len(s.x) == 1 and kept:
            # a lone point still spans the axis so it stays visible
            y = _fmt(sy(float(s.y[0])))
            pts = f"{_fmt(sx(xlo))},{y} {_fmt(sx(xhi))},{y}"
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
    out += _legend(s.label for s in series)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_svg(groups, labels, values, title: str, xlabel: str, ylabel: str) -> str:
    """Grouped bars: ``values[j][i]`` is series ``labels[j]`` at ``groups[i]``."""
    if not groups or not labels:
        raise ValueError("no series to plot")
    if any(len(row) != len(groups) for row in values) or len(values) != len(labels):
        raise ValueError("values must be one row per label with one entry per group")
    flat = [float(v) for row in values for v in row]
    ylo, yhi = _bounds(flat, pad_zero=True)
    out, sx, sy = _frame(title, xlabel, ylabel, 0.0, float(len(groups)), ylo, yhi, xticks=False)
    slot = (sx(1.0) - sx(0.0)) / (len(labels) + 1)
    for i, g in enumerate(groups):
        cx = sx(i + 0.5)
        out.append(f'<text x="{_fmt(cx)}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle">{escape(str(g))}</text>')
        for j in range(len(labels)):
            v = float(values[j][i])
            if not math.isfinite(v):
                continue
            x = sx(float(i)) + slot * (j + 0.5)
            top, base = sy(max(v, 0.0)), sy(min(v, 0.0))
            color = PALETTE[j % len(PALETTE)]
            out.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(top)}" width="{_fmt(slot)}" height="{_fmt(base - top)}" fill="{color}"/>'
            )
    out += _legend(labels)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series, path, title: str = "", xlabel: str = "round", ylabel: str = "") -> Path:
    """Write a line chart of ``series`` to ``path``."""
    path = Path(path)
    path.write_text(line_svg(series, title, xlabel, ylabel))
    return path
