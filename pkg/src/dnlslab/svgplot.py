"""Minimal standalone SVG line/scatter charts.

No plotting library behind this: charts are emitted as self-contained
SVG markup so batch runs have zero rendering dependencies and outputs
are byte-stable for fixed inputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

__all__ = ["PlotSpec", "Series", "render_svg", "plot_csv"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 72, 24, 34, 56
_COLORS = ["#1f6fb2", "#d1495b", "#3e885b", "#8a5fbf", "#c77b2e", "#4a4a4a"]


@dataclass
class Series:
    x: list
    y: list
    label: str
    kind: str = "line"  # "line" or "scatter"


@dataclass
class PlotSpec:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    x_column: str = ""
    y_columns: list = field(default_factory=list)
    kind: str = "line"


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.2e}"
    return f"{v:.4g}"


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo == hi:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 2.5 * mag, 5 * mag, 10 * mag) if s >= raw)
    t0 = math.ceil(lo / step) * step
    out = []
    t = t0
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def render_svg(series: list[Series], spec: PlotSpec) -> str:
    """Render data series to an SVG string; empty data gives empty axes."""
    xs = [v for s in series for v in s.x if math.isfinite(v)]
    ys = [v for s in series for v in s.y if math.isfinite(v)]
    if xs and ys:
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x0 == x1:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y0 == y1:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.04 * (y1 - y0)
        y0, y1 = y0 - pad, y1 + pad
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def px(x):
        return _ML + pw * (x - x0) / (x1 - x0)

    def py(y):
        return _MT + ph * (1.0 - (y - y0) / (y1 - y0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        'stroke="#333" stroke-width="1"/>',
    ]
    if spec.title:
        parts.append(
            f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" font-size="14">'
            f"{_esc(spec.title)}</text>"
        )
    for t in _ticks(x0, x1):
        X = px(t)
        parts.append(f'<line x1="{X:.1f}" y1="{_MT + ph}" x2="{X:.1f}" y2="{_MT + ph + 5}" stroke="#333"/>')
        parts.append(
            f'<text x="{X:.1f}" y="{_MT + ph + 18}" text-anchor="middle" font-size="11">{_fmt(t)}</text>'
        )
    for t in _ticks(y0, y1):
        Y = py(t)
        parts.append(f'<line x1="{_ML - 5}" y1="{Y:.1f}" x2="{_ML}" y2="{Y:.1f}" stroke="#333"/>')
        parts.append(
            f'<text x="{_ML - 8}" y="{Y + 4:.1f}" text-anchor="end" font-size="11">{_fmt(t)}</text>'
        )
    if spec.xlabel:
        parts.append(
            f'<text x="{_ML + pw / 2:.0f}" y="{_H - 14}" text-anchor="middle" font-size="12">'
            f"{_esc(spec.xlabel)}</text>"
        )
    if spec.ylabel:
        yx, yy = 18, _MT + ph / 2
        parts.append(
            f'<text x="{yx}" y="{yy:.0f}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 {yx} {yy:.0f})">{_esc(spec.ylabel)}</text>'
        )
    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(s.x, s.y) if math.isfinite(x) and math.isfinite(y)]
        if not pts:
            continue
        if s.kind == "scatter":
            for X, Y in pts:
                parts.append(f'<circle cx="{X:.1f}" cy="{Y:.1f}" r="2.6" fill="{color}"/>')
        else:
            path = " ".join(f"{X:.1f},{Y:.1f}" for X, Y in pts)
            parts.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.6"/>'
            )
        ly = _MT + 14 + 15 * i
        parts.append(f'<line x1="{_ML + pw - 130}" y1="{ly - 4}" x2="{_ML + pw - 110}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_ML + pw - 104}" y="{ly}" font-size="11">{_esc(s.label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def plot_csv(csv_path, spec: PlotSpec, out_path) -> bool:
    """Chart named columns of a CSV file. Returns False (with empty axes
    written) when the file has no data rows; missing columns raise."""
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    series = []
    empty = len(rows) == 0
    if not empty:
        header = rows[0].keys()
        missing = [c for c in [spec.x_column, *spec.y_columns] if c not in header]
        if missing:
            raise ValueError(f"CSV is missing plot columns: {missing}")
        xs = [float(r[spec.x_column]) for r in rows]
        for yc in spec.y_columns:
            ys = [float(r[yc]) for r in rows]
            series.append(Series(x=xs, y=ys, label=yc, kind=spec.kind))
    svg = render_svg(series, spec)
    with open(out_path, "w") as fh:
        fh.write(svg)
    return not empty
