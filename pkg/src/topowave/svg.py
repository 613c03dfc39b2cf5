"""Minimal deterministic SVG line plots (no plotting library; output is diffable text)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PALETTE = ("#d4a017", "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#17becf")


@dataclass
class Series:
    xs: list
    ys: list
    color: str = "#000000"
    width: float = 1.5
    label: str = ""
    markers: bool = False


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)
    fill: list | None = None  # polygon (xs, ys) shaded below the series, e.g. the continuum
    width: int = 480
    height: int = 360

    def add(self, xs, ys, **kw) -> "Figure":
        self.series.append(Series(list(map(float, xs)), list(map(float, ys)), **kw))
        return self


MAX_POINTS = 2000


def _thin(pts):
    """Keep at most MAX_POINTS evenly strided points, always including the last."""
    if len(pts) <= MAX_POINTS:
        return pts
    stride = math.ceil(len(pts) / MAX_POINTS)
    return pts[::stride] + ([pts[-1]] if (len(pts) - 1) % stride else [])


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5):
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10 ** math.floor(math.log10(span / n))
    for m in (1, 2, 5, 10):
        if span / (m * step) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _bounds(fig: Figure):
    xs = [x for s in fig.series for x in s.xs if math.isfinite(x)]
    ys = [y for s in fig.series for y in s.ys if math.isfinite(y)]
    if fig.fill:
        xs += list(fig.fill[0])
        ys += list(fig.fill[1])
    if not xs:
        return 0.0, 1.0, 0.0, 1.0
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    return x0, x1, y0 - pad, y1 + pad


def render(fig: Figure) -> str:
    """Render to an SVG string. Identical input gives identical bytes."""
    W, H, ml, mr, mt, mb = fig.width, fig.height, 56, 16, 28, 44
    x0, x1, y0, y1 = _bounds(fig)
    px = lambda x: ml + (x - x0) / (x1 - x0) * (W - ml - mr)
    py = lambda y: H - mb - (y - y0) / (y1 - y0) * (H - mt - mb)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>',
        f'<text x="{W / 2:.1f}" y="18" text-anchor="middle" font-size="13" font-family="sans-serif">{fig.title}</text>',
    ]
    if fig.fill:
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(*fig.fill))
        out.append(f'<polygon points="{pts}" fill="#cccccc" stroke="none"/>')
    out.append(
        f'<rect x="{ml}" y="{mt}" width="{W - ml - mr}" height="{H - mt - mb}" fill="none" stroke="#000000"/>'
    )
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{H - mb}" x2="{px(t):.2f}" y2="{H - mb + 4}" stroke="#000000"/>')
        out.append(
            f'<text x="{px(t):.2f}" y="{H - mb + 16}" text-anchor="middle" font-size="10" font-family="sans-serif">{_fmt(t)}</text>'
        )
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 4}" y1="{py(t):.2f}" x2="{ml}" y2="{py(t):.2f}" stroke="#000000"/>')
        out.append(
            f'<text x="{ml - 6}" y="{py(t) + 3:.2f}" text-anchor="end" font-size="10" font-family="sans-serif">{_fmt(t)}</text>'
        )
    out.append(
        f'<text x="{W / 2:.1f}" y="{H - 8}" text-anchor="middle" font-size="11" font-family="sans-serif">{fig.xlabel}</text>'
    )
    out.append(
        f'<text x="14" y="{H / 2:.1f}" text-anchor="middle" font-size="11" font-family="sans-serif" '
        f'transform="rotate(-90 14 {H / 2:.1f})">{fig.ylabel}</text>'
    )
    for s in fig.series:
        pts = [(px(x), py(y)) for x, y in zip(s.xs, s.ys) if math.isfinite(x) and math.isfinite(y)]
        if not pts:
            continue
        pts = _thin(pts)
        if s.markers:
            out += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{s.color}"/>' for x, y in pts]
        else:
            d = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{s.color}" stroke-width="{s.width}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
