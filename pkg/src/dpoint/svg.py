"""Small, deterministic SVG writers for result plots and replay frames."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _f(v: float) -> str:
    return f"{v:.3f}"


def line_plot(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 480,
    height: int = 320,
    ylim: Optional[tuple[float, float]] = None,
) -> str:
    """Polyline chart with one series per entry of ``series`` (name -> (xs, ys))."""
    left, right, top, bottom = 60, 20, 30, 50
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys]
    x0, x1 = (min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0)
    y0, y1 = ylim if ylim else ((min(ys_all), max(ys_all)) if ys_all else (0.0, 1.0))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - left - right, height - top - bottom

    def px(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for k in range(5):
        yv = y0 + (y1 - y0) * k / 4
        out.append(
            f'<text x="{left - 6}" y="{_f(py(yv) + 4)}" text-anchor="end">{yv:.3g}</text>'
        )
    for xv in sorted(set(xs_all)):
        out.append(
            f'<text x="{_f(px(xv))}" y="{top + ph + 16}" text-anchor="middle">{xv:g}</text>'
        )
    out.append(
        f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + ph / 2})">{escape(ylabel)}</text>'
    )
    for i, (name, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_f(px(x))},{_f(py(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{_f(px(x))}" cy="{_f(py(y))}" r="3" fill="{color}"/>')
        ly = top + 14 * (i + 1)
        out.append(f'<rect x="{left + pw - 90}" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{left + pw - 76}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def arena_frame(
    size: float,
    path: Sequence[tuple[float, float]],
    obstacles: Sequence[tuple[float, float]] = (),
    target: Optional[tuple[float, float]] = None,
    r_ns: float = 0.0,
    r_body: float = 1.0,
    label: str = "",
    scale: float = 5.0,
) -> str:
    """Top-down view of the arena; world y grows upwards."""
    w = h = size * scale

    def sx(x: float) -> str:
        return _f(x * scale)

    def sy(y: float) -> str:
        return _f((size - y) * scale)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(w)}" height="{_f(h)}" '
        f'viewBox="0 0 {_f(w)} {_f(h)}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_f(w)}" height="{_f(h)}" fill="white" stroke="black"/>',
    ]
    for ox, oy in obstacles:
        if r_ns > 0:
            out.append(
                f'<circle cx="{sx(ox)}" cy="{sy(oy)}" r="{_f(r_ns * scale)}" '
                f'fill="#fdd" stroke="#e88" stroke-dasharray="4 3"/>'
            )
        out.append(f'<circle cx="{sx(ox)}" cy="{sy(oy)}" r="{_f(r_body * scale)}" fill="#555"/>')
    if target is not None:
        tx, ty = target
        d = 1.5 * scale
        out.append(
            f'<path d="M {_f(tx * scale - d)} {_f((size - ty) * scale - d)} l {_f(2 * d)} {_f(2 * d)} '
            f'M {_f(tx * scale - d)} {_f((size - ty) * scale + d)} l {_f(2 * d)} {_f(-2 * d)}" '
            f'stroke="#2ca02c" stroke-width="3"/>'
        )
    if path:
        pts = " ".join(f"{sx(x)},{sy(y)}" for x, y in path)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
        ax, ay = path[-1]
        out.append(f'<circle cx="{sx(ax)}" cy="{sy(ay)}" r="{_f(0.8 * scale)}" fill="#1f77b4"/>')
    if label:
        out.append(f'<text x="8" y="18">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
