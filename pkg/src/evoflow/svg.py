"""Minimal hand-written SVG bar charts (no plotting dependency)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 40, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def histogram_svg(edges, counts, title: str = "", marker: float | None = None,
                  marker_label: str = "f_c") -> str:
    """Bars over ``edges`` with an optional dashed vertical marker line."""
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=float)
    lo, hi = float(edges[0]), float(edges[-1])
    top = float(counts.max()) if counts.size and counts.max() > 0 else 1.0
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - lo) / (hi - lo) * pw

    def sy(c):
        return MARGIN_T + ph - c / top * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="15">{escape(title)}</text>')
    for left, right, c in zip(edges[:-1], edges[1:], counts):
        x0, x1, y = sx(left), sx(right), sy(c)
        out.append(f'<rect class="bar" x="{_fmt(x0)}" y="{_fmt(y)}" width="{_fmt(max(x1 - x0 - 1, 0.5))}" '
                   f'height="{_fmt(MARGIN_T + ph - y)}" fill="#4c72b0" data-count="{int(c)}"/>')
    # axes
    base = MARGIN_T + ph
    out.append(f'<line x1="{MARGIN_L}" y1="{base}" x2="{WIDTH - MARGIN_R}" y2="{base}" stroke="black"/>')
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{base}" stroke="black"/>')
    for t in np.linspace(lo, hi, 6):
        out.append(f'<text x="{_fmt(sx(t))}" y="{base + 18}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{t:.3g}</text>')
    for frac in (0.0, 0.5, 1.0):
        out.append(f'<text x="{MARGIN_L - 6}" y="{_fmt(sy(frac * top) + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{int(round(frac * top))}</text>')
    if marker is not None and lo <= marker <= hi:
        mx = _fmt(sx(marker))
        out.append(f'<line class="marker" x1="{mx}" y1="{MARGIN_T}" x2="{mx}" y2="{base}" stroke="#c44e52" '
                   f'stroke-dasharray="6,4" stroke-width="2"/>')
        out.append(f'<text x="{mx}" y="{MARGIN_T - 4}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="12" fill="#c44e52">{escape(marker_label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
