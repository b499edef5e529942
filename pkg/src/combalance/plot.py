"""Static SVG rendering of per-frame error curves.

The canvas is fixed and no timestamps or random ids are embedded, so the
output is byte-stable. The y-axis error curve is drawn in blue, the x-axis
curve in gray.
"""

from typing import NamedTuple

import numpy as np

WIDTH, HEIGHT = 640, 360
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 56, 16, 16, 40
COLOR_Y = "#1f4fbf"
COLOR_X = "#8c8c8c"


class Axes(NamedTuple):
    t_min: float
    t_max: float
    v_max: float

    @property
    def plot_width(self):
        return WIDTH - MARGIN_LEFT - MARGIN_RIGHT

    @property
    def plot_height(self):
        return HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def to_pixels(self, t, v):
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        px = MARGIN_LEFT + (t - self.t_min) / (self.t_max - self.t_min) * self.plot_width
        py = MARGIN_TOP + self.plot_height - v / self.v_max * self.plot_height
        return px, py


def axes_for(curves) -> Axes:
    t = np.asarray(curves.t, dtype=float)
    if len(t) == 0:
        return Axes(0.0, 1.0, 1.0)
    t_min, t_max = float(t.min()), float(t.max())
    if t_max == t_min:
        t_min, t_max = t_min - 0.5, t_max + 0.5
    v_max = float(max(np.max(curves.err_x), np.max(curves.err_y)))
    if not v_max > 0:
        v_max = 1.0
    return Axes(t_min, t_max, v_max)


def _num(v):
    return f"{v:.3f}"


def _path(px, py):
    pts = [f"{_num(x)},{_num(y)}" for x, y in zip(px, py)]
    if not pts:
        return ""
    return "M" + " L".join(pts)


def render_svg(curves, title="error of distance") -> str:
    ax = axes_for(curves)
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + ax.plot_height
    x1, y1 = MARGIN_LEFT + ax.plot_width, MARGIN_TOP
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="12" font-size="11" text-anchor="middle">{title}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for i in range(5):
        frac = i / 4
        tv = ax.t_min + frac * (ax.t_max - ax.t_min)
        vv = frac * ax.v_max
        px, _ = ax.to_pixels(tv, 0.0)
        _, py = ax.to_pixels(ax.t_min, vv)
        out.append(f'<text x="{_num(px)}" y="{y0 + 14}" font-size="10" text-anchor="middle">{tv:.3g}</text>')
        out.append(f'<text x="{x0 - 4}" y="{_num(py + 3)}" font-size="10" text-anchor="end">{vv:.3g}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 6}" font-size="10" text-anchor="middle">t (s)</text>')
    if len(curves.t):
        for values, color, name in ((curves.err_x, COLOR_X, "err_x"), (curves.err_y, COLOR_Y, "err_y")):
            px, py = ax.to_pixels(curves.t, values)
            out.append(f'<path id="{name}" d="{_path(px, py)}" fill="none" stroke="{color}" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def pixel_table(curves):
    """Rows ``(t, err_x, err_y, px, py_x, py_y)`` matching the rendered paths."""
    ax = axes_for(curves)
    px, py_x = ax.to_pixels(curves.t, curves.err_x)
    _, py_y = ax.to_pixels(curves.t, curves.err_y)
    return list(zip(curves.t, curves.err_x, curves.err_y, px, py_x, py_y))
