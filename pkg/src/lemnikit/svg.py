"""Static SVG 1.1 figures of lemniscates.

Coordinates are written in the mathematical frame and flipped by one group
transform, so polyline points are the very floats that go into the JSON
reports (printed with ``repr``, which round-trips exactly).
"""
from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

import numpy as np

WIDTH_PX = 640
MARGIN = 0.5


def _f(x: float) -> str:
    return repr(float(x))


def heat_color(x: float) -> str:
    """Blue (0) through green to red (1); values are clipped to [0, 1]."""
    x = min(1.0, max(0.0, float(x)))
    if x < 0.5:
        r, g, b = 0.0, 2 * x, 1 - 2 * x
    else:
        r, g, b = 2 * x - 1, 2 - 2 * x, 0.0
    return "#%02x%02x%02x" % (round(255 * r), round(255 * g), round(255 * b))


class Figure:
    """Shapes in math coordinates. The viewport is the bounding box of the
    zeros and everything drawn, padded by half its size on every side."""

    def __init__(self, roots, title: str = ""):
        self.title = title
        self._items = []
        self._extent = np.atleast_1d(np.asarray(roots, dtype=complex)).tolist()

    def polyline(self, points, stroke="#000000", closed=True, label=None):
        pts = np.asarray(points, dtype=complex).tolist()
        self._extent.extend(pts)
        self._items.append(("polyline", pts + pts[:1] if closed else pts, stroke, label))

    def dot(self, z, color="#000000", size=3.0, cls="zero"):
        self._items.append(("dot", complex(z), color, size, cls))

    def cross(self, z, color="#cc0000", size=4.0):
        self._items.append(("cross", complex(z), color, size))

    def heat(self, zs, values, vmax):
        for z, v in zip(np.asarray(zs, dtype=complex).tolist(), np.asarray(values, dtype=float).tolist()):
            self.dot(z, heat_color(v / vmax), size=1.5, cls="sample")

    def _box(self):
        pts = np.array(self._extent, dtype=complex)
        lo = complex(pts.real.min(), pts.imag.min())
        hi = complex(pts.real.max(), pts.imag.max())
        span = max(hi.real - lo.real, hi.imag - lo.imag)
        if span == 0:
            span = max(1.0, abs(lo))
        pad = MARGIN * span
        return lo.real - pad, hi.real + pad, lo.imag - pad, hi.imag + pad

    def _draw(self, item, unit):
        sw = _f(1.2 * unit)
        if item[0] == "polyline":
            _, pts, stroke, label = item
            coords = " ".join(f"{_f(z.real)},{_f(z.imag)}" for z in pts)
            attr = f" data-level={quoteattr(str(label))}" if label is not None else ""
            return f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{sw}"{attr}/>'
        if item[0] == "dot":
            _, z, color, size, cls = item
            return (f'<circle class="{cls}" cx="{_f(z.real)}" cy="{_f(z.imag)}" '
                    f'r="{_f(size * unit)}" fill="{color}"/>')
        _, z, color, size = item
        d, e = size * unit, 2 * size * unit
        return (f'<path class="critical" d="M {_f(z.real - d)} {_f(z.imag - d)} l {_f(e)} {_f(e)} '
                f'm 0 {_f(-e)} l {_f(-e)} {_f(e)}" stroke="{color}" stroke-width="{sw}" fill="none"/>')

    def render(self) -> str:
        x0, x1, y0, y1 = self._box()
        w, h = x1 - x0, y1 - y0
        px_h = max(1, round(WIDTH_PX * h / w))
        s = WIDTH_PX / w
        lines = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
            '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH_PX}" height="{px_h}" '
            f'viewBox="0 0 {WIDTH_PX} {px_h}">',
        ]
        if self.title:
            lines.append(f"<title>{escape(self.title)}</title>")
        lines.append(f'<rect x="0" y="0" width="{WIDTH_PX}" height="{px_h}" fill="#ffffff"/>')
        # y flipped: math y grows upward
        lines.append(f'<g transform="matrix({_f(s)} 0 0 {_f(-s)} {_f(-x0 * s)} {_f(y1 * s)})">')
        lines += [self._draw(item, 1.0 / s) for item in self._items]
        lines += ["</g>", "</svg>", ""]
        return "\n".join(lines)
