"""Minimal self-contained SVG emitter for curve-and-disk plots.

Inline styling only, no external assets; axes auto-scale to the union of all
drawn geometry so the files render in any viewer without a toolchain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class SvgFigure:
    width: int = 720
    height: int = 560
    margin: int = 48
    _polylines: list = field(default_factory=list)
    _circles: list = field(default_factory=list)
    _title: str | None = None

    def add_polyline(self, points, color: str = "#1f5fbf", stroke_width: float = 1.2):
        pts = [(float(x), float(y)) for x, y in points if math.isfinite(x) and math.isfinite(y)]
        if pts:
            self._polylines.append((pts, color, stroke_width))

    def add_circle(self, cx: float, cy: float, radius: float, color: str = "#bf3f3f"):
        self._circles.append((float(cx), float(cy), float(radius), color))

    def set_title(self, title: str):
        self._title = title

    def _bounds(self):
        xs, ys = [], []
        for pts, _, _ in self._polylines:
            xs.extend(p[0] for p in pts)
            ys.extend(p[1] for p in pts)
        for cx, cy, r, _ in self._circles:
            xs.extend([cx - r, cx + r])
            ys.extend([cy - r, cy + r])
        if not xs:
            xs, ys = [0.0, 1.0], [0.0, 1.0]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        dx = (x1 - x0) or 1.0
        dy = (y1 - y0) or 1.0
        return x0 - 0.05 * dx, x1 + 0.05 * dx, y0 - 0.05 * dy, y1 + 0.05 * dy

    def render(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        w, h, m = self.width, self.height, self.margin

        def px(x):
            return m + (x - x0) / (x1 - x0) * (w - 2 * m)

        def py(y):
            return h - m - (y - y0) / (y1 - y0) * (h - 2 * m)

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
            f'viewBox="0 0 {w} {h}">',
            f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
        ]
        # axes through the origin when visible
        if x0 < 0 < x1:
            parts.append(
                f'<line x1="{px(0):.2f}" y1="{py(y0):.2f}" x2="{px(0):.2f}" '
                f'y2="{py(y1):.2f}" stroke="#999999" stroke-width="0.8"/>'
            )
        if y0 < 0 < y1:
            parts.append(
                f'<line x1="{px(x0):.2f}" y1="{py(0):.2f}" x2="{px(x1):.2f}" '
                f'y2="{py(0):.2f}" stroke="#999999" stroke-width="0.8"/>'
            )
        for cx, cy, r, color in self._circles:
            rx = abs(px(cx + r) - px(cx))
            ry = abs(py(cy + r) - py(cy))
            parts.append(
                f'<ellipse cx="{px(cx):.2f}" cy="{py(cy):.2f}" rx="{rx:.2f}" ry="{ry:.2f}" '
                f'fill="none" stroke="{color}" stroke-width="1.2"/>'
            )
        for pts, color, sw in self._polylines:
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="{sw}"/>'
            )
        label_style = 'font-family="monospace" font-size="12" fill="#333333"'
        parts.append(f'<text x="{m}" y="{h - 10}" {label_style}>re: [{x0:.3g}, {x1:.3g}]</text>')
        parts.append(
            f'<text x="{w - m - 170}" y="{h - 10}" {label_style}>im: [{y0:.3g}, {y1:.3g}]</text>'
        )
        if self._title:
            parts.append(f'<text x="{m}" y="24" {label_style}>{self._title}</text>')
        parts.append("</svg>")
        return "\n".join(parts)

    def write(self, path: str):
        with open(path, "w") as fh:
            fh.write(self.render())
            fh.write("\n")
