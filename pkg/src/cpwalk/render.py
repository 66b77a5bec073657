"""SVG drawings of packings: circles, plus optional geodesic edges."""
from __future__ import annotations

import math

import numpy as np

from .packer import Packing


def _geodesic_path(p: complex, q: complex, to_svg) -> str:
    """Hyperbolic geodesic from p to q: arc of the circle orthogonal to the unit circle."""
    x1, y1 = to_svg(p)
    x2, y2 = to_svg(q)
    cross = (p.conjugate() * q).imag
    if abs(cross) < 1e-12 or abs(p) < 1e-12 or abs(q) < 1e-12:
        return f'<line x1="{x1:.6g}" y1="{y1:.6g}" x2="{x2:.6g}" y2="{y2:.6g}"/>'
    # circle through p, q and the inversion of p in the unit circle
    ps = p / abs(p) ** 2
    a, b, c = p, q, ps
    d = 2 * (a.real * (b.imag - c.imag) + b.real * (c.imag - a.imag) + c.real * (a.imag - b.imag))
    ux = (abs(a) ** 2 * (b.imag - c.imag) + abs(b) ** 2 * (c.imag - a.imag) + abs(c) ** 2 * (a.imag - b.imag)) / d
    uy = (abs(a) ** 2 * (c.real - b.real) + abs(b) ** 2 * (a.real - c.real) + abs(c) ** 2 * (b.real - a.real)) / d
    center = complex(ux, uy)
    rad = abs(p - center)
    scale = to_svg.scale
    # the short arc; SVG y points down, which flips the sweep
    sweep = 0 if ((p - center).conjugate() * (q - center)).imag > 0 else 1
    return (f'<path d="M {x1:.6g} {y1:.6g} A {rad * scale:.6g} {rad * scale:.6g} 0 0 {sweep} '
            f'{x2:.6g} {y2:.6g}" fill="none"/>')


class _Frame:
    def __init__(self, lo: complex, hi: complex, size: float, pad: float = 0.02):
        span = max(hi.real - lo.real, hi.imag - lo.imag) * (1 + 2 * pad)
        self.scale = size / span
        mid = (lo + hi) / 2
        self.origin = mid - complex(span, -span) / 2
        self.size = size

    def __call__(self, z: complex):
        z = complex(z)
        return ((z.real - self.origin.real) * self.scale, (self.origin.imag - z.imag) * self.scale)


def packing_svg(p: Packing, edges: bool = False, size: float = 600.0) -> str:
    """SVG text with one ``<circle>`` per vertex.

    Disc packings also get the unit circle (class ``unit``); edges are drawn
    as straight segments in the plane and hyperbolic geodesics in the disc.
    """
    disc = p.geometry == "disc"
    if disc:
        lo, hi = complex(-1, -1), complex(1, 1)
    else:
        lo = complex((p.centers.real - p.radii).min(), (p.centers.imag - p.radii).min())
        hi = complex((p.centers.real + p.radii).max(), (p.centers.imag + p.radii).max())
    frame = _Frame(lo, hi, size)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:g}" height="{size:g}" '
           f'viewBox="0 0 {size:g} {size:g}">']
    if disc:
        cx, cy = frame(0)
        out.append(f'<circle class="unit" cx="{cx:.6g}" cy="{cy:.6g}" r="{frame.scale:.6g}" '
                   'fill="none" stroke="#888"/>')
    out.append('<g fill="none" stroke="#1f4e79" stroke-width="0.5">')
    for v in range(p.n):
        cx, cy = frame(p.centers[v])
        out.append(f'<circle cx="{cx:.6g}" cy="{cy:.6g}" r="{p.radii[v] * frame.scale:.6g}"/>')
    out.append("</g>")
    if edges:
        m = p.map
        ed = m.edge_darts()
        out.append('<g stroke="#c0504d" stroke-width="0.4">')
        for e in ed:
            u, v = int(m.tail[e]), int(m.head[e])
            if disc:
                a, b = p.hyp_centers[u], p.hyp_centers[v]
                if np.isnan(a) or np.isnan(b):
                    continue  # horocycle centres sit on the boundary
                out.append(_geodesic_path(complex(a), complex(b), frame))
            else:
                x1, y1 = frame(p.centers[u])
                x2, y2 = frame(p.centers[v])
                out.append(f'<line x1="{x1:.6g}" y1="{y1:.6g}" x2="{x2:.6g}" y2="{y2:.6g}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def circle_count(svg: str) -> int:
    """Number of packing circles (the unit circle is not counted)."""
    return svg.count("<circle") - svg.count('class="unit"')
