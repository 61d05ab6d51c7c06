"""SVG 1.1 pictures of cell approximations.

The viewBox is the ambient box scaled by 729 = 3**6, so carpet and Cantor
cells up to depth 6 land on integer coordinates.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .attractor import CellSet

SCALE = 729
CELL_FILL = "#1f2a44"
ARC_STROKE = "#d62728"


def _num(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{float(x):.6g}"


def render_svg(cells: CellSet, arc: Optional[Sequence] = None) -> str:
    amb = cells.ifs.ambient_box
    width = (amb.upper[0] - amb.lower[0]) * SCALE
    if amb.dimension == 1:
        height = width / 9
    else:
        height = (amb.upper[1] - amb.lower[1]) * SCALE

    def sx(x):
        return (x - amb.lower[0]) * SCALE

    def sy(y):
        # SVG y grows downwards.
        return (amb.upper[1] - y) * SCALE

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {_num(width)} {_num(height)}" '
        f'width="{_num(width)}" height="{_num(height)}">',
        f'<title>{cells.ifs.name} level {cells.level}</title>',
        f'<g fill="{CELL_FILL}" stroke="none">',
    ]
    for _, box in cells:
        if amb.dimension == 1:
            x0, x1 = sx(box.lower[0]), sx(box.upper[0])
            out.append(f'<rect x="{_num(x0)}" y="0" width="{_num(x1 - x0)}" '
                       f'height="{_num(height)}"/>')
        else:
            x0, x1 = sx(box.lower[0]), sx(box.upper[0])
            y0, y1 = sy(box.upper[1]), sy(box.lower[1])
            out.append(f'<rect x="{_num(x0)}" y="{_num(y0)}" '
                       f'width="{_num(x1 - x0)}" height="{_num(y1 - y0)}"/>')
    out.append('</g>')
    if arc:
        if amb.dimension == 1:
            pts = [(sx(p[0]), height / 2) for p in arc]
        else:
            pts = [(sx(p[0]), sy(p[1])) for p in arc]
        coords = " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{ARC_STROKE}" '
                   f'stroke-width="4" stroke-linejoin="round"/>')
        for (x, y), label in ((pts[0], "p"), (pts[-1], "q")):
            out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="8" fill="{ARC_STROKE}"/>')
            out.append(f'<text x="{_num(x + 12)}" y="{_num(y - 12)}" font-size="28" '
                       f'fill="{ARC_STROKE}">{label}</text>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
