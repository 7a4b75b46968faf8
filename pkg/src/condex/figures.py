"""SVG rendering of curves on the supported manifolds.

S^2 uses a fixed orthographic view with the far hemisphere dimmed, H^2 the
Poincare disc, S^3 the preimage under exp in a 3-d chart, and E^m its first
coordinates. Output is plain text with fixed-precision numbers, so equal
inputs give byte-identical documents.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .geom import Manifold
from .quaternion import qlog
from .spaceforms import poincare_map

SIZE = 400
MARGIN = 20

# orthographic camera for S^2 and for 3-d charts
_VIEW = np.array([1.0, 0.55, 0.45]) / np.linalg.norm([1.0, 0.55, 0.45])
_RIGHT = np.cross([0.0, 0.0, 1.0], _VIEW)
_RIGHT /= np.linalg.norm(_RIGHT)
_UP = np.cross(_VIEW, _RIGHT)

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class FigureError(ValueError):
    pass


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _path(uv: np.ndarray, stroke: str, width: float, extra: str = "") -> str:
    if len(uv) < 2:
        return ""
    d = "M" + " L".join(f"{_fmt(u)},{_fmt(w)}" for u, w in uv)
    return f'<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"{extra}/>'


def _chart(manifold: Manifold, P: np.ndarray):
    """2-d chart coordinates and a visibility mask for each point."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape[-1] != manifold.ambient_dim:
        raise FigureError(
            f"{manifold.name} curves need {manifold.ambient_dim} coordinates, got {P.shape[-1]}")
    vis = np.ones(len(P), dtype=bool)
    if manifold.kind == "spaceform" and manifold.sigma == 1:
        vis = P @ _VIEW >= 0
        return np.column_stack([P @ _RIGHT, P @ _UP]), vis
    if manifold.kind == "spaceform":
        return np.array([poincare_map(p) for p in P]), vis
    if manifold.kind == "quaternions":
        P = np.array([qlog(p) for p in P])
    if P.shape[1] == 1:
        return np.column_stack([np.arange(len(P), dtype=float), P[:, 0]]), vis
    if P.shape[1] == 2:
        return P, vis
    return np.column_stack([P[:, :3] @ _RIGHT, P[:, :3] @ _UP]), vis


def _runs(mask: np.ndarray):
    """(start, stop, value) for maximal runs of equal mask values, overlapping by one."""
    out = []
    i = 0
    n = len(mask)
    while i < n:
        j = i
        while j + 1 < n and mask[j + 1] == mask[i]:
            j += 1
        out.append((i, min(j + 2, n), bool(mask[i])))
        i = j + 1
    return out


def emit_figure(manifold: Manifold, curves: Sequence, colors: Optional[Sequence[str]] = None,
                orbits: Sequence = (), title: str = "", size: int = SIZE) -> str:
    """SVG document showing ``curves`` (arrays of ambient points) on ``manifold``.

    ``orbits`` are drawn first as thin black reference curves, e.g. integral
    curves of the prior field.
    """
    charts = [_chart(manifold, c) for c in curves]
    orbit_charts = [_chart(manifold, o) for o in orbits]
    disc = manifold.kind == "spaceform"
    if disc:
        lo, hi = np.array([-1.05, -1.05]), np.array([1.05, 1.05])
    else:
        allp = np.vstack([uv for uv, _ in charts + orbit_charts] or [np.zeros((1, 2))])
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        pad = 0.05 * max(float(np.max(hi - lo)), 1e-9)
        lo, hi = lo - pad, hi + pad
    span = float(np.max(hi - lo))
    scale = (size - 2 * MARGIN) / span
    centre = 0.5 * (lo + hi)

    def to_px(uv):
        px = (uv[:, 0] - centre[0]) * scale + size / 2
        py = size / 2 - (uv[:, 1] - centre[1]) * scale
        return np.column_stack([px, py])

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        parts.append(f'<title>{title}</title>')
    if disc:
        r = 1.0 * scale
        parts.append(f'<circle cx="{_fmt(size / 2)}" cy="{_fmt(size / 2)}" r="{_fmt(r)}" '
                     'fill="none" stroke="#888888" stroke-width="1"/>')
    for uv, vis in orbit_charts:
        for a, b, front in _runs(vis):
            extra = "" if front else ' stroke-opacity="0.25"'
            parts.append(_path(to_px(uv[a:b]), "black", 0.6, extra))
    colors = list(colors) if colors else [PALETTE[i % len(PALETTE)] for i in range(len(charts))]
    for (uv, vis), col in zip(charts, colors):
        for a, b, front in _runs(vis):
            extra = "" if front else ' stroke-opacity="0.3" stroke-dasharray="3,2"'
            parts.append(_path(to_px(uv[a:b]), col, 1.8, extra))
        end = to_px(uv[[0, -1]])
        for u, w in end:
            parts.append(f'<circle cx="{_fmt(u)}" cy="{_fmt(w)}" r="2.5" fill="{col}"/>')
    parts.append("</svg>")
    return "\n".join(p for p in parts if p) + "\n"


def latitude_orbits(manifold: Manifold, heights=(-0.8, -0.4, 0.0, 0.4, 0.8), n: int = 181):
    """Circles x3 = const: the orbits of the rotation field on S^2 or H^2."""
    s = np.linspace(0.0, 2 * np.pi, n)
    out = []
    for h in heights:
        if manifold.sigma == 1:
            r = np.sqrt(max(1 - h * h, 0.0))
            z = h
        else:
            z = 1.0 + abs(h) * 2
            r = np.sqrt(z * z - 1)
        out.append(np.column_stack([r * np.cos(s), r * np.sin(s), np.full_like(s, z)]))
    return out
