"""Ternary phase portraits rendered as standalone SVG.

Vertex e1 sits at (0, 0), e2 at (1, 0) and e3 at (1/2, sqrt(3)/2); a state
``x`` maps to ``x2 * (1, 0) + x3 * (1/2, sqrt(3)/2)``.
"""

from __future__ import annotations

import html
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import IntegratorConfig, integrate, integrate_many
from .equilibria import StabilityClass, numeric_jacobian, stationary_states
from .model import ModelParams, normalized_matrix
from .regimes import ClassificationRefused, classify_regime

SQRT3_2 = math.sqrt(3) / 2

# basin fills; the e2 blue is drawn translucent so trajectories stay legible
BASIN_COLORS = {"e1": "#FFFF00", "e2": "#0000FF", "e3": "#FFC0CB", "unresolved": "#D3D3D3"}
BASIN_OPACITY = {"e1": 0.55, "e2": 0.30, "e3": 0.65, "unresolved": 0.6}


@dataclass(frozen=True)
class PortraitSpec:
    size: int = 600
    starts: Optional[Sequence[Sequence[float]]] = None
    n_starts: int = 24
    seed: int = 42
    basins: bool = True
    basin_resolution: int = 60
    branch_length: float = 0.07
    marker_radius: float = 5.0
    integrator: IntegratorConfig = field(default_factory=lambda: IntegratorConfig(t_max=200.0))


def barycentric_to_plane(x) -> tuple[float, float]:
    """Unit-triangle coordinates of a simplex point."""
    return float(x[1] + 0.5 * x[2]), float(SQRT3_2 * x[2])


class _Canvas:
    def __init__(self, size: int, margin: float = 40.0):
        self.size = size
        self.margin = margin
        self.scale = size - 2 * margin
        self.height = self.scale * SQRT3_2 + 2 * margin
        self.items: list[str] = []

    def xy(self, x) -> tuple[float, float]:
        u, v = barycentric_to_plane(x)
        return self.margin + u * self.scale, self.margin + (SQRT3_2 - v) * self.scale

    def pts(self, xs) -> str:
        return " ".join("%.3f,%.3f" % self.xy(x) for x in xs)

    def add(self, s: str) -> None:
        self.items.append(s)

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" '
                f'height="{self.height:.0f}" viewBox="0 0 {self.size} {self.height:.3f}">')
        return "\n".join([head, *self.items, "</svg>"]) + "\n"


def _cells(R: int):
    """Small lattice triangles of the simplex at resolution ``R``, as vertex triples."""
    for i in range(R):
        for j in range(R - i):
            k = R - i - j
            up = [(i + 1, j, k - 1), (i, j + 1, k - 1), (i, j, k)]
            yield [np.array(v) / R for v in up]
            if k >= 2:
                down = [(i + 1, j, k - 1), (i, j + 1, k - 1), (i + 1, j + 1, k - 2)]
                yield [np.array(v) / R for v in down]


def _basin_layer(canvas: _Canvas, params: ModelParams, R: int, cfg: IntegratorConfig) -> None:
    cells = list(_cells(R))
    centroids = np.array([sum(c) / 3 for c in cells])
    res = integrate_many(normalized_matrix(params), centroids, cfg)
    canvas.add('<g stroke="none">')
    for cell, code in zip(cells, res.status):
        lab = res.sinks[code] if code >= 0 else "unresolved"
        canvas.add(f'<polygon points="{canvas.pts(cell)}" fill="{BASIN_COLORS[lab]}" '
                   f'fill-opacity="{BASIN_OPACITY[lab]}" stroke="{BASIN_COLORS[lab]}" '
                   f'stroke-opacity="{BASIN_OPACITY[lab]}" stroke-width="0.5"/>')
    canvas.add("</g>")


def _arrowhead(canvas: _Canvas, at, toward, size: float = 6.0) -> str:
    x0, y0 = canvas.xy(at)
    x1, y1 = canvas.xy(toward)
    dx, dy = x1 - x0, y1 - y0
    norm = math.hypot(dx, dy)
    if norm == 0:
        return ""
    dx, dy = dx / norm, dy / norm
    tip = (x0 + dx * size, y0 + dy * size)
    left = (x0 - dy * size * 0.5, y0 + dx * size * 0.5)
    right = (x0 + dy * size * 0.5, y0 - dx * size * 0.5)
    return ('<polygon points="%.3f,%.3f %.3f,%.3f %.3f,%.3f" fill="#222"/>'
            % (*tip, *left, *right))


def _trajectories(canvas: _Canvas, params: ModelParams, starts, cfg: IntegratorConfig) -> None:
    canvas.add('<g fill="none" stroke="#222" stroke-width="1">')
    for x0 in starts:
        tr = integrate(params, x0, cfg)
        xs = tr.states
        step = max(1, len(xs) // 300)
        path = xs[::step]
        if len(path) < 2:
            continue
        canvas.add(f'<polyline points="{canvas.pts(path)}"/>')
        mid = len(path) // 2
        canvas.add(_arrowhead(canvas, path[mid - 1], path[mid]))
    canvas.add("</g>")


def _inside(x, tol: float = 1e-9) -> bool:
    return bool(np.all(x >= -tol)) and abs(x.sum() - 1) < 1e-6


def _saddle_branches(canvas: _Canvas, B, loc: np.ndarray, length: float) -> None:
    J = numeric_jacobian(B, loc)
    vals, vecs = np.linalg.eig(J)
    for lam, v in zip(vals.real, vecs.T.real):
        d = np.array([v[0], v[1], -v[0] - v[1]])
        d /= np.linalg.norm(d)
        style = 'stroke="#000" stroke-width="2"' if lam < 0 else \
            'stroke="#000" stroke-width="1.5" stroke-dasharray="5,3"'
        for sgn in (1.0, -1.0):
            end = loc + sgn * length * d
            if not _inside(end):
                continue
            x0, y0 = canvas.xy(loc)
            x1, y1 = canvas.xy(end)
            canvas.add(f'<line x1="{x0:.3f}" y1="{y0:.3f}" x2="{x1:.3f}" y2="{y1:.3f}" {style}/>')


def _markers(canvas: _Canvas, params: ModelParams, spec: PortraitSpec) -> None:
    report = stationary_states(params)
    B = normalized_matrix(params)
    r = spec.marker_radius
    for s in report.states:
        loc = np.array(list(s.location))
        cx, cy = canvas.xy(loc)
        cls = s.analytic_class
        tag = f'class="{cls.value}" data-state="{s.label}"'
        if cls is StabilityClass.SINK:
            canvas.add(f'<circle {tag} cx="{cx:.3f}" cy="{cy:.3f}" r="{r}" fill="#000" stroke="#000"/>')
        elif cls is StabilityClass.SOURCE:
            canvas.add(f'<circle {tag} cx="{cx:.3f}" cy="{cy:.3f}" r="{r}" fill="#fff" '
                       f'stroke="#000" stroke-width="1.5"/>')
        elif cls is StabilityClass.SADDLE:
            canvas.add(f'<g {tag}>')
            _saddle_branches(canvas, B, loc, spec.branch_length)
            canvas.add(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r * 0.5}" fill="#000"/>')
            canvas.add("</g>")
        else:
            canvas.add(f'<rect {tag} x="{cx - r:.3f}" y="{cy - r:.3f}" width="{2 * r}" '
                       f'height="{2 * r}" fill="#888"/>')


def render_portrait(params: ModelParams, spec: PortraitSpec = PortraitSpec()) -> str:
    canvas = _Canvas(spec.size)
    corners = [np.eye(3)[i] for i in range(3)]
    if spec.basins:
        _basin_layer(canvas, params, spec.basin_resolution, spec.integrator)
    canvas.add(f'<polygon points="{canvas.pts(corners)}" fill="none" stroke="#000" stroke-width="1.5"/>')
    if spec.starts is not None:
        starts = [np.asarray(s, dtype=float) for s in spec.starts]
    else:
        rng = np.random.default_rng(spec.seed)
        starts = list(rng.dirichlet(np.ones(3), size=spec.n_starts))
    _trajectories(canvas, params, starts, spec.integrator)
    _markers(canvas, params, spec)
    for name, strat, corner, (dx, dy) in zip(("e1", "e2", "e3"), ("SN", "NS", "NP"), corners,
                                             ((-30, 18), (6, 18), (10, -4))):
        x, y = canvas.xy(corner)
        canvas.add(f'<text x="{x + dx:.3f}" y="{y + dy:.3f}" font-family="sans-serif" '
                   f'font-size="13">{name} ({strat})</text>')
    try:
        label = classify_regime(params)
        title = f"{label.regime} / {label.bomze_portrait}"
    except ClassificationRefused as exc:
        title = f"unclassified: {exc}"
    canvas.add(f'<text x="{canvas.margin:.3f}" y="20" font-family="sans-serif" '
               f'font-size="14">{html.escape(title)}</text>')
    return canvas.render()
