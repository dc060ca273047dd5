"""Minimal SVG output for trajectories and level curves."""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .models import LevelSet, Trajectory

SIZE = 600
MARGIN = 20
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"]

Window = Tuple[float, float, float, float]


class Viewport:
    """Maps the complex window onto a SIZE x SIZE canvas, imaginary axis pointing up."""

    def __init__(self, window: Window):
        x0, x1, y0, y1 = window
        span = max(x1 - x0, y1 - y0, 1e-12)
        self.x0 = (x0 + x1) / 2.0 - span / 2.0
        self.y0 = (y0 + y1) / 2.0 - span / 2.0
        self.scale = (SIZE - 2 * MARGIN) / span

    def xy(self, z: complex) -> Tuple[float, float]:
        return (
            MARGIN + (z.real - self.x0) * self.scale,
            SIZE - MARGIN - (z.imag - self.y0) * self.scale,
        )

    def points(self, zs: Iterable[complex]) -> str:
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in (self.xy(complex(z)) for z in zs))


def _window_of(points: np.ndarray, pad: float = 0.1) -> Window:
    finite = points[np.isfinite(points)]
    if finite.size == 0:
        return (-1.0, 1.0, -1.0, 1.0)
    x0, x1 = float(finite.real.min()), float(finite.real.max())
    y0, y1 = float(finite.imag.min()), float(finite.imag.max())
    extra = pad * max(x1 - x0, y1 - y0, 1.0)
    return (x0 - extra, x1 + extra, y0 - extra, y1 + extra)


def _document(body: List[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">'
    )
    return "\n".join(
        [head, f"<title>{title}</title>", f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>']
        + body
        + ["</svg>", ""]
    )


def _axes(view: Viewport, window: Window) -> List[str]:
    x0, x1, y0, y1 = window
    out = []
    if y0 <= 0 <= y1:
        out.append(f'<polyline points="{view.points([x0, x1])}" stroke="#bbb" fill="none"/>')
    if x0 <= 0 <= x1:
        pts = view.points([complex(0, y0), complex(0, y1)])
        out.append(f'<polyline points="{pts}" stroke="#bbb" fill="none"/>')
    return out


def _markers(view: Viewport, zs: Sequence[complex], color: str, r: float = 3.0) -> List[str]:
    out = []
    for z in zs:
        x, y = view.xy(complex(z))
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>')
    return out


def trajectory_svg(traj: Trajectory, window: Optional[Window] = None) -> str:
    """One polyline per branch, dots at the start, crosses at collisions."""
    all_pts = np.array([z for s in traj.samples for z in s.positions], dtype=complex)
    window = window or _window_of(all_pts)
    view = Viewport(window)
    body = _axes(view, window)
    for b in range(traj.branch_count):
        color = PALETTE[b % len(PALETTE)]
        pts = view.points(traj.branch(b))
        body.append(f'<polyline points="{pts}" stroke="{color}" fill="none" stroke-width="1.5"/>')
        body += _markers(view, [traj.samples[0].positions[b]], color)
    body += _markers(view, [z for z, _ in traj.static], "black", r=4.0)
    body += _markers(view, [e.z for e in traj.events], "#444", r=2.0)
    title = f"ray theta={traj.theta}" if traj.theta is not None else f"circle t={traj.t}"
    return _document(body, title)


def level_set_svg(level: LevelSet, sigma: Sequence[complex] = ()) -> str:
    """Level curves with the eigenvalues of A and the singular points marked."""
    view = Viewport(level.window)
    body = _axes(view, level.window)
    for k, line in enumerate(level.polylines):
        pts = list(line.points) + ([line.points[0]] if line.closed and line.points else [])
        color = PALETTE[k % len(PALETTE)]
        body.append(f'<polyline points="{view.points(pts)}" stroke="{color}" fill="none"/>')
    body += _markers(view, sigma, "black", r=4.0)
    body += _markers(view, [c.z for c in level.singular_points], "#d62728", r=4.0)
    return _document(body, f"level set t={level.t}")
