"""Static SVG rendering of a simulation run.

Hand-rolled SVG: goal region, player trajectories, capture-range circles, and
enclosure-region outlines at selected time stamps.  No plotting toolkit; the
output is a single self-contained file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import Scenario, TrajectoryLog, evader_id, pursuer_id
from .pef import PairState, boundary_points, positional_value
from .world import DiskGoal, EllipseGoal, EvaderState, PursuerState

_PURSUER_COLORS = ["#1f77b4", "#17becf", "#3a5fcd", "#4682b4", "#5f9ea0", "#6495ed", "#27408b", "#009acd"]
_EVADER_COLORS = ["#d62728", "#e377c2", "#ff7f0e", "#b22222", "#cd5c5c", "#ff4500"]
_ENCLOSURE_COLOR = "#2ca02c"


@dataclass
class _Mapper:
    x0: float
    y1: float
    scale: float
    pad: float

    def pt(self, x: float, y: float) -> tuple[float, float]:
        return (
            (x - self.x0) * self.scale + self.pad,
            (self.y1 - y) * self.scale + self.pad,
        )


def _bounds(scenario: Scenario, log: TrajectoryLog) -> tuple[float, float, float, float]:
    xs: list[float] = []
    ys: list[float] = []
    for tick in log.ticks:
        for px, py, *_ in tick.pursuers:
            xs.append(px)
            ys.append(py)
        for ex, ey, *_ in tick.evaders:
            xs.append(ex)
            ys.append(ey)
    g = scenario.goal
    if isinstance(g, DiskGoal):
        xs += [g.center[0] - g.radius, g.center[0] + g.radius]
        ys += [g.center[1] - g.radius, g.center[1] + g.radius]
    elif isinstance(g, EllipseGoal):
        xs += [g.center[0] - g.semi_axes[0], g.center[0] + g.semi_axes[0]]
        ys += [g.center[1] - g.semi_axes[1], g.center[1] + g.semi_axes[1]]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    margin = 0.06 * max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
    return min(xs) - margin, max(xs) + margin, min(ys) - margin, max(ys) + margin


def _polyline(points: list[tuple[float, float]], color: str, width: float, dash: str = "", opacity: float = 1.0) -> str:
    if len(points) < 2:
        return ""
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline points="{coords}" fill="none" stroke="{color}" '
        f'stroke-width="{width:.2f}" opacity="{opacity:.2f}"{dash_attr}/>'
    )


def _snapshot_indices(log: TrajectoryLog, times: list[float]) -> list[int]:
    if not log.ticks:
        return []
    ticks = [t.t for t in log.ticks]
    out = []
    for want in times:
        k = int(np.argmin([abs(t - want) for t in ticks]))
        if k not in out:
            out.append(k)
    return out


def render_svg(scenario: Scenario, log: TrajectoryLog, snapshot_times: list[float] | None = None) -> str:
    """Render the run to an SVG string."""
    if snapshot_times is None:
        snapshot_times = scenario.snapshot_times
    if not snapshot_times and log.ticks:
        t_end = log.ticks[-1].t
        snapshot_times = [0.0, 0.25 * t_end, 0.5 * t_end, 0.75 * t_end, t_end]
    x_min, x_max, y_min, y_max = _bounds(scenario, log)
    width_px = 860.0
    scale = (width_px - 40.0) / max(x_max - x_min, 1e-9)
    height_px = (y_max - y_min) * scale + 40.0
    m = _Mapper(x0=x_min, y1=y_max, scale=scale, pad=20.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px:.0f}" '
        f'height="{height_px:.0f}" viewBox="0 0 {width_px:.0f} {height_px:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]

    g = scenario.goal
    if isinstance(g, DiskGoal):
        cx, cy = m.pt(g.center[0], g.center[1])
        parts.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{g.radius * scale:.2f}" '
            'fill="#cccccc" stroke="#555555" stroke-width="1.5"/>'
        )
        lx, ly = m.pt(g.center[0], g.center[1])
        parts.append(f'<text x="{lx:.2f}" y="{ly:.2f}" font-size="14" text-anchor="middle">goal</text>')
    elif isinstance(g, EllipseGoal):
        cx, cy = m.pt(g.center[0], g.center[1])
        parts.append(
            f'<ellipse cx="{cx:.2f}" cy="{cy:.2f}" rx="{g.semi_axes[0] * scale:.2f}" '
            f'ry="{g.semi_axes[1] * scale:.2f}" fill="#cccccc" stroke="#555555" stroke-width="1.5"/>'
        )

    snap_idx = _snapshot_indices(log, snapshot_times)

    # enclosure outlines for matched pairings at the snapshot instants
    psis = np.linspace(0.0, 2.0 * math.pi, 181)
    for k in snap_idx:
        tick = log.ticks[k]
        for coal, ev in tick.matching:
            evx, evy, *_rest, status = tick.evaders[ev]
            if status != "active":
                continue
            evader = EvaderState(pos=np.array([evx, evy]), v_max=scenario.evaders[ev].v_max)
            for i in coal:
                px, py, heading, _ = tick.pursuers[i]
                pursuer = PursuerState(
                    pos=np.array([px, py]),
                    heading=heading,
                    v_max=scenario.pursuers[i].v_max,
                    kappa=scenario.pursuers[i].kappa,
                    capture_radius=scenario.pursuers[i].capture_radius,
                )
                pts = boundary_points(psis, PairState(pursuer, evader))
                # clip to the coalition's intersection so a lens renders as arcs
                keep: list[tuple[float, float]] = []
                for q in pts:
                    ok = True
                    for kk in coal:
                        if kk == i:
                            continue
                        qx, qy, qh, _ = tick.pursuers[kk]
                        other = PursuerState(
                            pos=np.array([qx, qy]),
                            heading=qh,
                            v_max=scenario.pursuers[kk].v_max,
                            kappa=scenario.pursuers[kk].kappa,
                            capture_radius=scenario.pursuers[kk].capture_radius,
                        )
                        if positional_value(q, PairState(other, evader)) < 0.0:
                            ok = False
                            break
                    if ok:
                        keep.append(m.pt(q[0], q[1]))
                    else:
                        if len(keep) >= 2:
                            parts.append(_polyline(keep, _ENCLOSURE_COLOR, 1.2, opacity=0.8))
                        keep = []
                parts.append(_polyline(keep, _ENCLOSURE_COLOR, 1.2, opacity=0.8))

    # capture-range circles at the snapshot instants
    for k in snap_idx:
        tick = log.ticks[k]
        for i, (px, py, *_rest) in enumerate(tick.pursuers):
            cx, cy = m.pt(px, py)
            r = scenario.pursuers[i].capture_radius * scale
            parts.append(
                f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" fill="none" '
                f'stroke="{_PURSUER_COLORS[i % len(_PURSUER_COLORS)]}" '
                'stroke-width="1" stroke-dasharray="5,4" opacity="0.6"/>'
            )

    # trajectories
    for i in range(len(scenario.pursuers)):
        pts = [m.pt(t.pursuers[i][0], t.pursuers[i][1]) for t in log.ticks]
        parts.append(_polyline(pts, _PURSUER_COLORS[i % len(_PURSUER_COLORS)], 2.0))
    for j in range(len(scenario.evaders)):
        pts = [
            m.pt(t.evaders[j][0], t.evaders[j][1])
            for t in log.ticks
            if t.evaders[j][4] == "active"
        ]
        parts.append(_polyline(pts, _EVADER_COLORS[j % len(_EVADER_COLORS)], 2.0))

    # start markers and labels
    if log.ticks:
        first = log.ticks[0]
        for i, (px, py, *_rest) in enumerate(first.pursuers):
            cx, cy = m.pt(px, py)
            color = _PURSUER_COLORS[i % len(_PURSUER_COLORS)]
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="{color}"/>')
            parts.append(
                f'<text x="{cx + 6:.2f}" y="{cy - 6:.2f}" font-size="13" fill="{color}">{pursuer_id(i)}</text>'
            )
        for j, (ex, ey, *_rest) in enumerate(first.evaders):
            cx, cy = m.pt(ex, ey)
            color = _EVADER_COLORS[j % len(_EVADER_COLORS)]
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="{color}"/>')
            parts.append(
                f'<text x="{cx + 6:.2f}" y="{cy - 6:.2f}" font-size="13" fill="{color}">{evader_id(j)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(p for p in parts if p)


__all__ = ["render_svg"]
