"""SVG plots of a court, its planned route and the attempted trajectories."""
from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .court import BALL_RADIUS, Court, ObstacleKind

K = ObstacleKind
PX_PER_M = 200.0
MARGIN = 10.0
TRACK_STRIDE = 20

_FILL = {
    K.StraightWall: "#555555",
    K.Curve: "#e3c21a",
    K.Ramp: "#c97b2a",
    K.BridgeTunnel: "#7a9cc6",
    K.Volcano: "#a0522d",
    K.RollerCoaster: "#b03a2e",
    K.CampArch: "#8e7cc3",
    K.PitfallPlate: "#999966",
    K.DiskEndpoint: "#ffffff",
    K.CupEndpoint: "#222222",
}
# one colour per attempt, cycled
_TRACK_COLOURS = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


class _Frame:
    def __init__(self, court: Court):
        self.h = court.width

    def x(self, x: float) -> str:
        return f"{MARGIN + x * PX_PER_M:.2f}"

    def y(self, y: float) -> str:
        return f"{MARGIN + (self.h - y) * PX_PER_M:.2f}"

    def pt(self, p) -> str:
        return f"{self.x(p[0])},{self.y(p[1])}"

    def r(self, r: float) -> str:
        return f"{r * PX_PER_M:.2f}"


def _decimate(track: np.ndarray, stride: int) -> np.ndarray:
    idx = list(range(0, len(track), stride))
    if idx[-1] != len(track) - 1:
        idx.append(len(track) - 1)
    return track[idx]


def render_svg(court: Court, episodes=(), route=None, stride: int = TRACK_STRIDE) -> str:
    """Court footprints, the route as a ``<path>``, one ``<polyline>`` per episode.

    Free-ball tracks are drawn as dashed paths so that the polyline count
    equals the number of attempts.
    """
    f = _Frame(court)
    w = 2 * MARGIN + court.length * PX_PER_M
    h = 2 * MARGIN + court.width * PX_PER_M
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" viewBox="0 0 {w:.0f} {h:.0f}">',
        f"<title>{escape(court.name)}</title>",
        f'<rect x="{f.x(0)}" y="{f.y(court.width)}" width="{f.r(court.length)}" height="{f.r(court.width)}" '
        'fill="#3c8d3c" stroke="#1e4d1e" stroke-width="2"/>',
    ]
    for o in court.obstacles:
        fill = _FILL[o.kind]
        attrs = f'id={quoteattr(o.id)} class="{o.kind.value}" fill="{fill}" stroke="#000000" stroke-width="1"'
        if o.is_disk:
            out.append(f'<circle cx="{f.x(o.center.x)}" cy="{f.y(o.center.y)}" r="{f.r(o.radius)}" {attrs}/>')
        else:
            pts = " ".join(f.pt(p) for p in o.polygon)
            out.append(f'<polygon points="{pts}" {attrs}/>')
    for b in court.free_balls:
        out.append(
            f'<circle cx="{f.x(b.position.x)}" cy="{f.y(b.position.y)}" r="{f.r(BALL_RADIUS)}" '
            f'id={quoteattr(b.id)} class="FreeBall" fill="#ffffff" stroke="#000000" stroke-width="1"/>'
        )
    out.append(
        f'<circle cx="{f.x(court.start.x)}" cy="{f.y(court.start.y)}" r="{f.r(BALL_RADIUS)}" '
        'class="start" fill="#d62728" stroke="#000000" stroke-width="1"/>'
    )
    if route is not None:
        pts = [court.start] + [kp.position for kp, _ in route.waypoints[1:]]
        d = "M " + " L ".join(f.pt(p) for p in pts)
        out.append(f'<path d="{d}" class="route" fill="none" stroke="#ffffff" stroke-width="2" stroke-dasharray="6,4"/>')
    for i, ep in enumerate(episodes):
        colour = _TRACK_COLOURS[i % len(_TRACK_COLOURS)]
        for j, bid in enumerate(ep.ball_ids):
            tr = _decimate(ep.track(j), stride)
            pts = " ".join(f.pt(p) for p in tr)
            if j == 0:
                out.append(
                    f'<polyline points="{pts}" class="attempt" data-attempt="{i + 1}" '
                    f'fill="none" stroke="{colour}" stroke-width="1.5"/>'
                )
            elif len(tr) > 1:
                d = "M " + " L ".join(f.pt(p) for p in tr)
                out.append(
                    f'<path d="{d}" class="free-ball" data-attempt="{i + 1}" data-ball={quoteattr(bid)} '
                    f'fill="none" stroke="{colour}" stroke-width="1" stroke-dasharray="2,2"/>'
                )
    out.append("</svg>")
    return "\n".join(out) + "\n"

