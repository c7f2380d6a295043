"""Planar geometry helpers.

Angles are degrees, counter-clockwise from the court x-axis.  All overlap
tests are strict: shapes that merely touch do not overlap.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

EPS = 1e-9


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def scale(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]


def wrap_deg(a: float) -> float:
    """Wrap an angle to (-180, 180]."""
    a = math.fmod(a, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


def norm_heading(h: float) -> float:
    h = math.fmod(h, 360.0)
    if h < 0.0:
        h += 360.0
    if h >= 360.0:
        h -= 360.0
    return h


def unit(deg: float) -> Vec2:
    r = math.radians(deg)
    return Vec2(math.cos(r), math.sin(r))


def bearing(p, q) -> float:
    return math.degrees(math.atan2(q[1] - p[1], q[0] - p[0]))


def dist(p, q) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def rect_corners(center, heading_deg: float, length: float, width: float) -> np.ndarray:
    """Corners of an oriented rectangle, counter-clockwise, shape (4, 2)."""
    u = unit(heading_deg)
    n = Vec2(-u.y, u.x)
    hl, hw = 0.5 * length, 0.5 * width
    cx, cy = center
    out = np.empty((4, 2))
    for i, (a, b) in enumerate(((-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw))):
        out[i, 0] = cx + a * u.x + b * n.x
        out[i, 1] = cy + a * u.y + b * n.y
    return out


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def segments_intersect(a, b, c, d) -> bool:
    """Closed segment-segment intersection test."""
    d1 = _cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1])
    d2 = _cross(b[0] - a[0], b[1] - a[1], d[0] - a[0], d[1] - a[1])
    d3 = _cross(d[0] - c[0], d[1] - c[1], a[0] - c[0], a[1] - c[1])
    d4 = _cross(d[0] - c[0], d[1] - c[1], b[0] - c[0], b[1] - c[1])
    if ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS)) and (
        (d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS)
    ):
        return True

    def on_seg(p, q, r, dv):
        return abs(dv) <= EPS and (
            min(p[0], q[0]) - EPS <= r[0] <= max(p[0], q[0]) + EPS
            and min(p[1], q[1]) - EPS <= r[1] <= max(p[1], q[1]) + EPS
        )

    return on_seg(a, b, c, d1) or on_seg(a, b, d, d2) or on_seg(c, d, a, d3) or on_seg(c, d, b, d4)


def point_in_polygon(p, poly: np.ndarray) -> bool:
    """Strict interior test for a convex counter-clockwise polygon."""
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if _cross(b[0] - a[0], b[1] - a[1], p[0] - a[0], p[1] - a[1]) <= EPS:
            return False
    return True


def segment_hits_polygon(a, b, poly: np.ndarray) -> bool:
    if point_in_polygon(a, poly) or point_in_polygon(b, poly):
        return True
    n = len(poly)
    return any(segments_intersect(a, b, poly[i], poly[(i + 1) % n]) for i in range(n))


def point_segment_distance(p, a, b) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    L2 = ax * ax + ay * ay
    if L2 == 0.0:
        return dist(p, a)
    t = max(0.0, min(1.0, ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / L2))
    return math.hypot(a[0] + t * ax - p[0], a[1] + t * ay - p[1])


def segment_hits_disk(a, b, center, radius: float) -> bool:
    return point_segment_distance(center, a, b) < radius - EPS


def _project(poly, axis):
    vals = poly @ axis
    return vals.min(), vals.max()


def polygons_overlap(p: np.ndarray, q: np.ndarray) -> bool:
    """Separating-axis test for convex polygons with positive-area overlap."""
    for poly in (p, q):
        n = len(poly)
        for i in range(n):
            e = poly[(i + 1) % n] - poly[i]
            axis = np.array([-e[1], e[0]])
            axis /= np.linalg.norm(axis)
            a0, a1 = _project(p, axis)
            b0, b1 = _project(q, axis)
            if a1 <= b0 + EPS or b1 <= a0 + EPS:
                return False
    return True


def polygon_disk_overlap(poly: np.ndarray, center, radius: float) -> bool:
    if point_in_polygon(center, poly):
        return True
    n = len(poly)
    return min(point_segment_distance(center, poly[i], poly[(i + 1) % n]) for i in range(n)) < radius - EPS


def disks_overlap(c1, r1: float, c2, r2: float) -> bool:
    return dist(c1, c2) < r1 + r2 - EPS
