"""Swing trajectories for a yaw + planar 3R arm.

The yaw joint turns a vertical swing plane onto the hitting angle; the
swing itself is solved in that plane.  Plane coordinates are measured from
the shoulder: ``x`` forward along the hit, ``z`` up.  The last link is the
club and its tip is the club head.

A swing is a trapezoid in joint space: bounded-acceleration ramp up, a
100 ms constant-velocity plateau ending at ball contact, ramp down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .court import BALL_RADIUS
from .dynamics import Action, SimConfig
from .errors import JointLimit, Unreachable, VelocityLimit
from .geometry import Vec2

PLATEAU_S = 0.1
# candidate club angular velocities at contact, rad/s
_OMEGA_GRID = np.round(np.arange(-12.0, 12.0 + 1e-9, 0.25), 6)


@dataclass(frozen=True)
class ArmModel:
    links: tuple = (0.425, 0.392, 0.50)
    joint_limits: tuple = (math.pi, math.pi, math.pi)
    yaw_limit: float = math.pi
    vel_limit: float = math.pi
    accel_limit: float = 8.0
    dt: float = 1e-3
    # tee (yaw axis) on the court, shoulder offset behind it and height above it
    base: Vec2 = Vec2(0.25, 1.0)
    standoff: float = 0.2
    shoulder_height: float = 1.0
    club_heading: float = -math.pi / 2

    def __post_init__(self):
        if any(l <= 0 for l in self.links):
            raise ValueError("link lengths must be positive")

    @property
    def contact_target(self) -> tuple:
        """Club-head position at contact in plane coordinates."""
        return (self.standoff, BALL_RADIUS - self.shoulder_height)


class JointTraj(NamedTuple):
    t: np.ndarray  # (N,)
    q: np.ndarray  # (N, 3) in-plane joints
    qd: np.ndarray  # (N, 3)
    yaw: float
    contact_index: int
    plateau_start: int

    def to_csv(self) -> str:
        rows = ["t,q1,q2,q3,yaw,qd1,qd2,qd3"]
        for k in range(len(self.t)):
            q, v = self.q[k] + 0.0, self.qd[k] + 0.0
            rows.append(
                f"{self.t[k]:.6f},{q[0]:.12f},{q[1]:.12f},{q[2]:.12f},{self.yaw:.12f},"
                f"{v[0]:.12f},{v[1]:.12f},{v[2]:.12f}"
            )
        return "\n".join(rows) + "\n"


class Violation(NamedTuple):
    kind: str  # JointLimit | VelocityLimit | AccelLimit
    sample: int
    joint: int
    value: float


def fk(arm: ArmModel, q) -> tuple:
    """Club-head ``(x, z, heading)`` in plane coordinates."""
    l1, l2, l3 = arm.links
    a1 = q[0]
    a2 = a1 + q[1]
    a3 = a2 + q[2]
    x = l1 * math.cos(a1) + l2 * math.cos(a2) + l3 * math.cos(a3)
    z = l1 * math.sin(a1) + l2 * math.sin(a2) + l3 * math.sin(a3)
    return x, z, a3


def fk_many(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    l1, l2, l3 = arm.links
    a1 = q[:, 0]
    a2 = a1 + q[:, 1]
    a3 = a2 + q[:, 2]
    x = l1 * np.cos(a1) + l2 * np.cos(a2) + l3 * np.cos(a3)
    z = l1 * np.sin(a1) + l2 * np.sin(a2) + l3 * np.sin(a3)
    return np.stack([x, z, a3], axis=1)


def jacobian(arm: ArmModel, q) -> np.ndarray:
    l1, l2, l3 = arm.links
    a1 = q[0]
    a2 = a1 + q[1]
    a3 = a2 + q[2]
    s = (l1 * math.sin(a1), l2 * math.sin(a2), l3 * math.sin(a3))
    c = (l1 * math.cos(a1), l2 * math.cos(a2), l3 * math.cos(a3))
    J = np.empty((3, 3))
    for j in range(3):
        J[0, j] = -sum(s[j:])
        J[1, j] = sum(c[j:])
        J[2, j] = 1.0
    return J


def _wrap(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def ik_swing(arm: ArmModel, club_head, club_heading: float) -> np.ndarray:
    """Closed-form elbow-down solution for a club-head pose.

    Raises
    ------
    Unreachable
        The wrist point is outside the two-link annulus.
    JointLimit
        The solution violates a joint limit.
    """
    l1, l2, l3 = arm.links
    wx = club_head[0] - l3 * math.cos(club_heading)
    wz = club_head[1] - l3 * math.sin(club_heading)
    d2 = wx * wx + wz * wz
    c2 = (d2 - l1 * l1 - l2 * l2) / (2 * l1 * l2)
    if c2 > 1.0 + 1e-12 or c2 < -1.0 - 1e-12:
        raise Unreachable(f"wrist at distance {math.sqrt(d2):.4f} m is outside the reachable annulus")
    c2 = min(1.0, max(-1.0, c2))
    if abs(math.sqrt(d2) - (l1 + l2)) < 1e-12:
        c2 = 1.0  # stretched: acos is ill-conditioned here
    q2 = math.acos(c2)  # elbow below the shoulder-wrist line
    q1 = math.atan2(wz, wx) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
    q3 = _wrap(club_heading - q1 - q2)
    q = np.array([_wrap(q1), q2, q3])
    for j in range(3):
        if abs(q[j]) > arm.joint_limits[j] + 1e-12:
            raise JointLimit(f"joint {j + 1} at {q[j]:.4f} rad exceeds its limit")
    return q


def _profile(qd: np.ndarray, arm: ArmModel):
    """Discrete synchronous trapezoid; returns per-sample velocities and plateau indices."""
    peak = float(np.max(np.abs(qd)))
    n_ramp = max(1, int(math.ceil(peak / (arm.accel_limit * arm.dt) - 1e-9)))
    n_plat = int(round(PLATEAU_S / arm.dt))
    up = np.outer(np.arange(n_ramp) / n_ramp, qd)
    plateau = np.tile(qd, (n_plat + 1, 1))
    down = np.outer(1.0 - np.arange(1, n_ramp + 1) / n_ramp, qd)
    vel = np.vstack([up, plateau, down])
    return vel, n_ramp, n_ramp + n_plat


def _build(arm: ArmModel, qB: np.ndarray, qd: np.ndarray):
    vel, ia, ib = _profile(qd, arm)
    step = vel * arm.dt
    q = np.empty_like(vel)
    # integrate forward from the contact sample and backward to the start
    q[ib] = qB
    q[ib + 1 :] = qB + np.cumsum(step[ib:-1], axis=0)
    back = np.cumsum(step[:ib][::-1], axis=0)[::-1]
    q[:ib] = qB - back
    return q, vel, ia, ib


def generate_swing(arm: ArmModel, action: Action, ball=None, cfg: SimConfig = SimConfig()) -> JointTraj:
    """Swing that meets the ball at ``action.v * cfg.s_max`` along ``action.theta_deg``."""
    if action.v <= 0:
        raise ValueError("a swing needs a positive speed fraction")
    if ball is not None and math.hypot(ball[0] - arm.base[0], ball[1] - arm.base[1]) > 1e-9:
        raise Unreachable("the ball must sit on the tee under the yaw axis")
    yaw = math.radians(action.theta_deg)
    if abs(yaw) > arm.yaw_limit + 1e-12:
        raise JointLimit("yaw beyond its limit")
    s = action.v * cfg.s_max
    qB = ik_swing(arm, arm.contact_target, arm.club_heading)
    J = jacobian(arm, qB)
    # among club angular velocities that keep every limit and make contact
    # the lowest point, take the one with the smallest peak joint speed
    best, err = None, None
    for w in _OMEGA_GRID:
        qd = np.linalg.solve(J, np.array([s, 0.0, w]))
        peak = float(np.max(np.abs(qd)))
        if peak > arm.vel_limit:
            err = err or VelocityLimit(f"plateau joint speed {peak:.3f} rad/s exceeds the limit")
            continue
        if best is not None and peak >= best[0]:
            continue
        q, vel, ia, ib = _build(arm, qB, qd)
        if np.any(np.abs(q) > np.array(arm.joint_limits) + 1e-12):
            err = err or JointLimit("swing leaves the joint range")
            continue
        z = fk_many(arm, q)[:, 1]
        if int(np.argmin(z)) != ib:
            continue
        best = (peak, q, vel, ia, ib)
    if best is None:
        raise err or JointLimit("no swing keeps the contact as the lowest club-head point")
    _, q, vel, ia, ib = best
    t = np.arange(len(q)) * arm.dt
    return JointTraj(t, q, vel, yaw, ib, ia)


def head_heights(arm: ArmModel, traj: JointTraj) -> np.ndarray:
    """Club-head height above the court for every sample."""
    return fk_many(arm, traj.q)[:, 1] + arm.shoulder_height


def contact_speed(arm: ArmModel, traj: JointTraj) -> float:
    """Cartesian club-head speed at contact by finite differences of FK."""
    k = traj.contact_index
    p = fk_many(arm, traj.q[k : k + 2])
    return float(math.hypot(p[1, 0] - p[0, 0], p[1, 1] - p[0, 1]) / arm.dt)


def validate_traj(arm: ArmModel, traj: JointTraj) -> list:
    """Every limit violation in ``traj``; empty when the swing is executable."""
    out = []
    lim = np.array(arm.joint_limits)
    for k, j in zip(*np.nonzero(np.abs(traj.q) > lim + 1e-12)):
        out.append(Violation("JointLimit", int(k), int(j), float(traj.q[k, j])))
    for k, j in zip(*np.nonzero(np.abs(traj.qd) > arm.vel_limit + 1e-9)):
        out.append(Violation("VelocityLimit", int(k), int(j), float(traj.qd[k, j])))
    acc = np.diff(traj.qd, axis=0) / arm.dt
    for k, j in zip(*np.nonzero(np.abs(acc) > arm.accel_limit + 1e-6)):
        out.append(Violation("AccelLimit", int(k) + 1, int(j), float(acc[k, j])))
    return sorted(out, key=lambda v: (v.sample, v.joint, v.kind))
