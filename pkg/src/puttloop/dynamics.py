"""Deterministic ball physics.

The struck ball and any free balls roll with constant deceleration.  The
fixed-step kernel in :mod:`puttloop._kernels` moves them until something
happens (a face crossing, a disk entry, a ball contact, capture or rest);
the interaction is resolved here and integration resumes mid-step, so
samples stay on the ``k * dt`` grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels, jsonio
from .court import BALL_RADIUS, Capture, Court, PassThrough, Redirect, Reflect, SpeedGate
from .errors import ConfigError, DegenerateContact
from .geometry import Vec2, unit, wrap_deg

STRUCK_ID = "ball"
# a teleported ball is placed this far past the exit port
PORT_CLEARANCE = 1e-7
# hard cap on interactions per episode; a trapped ball times out instead
MAX_EVENTS = 20000
# local edge index of a rectangle's entry (back) face, see rect_corners
ENTRY_FACE = 3

TERMINAL_KINDS = ("Captured", "Rest", "Timeout")


@dataclass(frozen=True)
class Action:
    """Club motion: speed fraction ``v`` in [0, 1] and planar angle."""

    v: float
    theta_deg: float = 0.0

    def __post_init__(self):
        v = float(self.v)
        if not (0.0 <= v <= 1.0) or not math.isfinite(v):
            raise ConfigError(f"action speed fraction {v} outside [0, 1]")
        if not math.isfinite(float(self.theta_deg)):
            raise ConfigError("action angle must be finite")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "theta_deg", wrap_deg(float(self.theta_deg)))

    def to_json(self) -> dict:
        return {"v": self.v, "theta_deg": self.theta_deg}


@dataclass(frozen=True)
class SimConfig:
    s_max: float = 2.5
    a_roll: float = 0.45
    dt: float = 1e-3
    rest_speed: float = 0.02
    t_max: float = 30.0
    wall_restitution: float = 0.7

    def __post_init__(self):
        for name in ("s_max", "a_roll", "dt", "rest_speed", "t_max", "wall_restitution"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"SimConfig.{name} must be positive, got {val!r}")
        if self.dt > 5e-3:
            raise ConfigError(f"SimConfig.dt must be at most 5e-3, got {self.dt}")
        if self.wall_restitution > 1.0:
            raise ConfigError("SimConfig.wall_restitution must not exceed 1")


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    obstacle: Optional[str]
    position: Vec2
    speed: float
    ball: str = STRUCK_ID

    @property
    def terminal(self) -> bool:
        return self.kind in TERMINAL_KINDS

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "kind": self.kind,
            "obstacle": self.obstacle,
            "position": [self.position.x, self.position.y],
            "speed": self.speed,
            "ball": self.ball,
        }


@dataclass(frozen=True, eq=False)
class Episode:
    """Recorded run.

    ``samples`` has shape ``(n_steps + 1, n_balls, 2)``; row ``k`` is the
    state at ``t = k * dt``.  Ball 0 is the struck ball.
    """

    action: Action
    dt: float
    ball_ids: tuple
    samples: np.ndarray
    events: tuple
    launch_speed: float
    court_id: str = "court"
    scoring_ball: int = 0

    @property
    def terminal(self) -> Event:
        return self.events[-1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    def track(self, ball=0) -> np.ndarray:
        idx = ball if isinstance(ball, int) else self.ball_ids.index(ball)
        return self.samples[:, idx, :]

    @property
    def final_positions(self) -> np.ndarray:
        return self.samples[-1]

    def events_of(self, kind: str) -> list:
        return [e for e in self.events if e.kind == kind]

    def __eq__(self, other):
        return (
            isinstance(other, Episode)
            and self.action == other.action
            and self.dt == other.dt
            and self.ball_ids == other.ball_ids
            and self.events == other.events
            and self.samples.shape == other.samples.shape
            and bool(np.array_equal(self.samples, other.samples))
        )

    def header(self) -> dict:
        return {
            "court_id": self.court_id,
            "action": self.action.to_json(),
            "dt": self.dt,
            "balls": list(self.ball_ids),
            "events": [e.to_json() for e in self.events],
        }

    def to_jsonl(self, stride: int = 1) -> str:
        """Header record, then one record per (strided) sample."""
        rows = [self.header()]
        n = len(self.samples)
        idx = list(range(0, n, stride))
        if idx[-1] != n - 1:
            idx.append(n - 1)
        for k in idx:
            rows.append({"t": k * self.dt, "positions": {b: self.samples[k, i] for i, b in enumerate(self.ball_ids)}})
        return jsonio.dumps_lines(rows)


def collide_balls(v1, v2, c1, c2):
    """Equal-mass elastic collision: exchange normal components."""
    nx, ny = c2[0] - c1[0], c2[1] - c1[1]
    d = math.hypot(nx, ny)
    if d == 0.0:
        raise DegenerateContact("ball centres coincide")
    nx, ny = nx / d, ny / d
    a1 = v1[0] * nx + v1[1] * ny
    a2 = v2[0] * nx + v2[1] * ny
    dv = a2 - a1
    return (
        Vec2(v1[0] + dv * nx, v1[1] + dv * ny),
        Vec2(v2[0] - dv * nx, v2[1] - dv * ny),
    )


def _reflect(vel, seg, e):
    ex, ey = seg[2] - seg[0], seg[3] - seg[1]
    L = math.hypot(ex, ey)
    nx, ny = -ey / L, ex / L
    vn = vel[0] * nx + vel[1] * ny
    return vel[0] - (1.0 + e) * vn * nx, vel[1] - (1.0 + e) * vn * ny


class _Scene:
    """Kernel-ready arrays for one court."""

    def __init__(self, court: Court):
        segs, owners, faces = [], [], []
        L, W = court.length, court.width
        for a, b in (((0, 0), (L, 0)), ((L, 0), (L, W)), ((L, W), (0, W)), ((0, W), (0, 0))):
            segs.append((a[0], a[1], b[0], b[1]))
            owners.append(None)
            faces.append(-1)
        circles, circle_owner, caps, cap_owner = [], [], [], []
        for o in court.obstacles:
            it = o.interaction
            if isinstance(it, Capture):
                caps.append((o.center.x, o.center.y, it.radius, it.s_capture))
                cap_owner.append(o)
            elif o.is_disk:
                circles.append((o.center.x, o.center.y, o.radius))
                circle_owner.append(o)
            else:
                poly = o.polygon
                for f in range(4):
                    p, q = poly[f], poly[(f + 1) % 4]
                    segs.append((p[0], p[1], q[0], q[1]))
                    owners.append(o)
                    faces.append(f)
        self.segs = np.array(segs, dtype=np.float64).reshape(-1, 4)
        self.seg_owner = owners
        self.seg_face = faces
        self.circles = np.array(circles, dtype=np.float64).reshape(-1, 3)
        self.circle_owner = circle_owner
        self.caps = np.array(caps, dtype=np.float64).reshape(-1, 4)
        self.cap_owner = cap_owner


def simulate(court: Court, action: Action, cfg: SimConfig = SimConfig(), kernel=None) -> Episode:
    """Run one shot and record samples and events.

    Parameters
    ----------
    court : Court
        A validated court.
    action : Action
        Speed fraction and angle; launch speed is ``v * cfg.s_max``.
    cfg : SimConfig
        Physics constants.
    kernel : callable, optional
        Override the stepping kernel (used to compare implementations).
    """
    if not isinstance(cfg, SimConfig):
        raise ConfigError("cfg must be a SimConfig")
    advance = kernel or _kernels.advance
    scene = _Scene(court)
    ids = (STRUCK_ID,) + tuple(b.id for b in court.free_balls)
    n = len(ids)
    pos = np.zeros((n, 2))
    vel = np.zeros((n, 2))
    pos[0] = court.start
    for i, b in enumerate(court.free_balls, start=1):
        pos[i] = b.position
    s0 = action.v * cfg.s_max
    u0 = unit(action.theta_deg)
    vel[0] = (u0.x * s0, u0.y * s0)
    scoring = 1 if n > 1 else 0
    k_max = max(1, int(round(cfg.t_max / cfg.dt)))
    samples = np.zeros((k_max + 1, n, 2))
    samples[0] = pos
    def ev(kind, oid, i, t):
        return Event(t, kind, oid, Vec2(float(pos[i, 0]), float(pos[i, 1])), float(math.hypot(*vel[i])), ids[i])

    events = [ev("Launched", None, 0, 0.0)]
    k, frac = 0, 0.0
    caps = scene.caps
    if s0 < cfg.rest_speed:
        vel[0] = 0.0
    while True:
        code, bi, obj, k, frac = advance(
            pos, vel, scene.segs, scene.circles, caps, scoring, BALL_RADIUS,
            cfg.a_roll, cfg.dt, cfg.rest_speed, k, frac, k_max, samples,
        )
        t = (k + frac) * cfg.dt
        if len(events) >= MAX_EVENTS:
            code = _kernels.TIMEOUT
        if code == _kernels.REST:
            events.append(ev("Rest", None, scoring, t))
            break
        if code == _kernels.TIMEOUT:
            events.append(ev("Timeout", None, scoring, t))
            break
        if code == _kernels.CAPTURE:
            events.append(ev("Captured", scene.cap_owner[obj].id, scoring, t))
            break
        if code == _kernels.BALL:
            j = obj
            a, b = collide_balls(vel[bi], vel[j], pos[bi], pos[j])
            vel[bi], vel[j] = a, b
            events.append(ev("BallBallHit", ids[j], bi, t))
            continue
        if code == _kernels.SEGMENT:
            owner = scene.seg_owner[obj]
            if owner is None:
                vel[bi] = _reflect(vel[bi], scene.segs[obj], cfg.wall_restitution)
                events.append(ev("WallBounce", None, bi, t))
                continue
            heading = math.degrees(math.atan2(vel[bi, 1], vel[bi, 0]))
            if owner.windowed and scene.seg_face[obj] == ENTRY_FACE and owner.accepts(heading):
                _pass_gate(owner, bi, pos, vel, events, ev, t)
            else:
                it = owner.interaction
                e = it.restitution if isinstance(it, Reflect) else cfg.wall_restitution
                vel[bi] = _reflect(vel[bi], scene.segs[obj], e)
                events.append(ev("WallBounce", owner.id, bi, t))
            continue
        if code == _kernels.CIRCLE:
            _pass_gate(scene.circle_owner[obj], bi, pos, vel, events, ev, t)
            continue
        raise RuntimeError(f"unexpected kernel status {code}")  # pragma: no cover
    return Episode(
        action=action,
        dt=cfg.dt,
        ball_ids=ids,
        samples=samples[: k + 1].copy(),
        events=tuple(events),
        launch_speed=s0,
        court_id=court.name,
        scoring_ball=scoring,
    )


def _teleport(o, i, pos, vel, heading, speed):
    u = unit(heading)
    port = o.exit_port
    pos[i] = (port.x + u.x * PORT_CLEARANCE, port.y + u.y * PORT_CLEARANCE)
    vel[i] = (u.x * speed, u.y * speed)


def _pass_gate(o, i, pos, vel, events, ev, t):
    it = o.interaction
    s = float(math.hypot(*vel[i]))
    events.append(ev("EnteredObstacle", o.id, i, t))
    if isinstance(it, SpeedGate):
        if s >= it.s_min:
            _teleport(o, i, pos, vel, o.heading, math.sqrt(max(s * s - it.s_cost * it.s_cost, 0.0)))
            events.append(ev("TraversedObstacle", o.id, i, t))
        else:
            vel[i] = -vel[i] * it.rollback_factor
            events.append(ev("RolledBack", o.id, i, t))
    elif isinstance(it, PassThrough):
        _teleport(o, i, pos, vel, o.heading, s)
        events.append(ev("TraversedObstacle", o.id, i, t))
    elif isinstance(it, Redirect):
        _teleport(o, i, pos, vel, o.exit_heading, s * it.speed_factor)
        events.append(ev("Redirected", o.id, i, t))
    else:  # pragma: no cover - only windowed kinds reach here
        raise RuntimeError(f"{o.id} is not windowed")
