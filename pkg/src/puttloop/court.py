"""Court geometry and object model.

A court is a 3 m x 2 m field holding a start position, obstacles (endpoints
are obstacles with a capturing kind) and optional free balls.  Courts are
immutable; :func:`apply_modification` returns a new court.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Union

import numpy as np

from . import jsonio
from .errors import AmbiguousGoal, GeometryError, NoMatch, SchemaError, UnknownId
from .geometry import (
    Vec2,
    dist,
    disks_overlap,
    norm_heading,
    point_in_polygon,
    polygon_disk_overlap,
    polygons_overlap,
    rect_corners,
    unit,
    wrap_deg,
)

COURT_LENGTH = 3.0
COURT_WIDTH = 2.0
BALL_RADIUS = 0.0215
# approach cone accepted by a curve's entry face
REDIRECT_WINDOW_DEG = 90.0


class ObstacleKind(str, enum.Enum):
    StraightWall = "StraightWall"
    Curve = "Curve"
    Ramp = "Ramp"
    BridgeTunnel = "BridgeTunnel"
    Volcano = "Volcano"
    RollerCoaster = "RollerCoaster"
    CampArch = "CampArch"
    PitfallPlate = "PitfallPlate"
    DiskEndpoint = "DiskEndpoint"
    CupEndpoint = "CupEndpoint"
    FreeBall = "FreeBall"

    @property
    def capturing(self) -> bool:
        return self in (ObstacleKind.DiskEndpoint, ObstacleKind.CupEndpoint)

    @property
    def movable(self) -> bool:
        return self is ObstacleKind.FreeBall


@dataclass(frozen=True)
class Reflect:
    restitution: float


@dataclass(frozen=True)
class Redirect:
    delta_heading_deg: float
    speed_factor: float


@dataclass(frozen=True)
class SpeedGate:
    s_min: float
    s_cost: float
    rollback_factor: float
    approach_window_deg: float


@dataclass(frozen=True)
class Capture:
    radius: float
    s_capture: float


@dataclass(frozen=True)
class PassThrough:
    window_deg: float


Interaction = Union[Reflect, Redirect, SpeedGate, Capture, PassThrough]

K = ObstacleKind

# geometry parameters each kind carries in its ``params`` object
PARAM_KEYS = {
    K.StraightWall: ("length", "width"),
    K.Curve: ("delta_heading_deg", "length", "width"),
    K.Ramp: ("length", "width"),
    K.BridgeTunnel: ("length", "width"),
    K.Volcano: ("radius",),
    K.RollerCoaster: ("length", "width"),
    K.CampArch: ("length", "width"),
    K.PitfallPlate: ("length", "width"),
    K.DiskEndpoint: (),
    K.CupEndpoint: (),
}

DEFAULT_PARAMS = {
    K.StraightWall: {"length": 0.5, "width": 0.05},
    K.Curve: {"delta_heading_deg": 60.0, "length": 0.3, "width": 0.15},
    K.Ramp: {"length": 0.4, "width": 0.25},
    K.BridgeTunnel: {"length": 0.4, "width": 0.2},
    K.Volcano: {"radius": 0.2},
    K.RollerCoaster: {"length": 0.6, "width": 0.4},
    K.CampArch: {"length": 0.2, "width": 0.3},
    K.PitfallPlate: {"length": 0.4, "width": 0.25},
    K.DiskEndpoint: {},
    K.CupEndpoint: {},
}

CAPTURE_RADIUS = {K.DiskEndpoint: 0.15, K.CupEndpoint: 0.12}


def interaction_for(kind: ObstacleKind, params: dict) -> Interaction:
    """The fixed kind -> interaction table."""
    if kind is K.StraightWall:
        return Reflect(0.7)
    if kind is K.Curve:
        return Redirect(float(params.get("delta_heading_deg", 60.0)), 0.85)
    if kind is K.Ramp:
        return SpeedGate(1.0, 0.9, 0.5, 60.0)
    if kind is K.BridgeTunnel:
        return PassThrough(40.0)
    if kind is K.CampArch:
        return PassThrough(50.0)
    if kind is K.Volcano:
        return SpeedGate(1.6, 1.5, 0.5, 360.0)
    if kind is K.RollerCoaster:
        return SpeedGate(2.6, 2.4, 0.5, 30.0)
    if kind is K.PitfallPlate:
        return SpeedGate(1.2, 0.8, 0.5, 40.0)
    if kind is K.DiskEndpoint:
        return Capture(0.15, 0.35)
    if kind is K.CupEndpoint:
        return Capture(0.12, 1.2)
    raise SchemaError(f"kind {kind.value} has no obstacle interaction")


@dataclass(frozen=True)
class Pose:
    position: Vec2
    heading_deg: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", Vec2(float(self.position[0]), float(self.position[1])))
        object.__setattr__(self, "heading_deg", norm_heading(float(self.heading_deg)))


@dataclass(frozen=True, eq=False)
class Obstacle:
    id: str
    kind: ObstacleKind
    pose: Pose
    params: dict = field(default_factory=dict)

    def __eq__(self, other):
        return (
            isinstance(other, Obstacle)
            and self.id == other.id
            and self.kind == other.kind
            and self.pose == other.pose
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.id, self.kind, self.pose))

    @cached_property
    def interaction(self) -> Interaction:
        return interaction_for(self.kind, self.params)

    @property
    def heading(self) -> float:
        return self.pose.heading_deg

    @property
    def center(self) -> Vec2:
        return self.pose.position

    @property
    def is_disk(self) -> bool:
        return self.kind in (K.Volcano, K.DiskEndpoint, K.CupEndpoint)

    @property
    def radius(self) -> float:
        if self.kind is K.Volcano:
            return float(self.params["radius"])
        return CAPTURE_RADIUS[self.kind]

    @cached_property
    def polygon(self) -> Optional[np.ndarray]:
        if self.is_disk:
            return None
        return rect_corners(self.center, self.heading, self.params["length"], self.params["width"])

    @property
    def half_length(self) -> float:
        return self.radius if self.is_disk else 0.5 * self.params["length"]

    @property
    def face_half_width(self) -> float:
        return self.radius if self.is_disk else 0.5 * self.params["width"]

    @property
    def windowed(self) -> bool:
        return isinstance(self.interaction, (SpeedGate, PassThrough, Redirect))

    @property
    def window_deg(self) -> float:
        it = self.interaction
        if isinstance(it, SpeedGate):
            return it.approach_window_deg
        if isinstance(it, PassThrough):
            return it.window_deg
        if isinstance(it, Redirect):
            return REDIRECT_WINDOW_DEG
        return 0.0

    @property
    def entry_port(self) -> Vec2:
        return self.center - unit(self.heading).scale(self.half_length)

    @property
    def exit_port(self) -> Vec2:
        return self.center + unit(self.heading).scale(self.half_length)

    @property
    def exit_heading(self) -> float:
        it = self.interaction
        if isinstance(it, Redirect):
            return wrap_deg(self.heading + it.delta_heading_deg)
        return wrap_deg(self.heading)

    def accepts(self, heading_deg: float) -> bool:
        """Whether a ball moving at ``heading_deg`` is inside the approach cone."""
        return abs(wrap_deg(heading_deg - self.heading)) <= 0.5 * self.window_deg + 1e-9

    def contains(self, p) -> bool:
        if self.is_disk:
            return dist(p, self.center) < self.radius
        return point_in_polygon(p, self.polygon)

    def overlaps(self, other: "Obstacle") -> bool:
        if self.is_disk and other.is_disk:
            return disks_overlap(self.center, self.radius, other.center, other.radius)
        if self.is_disk:
            return polygon_disk_overlap(other.polygon, self.center, self.radius)
        if other.is_disk:
            return polygon_disk_overlap(self.polygon, other.center, other.radius)
        return polygons_overlap(self.polygon, other.polygon)

    def moved(self, position=None, heading_deg=None) -> "Obstacle":
        pose = Pose(
            self.pose.position if position is None else position,
            self.pose.heading_deg if heading_deg is None else heading_deg,
        )
        return Obstacle(self.id, self.kind, pose, dict(self.params))


@dataclass(frozen=True)
class FreeBall:
    id: str
    position: Vec2


@dataclass(frozen=True)
class Court:
    start: Vec2
    obstacles: tuple = ()
    free_balls: tuple = ()
    length: float = COURT_LENGTH
    width: float = COURT_WIDTH
    name: str = field(default="court", compare=False)

    @property
    def endpoints(self) -> tuple:
        return tuple(o for o in self.obstacles if o.kind.capturing)

    def get(self, oid: str) -> Obstacle:
        for o in self.obstacles:
            if o.id == oid:
                return o
        raise UnknownId(f"no obstacle with id {oid!r}")

    def has(self, oid: str) -> bool:
        return any(o.id == oid for o in self.obstacles)

    def ball(self, bid: str) -> FreeBall:
        for b in self.free_balls:
            if b.id == bid:
                return b
        raise UnknownId(f"no free ball with id {bid!r}")

    def with_obstacles(self, obstacles) -> "Court":
        return replace(self, obstacles=tuple(obstacles))


# ---------------------------------------------------------------------------
# validation


def _inside_court(o: Obstacle, court: Court) -> bool:
    tol = 1e-9
    if o.is_disk:
        c, r = o.center, o.radius
        return r - tol <= c.x <= court.length - r + tol and r - tol <= c.y <= court.width - r + tol
    poly = o.polygon
    return bool(
        poly[:, 0].min() >= -tol
        and poly[:, 0].max() <= court.length + tol
        and poly[:, 1].min() >= -tol
        and poly[:, 1].max() <= court.width + tol
    )


def validate_court(court: Court) -> Court:
    """Check every court invariant, raising :class:`GeometryError` with a path."""
    if not court.endpoints:
        raise GeometryError("obstacles: court needs at least one capturing endpoint")
    ids = [o.id for o in court.obstacles] + [b.id for b in court.free_balls]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        raise GeometryError(f"duplicate ids: {', '.join(dup)}")
    s = court.start
    if not (0.0 <= s.x <= court.length and 0.0 <= s.y <= court.width):
        raise GeometryError("start: outside the court")
    for i, o in enumerate(court.obstacles):
        if o.kind.movable:
            raise SchemaError(f"obstacles[{i}]: free balls belong in free_balls")
        if not o.is_disk:
            for key in ("length", "width"):
                if not o.params[key] > 0:
                    raise GeometryError(f"obstacles[{i}].params.{key}: must be positive")
        if o.kind is K.Volcano and not o.params["radius"] > 0:
            raise GeometryError(f"obstacles[{i}].params.radius: must be positive")
        if o.kind is K.Curve and abs(abs(o.params["delta_heading_deg"]) - 60.0) > 1e-9:
            raise GeometryError(f"obstacles[{i}].params.delta_heading_deg: must be +60 or -60")
        if not _inside_court(o, court):
            raise GeometryError(f"obstacles[{i}] ({o.id!r}): footprint leaves the court")
        if o.contains(s) or (o.is_disk and dist(s, o.center) <= o.radius):
            raise GeometryError(f"obstacles[{i}] ({o.id!r}): start lies inside the footprint")
    obs = court.obstacles
    for i in range(len(obs)):
        for j in range(i + 1, len(obs)):
            if obs[i].overlaps(obs[j]):
                raise GeometryError(
                    f"obstacles[{j}] ({obs[j].id!r}) overlaps obstacles[{i}] ({obs[i].id!r})"
                )
    for i, b in enumerate(court.free_balls):
        p = b.position
        if not (0.0 < p.x < court.length and 0.0 < p.y < court.width):
            raise GeometryError(f"free_balls[{i}] ({b.id!r}): outside the court")
        for o in obs:
            if o.contains(p):
                raise GeometryError(f"free_balls[{i}] ({b.id!r}): inside obstacle {o.id!r}")
        if dist(p, s) < 2 * BALL_RADIUS:
            raise GeometryError(f"free_balls[{i}] ({b.id!r}): touches the start ball")
    return court


# ---------------------------------------------------------------------------
# serialization


def _expect_keys(obj, keys, path):
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    missing = [k for k in keys if k not in obj]
    extra = [k for k in obj if k not in keys]
    if missing:
        raise SchemaError(f"{path}: missing field(s) {', '.join(missing)}")
    if extra:
        raise SchemaError(f"{path}: unexpected field(s) {', '.join(sorted(extra))}")


def _vec(v, path) -> Vec2:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) for c in v)):
        raise SchemaError(f"{path}: expected [x, y]")
    if not all(math.isfinite(c) for c in v):
        raise SchemaError(f"{path}: non-finite coordinate")
    return Vec2(float(v[0]), float(v[1]))


def obstacle_from_dict(d, path="obstacle") -> Obstacle:
    _expect_keys(d, ("id", "kind", "pose", "params"), path)
    try:
        kind = ObstacleKind(d["kind"])
    except ValueError:
        raise SchemaError(f"{path}.kind: unknown kind {d['kind']!r}") from None
    if kind is K.FreeBall:
        raise SchemaError(f"{path}: free balls belong in free_balls")
    _expect_keys(d["pose"], ("position", "heading_deg"), f"{path}.pose")
    pos = _vec(d["pose"]["position"], f"{path}.pose.position")
    _expect_keys(d["params"], PARAM_KEYS[kind], f"{path}.params")
    params = {}
    for k in PARAM_KEYS[kind]:
        v = d["params"][k]
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SchemaError(f"{path}.params.{k}: expected a number")
        params[k] = float(v)
    return Obstacle(str(d["id"]), kind, Pose(pos, float(d["pose"]["heading_deg"])), params)


def obstacle_to_dict(o: Obstacle) -> dict:
    return {
        "id": o.id,
        "kind": o.kind.value,
        "pose": {"position": [o.center.x, o.center.y], "heading_deg": o.heading},
        "params": {k: o.params[k] for k in PARAM_KEYS[o.kind]},
    }


def court_from_dict(d, name: str = "court") -> Court:
    _expect_keys(d, ("length", "width", "start", "obstacles", "free_balls"), "$")
    if abs(float(d["length"]) - COURT_LENGTH) > 1e-9 or abs(float(d["width"]) - COURT_WIDTH) > 1e-9:
        raise SchemaError("$: court must be 3.0 m long and 2.0 m wide")
    if not isinstance(d["obstacles"], list) or not isinstance(d["free_balls"], list):
        raise SchemaError("$: obstacles and free_balls must be lists")
    obstacles = tuple(obstacle_from_dict(o, f"obstacles[{i}]") for i, o in enumerate(d["obstacles"]))
    balls = []
    for i, b in enumerate(d["free_balls"]):
        _expect_keys(b, ("id", "position"), f"free_balls[{i}]")
        balls.append(FreeBall(str(b["id"]), _vec(b["position"], f"free_balls[{i}].position")))
    court = Court(
        start=_vec(d["start"], "start"),
        obstacles=obstacles,
        free_balls=tuple(balls),
        name=name,
    )
    return validate_court(court)


def court_to_dict(court: Court) -> dict:
    return {
        "length": court.length,
        "width": court.width,
        "start": [court.start.x, court.start.y],
        "obstacles": [obstacle_to_dict(o) for o in court.obstacles],
        "free_balls": [{"id": b.id, "position": [b.position.x, b.position.y]} for b in court.free_balls],
    }


def load_court(data, name: str = "court") -> Court:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        d = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$: invalid JSON ({exc})") from None
    return court_from_dict(d, name=name)


def save_court(court: Court) -> bytes:
    return (jsonio.dumps(court_to_dict(court)) + "\n").encode("utf-8")


def read_court(path) -> Court:
    from pathlib import Path

    p = Path(path)
    return load_court(p.read_bytes(), name=p.stem)


# ---------------------------------------------------------------------------
# goal selection

_KIND_WORDS = {
    "disk": K.DiskEndpoint,
    "plate": K.DiskEndpoint,
    "cup": K.CupEndpoint,
}
_MODIFIERS = ("left", "right", "near", "far")


def select_endpoint(court: Court, query) -> str:
    """Resolve a ``"<kind> [left|right|near|far]"`` query to an endpoint id.

    An exact endpoint id is accepted as well.  Left/right are judged looking
    down the court from the start (left is +y).
    """
    text = getattr(query, "text", query)
    if not isinstance(text, str) or not text.strip():
        raise NoMatch("empty goal query")
    endpoints = court.endpoints
    for e in endpoints:
        if e.id == text.strip():
            return e.id
    tokens = text.lower().split()
    if len(tokens) > 2 or tokens[0] not in _KIND_WORDS or (len(tokens) == 2 and tokens[1] not in _MODIFIERS):
        raise NoMatch(f"cannot parse goal query {text!r}")
    matches = [e for e in endpoints if e.kind is _KIND_WORDS[tokens[0]]]
    if not matches:
        raise NoMatch(f"no endpoint matches {text!r}")
    if len(tokens) == 1:
        if len(matches) > 1:
            raise AmbiguousGoal(f"{len(matches)} endpoints match {text!r}: " + ", ".join(e.id for e in matches))
        return matches[0].id
    mod = tokens[1]
    if mod == "left":
        keyf = lambda e: e.center.y
    elif mod == "right":
        keyf = lambda e: -e.center.y
    elif mod == "far":
        keyf = lambda e: dist(court.start, e.center)
    else:
        keyf = lambda e: -dist(court.start, e.center)
    best = max(keyf(e) for e in matches)
    winners = [e for e in matches if abs(keyf(e) - best) <= 1e-9]
    if len(winners) > 1:
        raise AmbiguousGoal(f"{text!r} does not single out one endpoint")
    return winners[0].id


# ---------------------------------------------------------------------------
# modifications

EDIT_COST = {"move": 1, "rotate": 2, "add": 3, "remove": 4, "change": 5}


@dataclass(frozen=True)
class ModificationInstruction:
    """One court edit.

    ``type`` is one of ``remove``, ``add``, ``move``, ``rotate`` or
    ``change`` (change the endpoint).  Only the fields that type needs are
    set; :meth:`to_json` emits exactly those.
    """

    type: str
    obstacle: Optional[str] = None
    kind: Optional[ObstacleKind] = None
    position: Optional[Vec2] = None
    heading_deg: Optional[float] = None
    params: Optional[tuple] = None
    endpoint: Optional[str] = None

    @property
    def cost(self) -> int:
        return EDIT_COST[self.type]

    def to_json(self) -> dict:
        t = self.type
        if t == "remove":
            return {"type": t, "obstacle": self.obstacle}
        if t == "add":
            return {
                "type": t,
                "obstacle": self.obstacle,
                "kind": self.kind.value,
                "position": [self.position.x, self.position.y],
                "angle": jsonio.fmt_degrees(self.heading_deg),
                "params": dict(self.params or ()),
            }
        if t == "move":
            return {"type": t, "obstacle": self.obstacle, "position": [self.position.x, self.position.y]}
        if t == "rotate":
            return {"type": t, "obstacle": self.obstacle, "angle": jsonio.fmt_degrees(self.heading_deg)}
        if t == "change":
            d = {"type": t, "endpoint": self.endpoint}
            if self.kind is not None:
                d["kind"] = self.kind.value
            if self.position is not None:
                d["position"] = [self.position.x, self.position.y]
            return d
        raise SchemaError(f"unknown modification type {t!r}")

    @classmethod
    def from_json(cls, d: dict) -> "ModificationInstruction":
        t = d.get("type")
        need = {
            "remove": ({"type", "obstacle"}, set()),
            "add": ({"type", "obstacle", "kind", "position", "angle"}, {"params"}),
            "move": ({"type", "obstacle", "position"}, set()),
            "rotate": ({"type", "obstacle", "angle"}, set()),
            "change": ({"type", "endpoint"}, {"kind", "position"}),
        }
        if t not in need:
            raise SchemaError(f"modification: unknown type {t!r}")
        req, opt = need[t]
        keys = set(d)
        if not req <= keys or keys - req - opt:
            raise SchemaError(f"modification {t!r}: fields must be {sorted(req)} (+ optional {sorted(opt)})")
        kind = ObstacleKind(d["kind"]) if "kind" in d else None
        pos = _vec(d["position"], "modification.position") if "position" in d else None
        heading = jsonio.parse_degrees(d["angle"]) if "angle" in d else None
        params = tuple(sorted(d["params"].items())) if "params" in d else None
        return cls(t, d.get("obstacle"), kind, pos, heading, params, d.get("endpoint"))


def modification_payload(instrs) -> dict:
    return {"modification_instructions": [i.to_json() for i in instrs]}


def apply_modification(court: Court, instr: ModificationInstruction) -> Court:
    """Return a new court with ``instr`` applied; the input is untouched."""
    obs = list(court.obstacles)
    t = instr.type
    if t in ("remove", "move", "rotate"):
        target = court.get(instr.obstacle)
        idx = obs.index(target)
        if t == "remove":
            del obs[idx]
        elif t == "move":
            obs[idx] = target.moved(position=instr.position)
        else:
            obs[idx] = target.moved(heading_deg=instr.heading_deg)
    elif t == "add":
        if court.has(instr.obstacle):
            raise GeometryError(f"add: id {instr.obstacle!r} already in use")
        params = dict(DEFAULT_PARAMS[instr.kind])
        params.update(dict(instr.params or ()))
        obs.append(Obstacle(instr.obstacle, instr.kind, Pose(instr.position, instr.heading_deg), params))
    elif t == "change":
        target = court.get(instr.endpoint)
        if not target.kind.capturing:
            raise UnknownId(f"{instr.endpoint!r} is not an endpoint")
        kind = instr.kind or target.kind
        if not kind.capturing:
            raise GeometryError("change: an endpoint must keep a capturing kind")
        pos = instr.position or target.center
        obs[obs.index(target)] = Obstacle(target.id, kind, Pose(pos, target.heading), {})
    else:
        raise SchemaError(f"unknown modification type {t!r}")
    return validate_court(replace(court, obstacles=tuple(obs)))


def mirror_court(court: Court) -> Court:
    """Reflect the court about its long axis (y -> width - y)."""
    W = court.width

    def flip(p):
        return Vec2(p.x, W - p.y)

    obs = []
    for o in court.obstacles:
        params = dict(o.params)
        if o.kind is K.Curve:
            params["delta_heading_deg"] = -params["delta_heading_deg"]
        obs.append(Obstacle(o.id, o.kind, Pose(flip(o.center), -o.heading), params))
    balls = tuple(FreeBall(b.id, flip(b.position)) for b in court.free_balls)
    return validate_court(replace(court, start=flip(court.start), obstacles=tuple(obs), free_balls=balls))

