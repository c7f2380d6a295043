"""Keypoint graph and route search.

Nodes are the start, the entry and exit ports of every windowed obstacle,
a contact/release pair per free ball and the goal endpoint.  Edges are the
directed legs a ball can actually roll: from the start in any direction,
from an exit port only along its exit ray.  A leg is clear when it crosses
no blocking footprint.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

from . import jsonio
from .court import BALL_RADIUS, Capture, Court, Redirect, SpeedGate
from .errors import NoRoute, UnknownId
from .geometry import Vec2, bearing, dist, segment_hits_disk, segment_hits_polygon, unit, wrap_deg

GATE_SURCHARGE = 0.5
# free-ball cut angles at or above this cannot transfer useful speed
MAX_CUT_DEG = 60.0
# exit rays must pass this close (fraction of radius / face width) to a target
GOAL_LATERAL_FRAC = 0.5
ENTRY_LATERAL_FRAC = 0.25
LOS_TRIM = 1e-6
MAX_EXPANSIONS = 200_000


@dataclass(frozen=True)
class Keypoint:
    id: str
    position: Vec2
    owner: str
    role: str  # "terminal", "entry", "exit"


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    length: float
    clear: bool
    heading_deg: float
    # obstacle or free ball crossed by this edge (entry->exit), if any
    traverses: Optional[str] = None


@dataclass(frozen=True)
class AssistGraph:
    court: Court
    goal: str
    nodes: dict  # id -> Keypoint
    edges: tuple

    def out_edges(self, nid: str) -> list:
        return [e for e in self.edges if e.src == nid]

    def edge(self, src: str, dst: str) -> Edge:
        for e in self.edges:
            if e.src == src and e.dst == dst:
                return e
        raise KeyError((src, dst))


@dataclass(frozen=True)
class Route:
    """A single-stroke path from the start to the goal.

    ``waypoints`` pairs each keypoint with the heading of the leg leaving it
    (0 at the goal).  ``gates`` lists the speed-relevant obstacles and free
    balls in order; ``through`` lists everything the ball passes through.
    """

    waypoints: tuple
    total_distance: float
    gates: tuple
    through: tuple
    goal: str
    cost: float
    stroke_count: int = 1

    @property
    def ids(self) -> tuple:
        return tuple(k.id for k, _ in self.waypoints)

    @property
    def first_heading(self) -> float:
        return self.waypoints[0][1]

    @property
    def first_target(self) -> Keypoint:
        return self.waypoints[1][0]

    def to_json(self) -> dict:
        return {
            "route": [{"keypoint": k.id, "angle": jsonio.fmt_degrees(wrap_deg(h))} for k, h in self.waypoints],
            "stroke_count": self.stroke_count,
            "total_distance": self.total_distance,
        }


# ---------------------------------------------------------------------------
# line of sight


def _blockers(court: Court, exclude: set):
    for o in court.obstacles:
        if o.id in exclude or isinstance(o.interaction, Capture):
            continue
        yield o
    for b in court.free_balls:
        if b.id not in exclude:
            yield b


def leg_clear(court: Court, a, b, exclude=()) -> bool:
    """True when segment ``a``-``b`` (trimmed at both ends) crosses no footprint."""
    L = dist(a, b)
    if L <= 2 * LOS_TRIM:
        return True
    u = ((b[0] - a[0]) / L, (b[1] - a[1]) / L)
    p = (a[0] + u[0] * LOS_TRIM, a[1] + u[1] * LOS_TRIM)
    q = (b[0] - u[0] * LOS_TRIM, b[1] - u[1] * LOS_TRIM)
    ex = set(exclude)
    for o in _blockers(court, ex):
        if hasattr(o, "kind"):
            hit = segment_hits_disk(p, q, o.center, o.radius) if o.is_disk else segment_hits_polygon(p, q, o.polygon)
        else:
            hit = segment_hits_disk(p, q, o.position, 2 * BALL_RADIUS)
        if hit:
            return False
    return True


# ---------------------------------------------------------------------------
# graph


def _ghost(ball_pos, goal_pos) -> Vec2:
    d = Vec2(goal_pos[0] - ball_pos[0], goal_pos[1] - ball_pos[1])
    n = d.norm()
    return Vec2(ball_pos[0] - 2 * BALL_RADIUS * d.x / n, ball_pos[1] - 2 * BALL_RADIUS * d.y / n)


def cut_angle(court: Court, bid: str, goal: str, from_pos=None) -> float:
    """Angle between the struck ball's approach and the line of centres."""
    b = court.ball(bid)
    g = court.get(goal).center
    ghost = _ghost(b.position, g)
    src = court.start if from_pos is None else from_pos
    return abs(wrap_deg(bearing(src, ghost) - bearing(b.position, g)))


def build_graph(court: Court, goal: str) -> AssistGraph:
    g = court.get(goal)
    if not isinstance(g.interaction, Capture):
        raise UnknownId(f"{goal!r} is not an endpoint")
    nodes = {"start": Keypoint("start", court.start, "start", "terminal")}
    gates = [o for o in court.obstacles if o.windowed]
    for o in gates:
        nodes[f"{o.id}:entry"] = Keypoint(f"{o.id}:entry", o.entry_port, o.id, "entry")
        nodes[f"{o.id}:exit"] = Keypoint(f"{o.id}:exit", o.exit_port, o.id, "exit")
    for b in court.free_balls:
        if dist(b.position, g.center) > 2 * BALL_RADIUS:
            nodes[f"{b.id}:contact"] = Keypoint(f"{b.id}:contact", _ghost(b.position, g.center), b.id, "entry")
            nodes[f"{b.id}:release"] = Keypoint(f"{b.id}:release", b.position, b.id, "exit")
    nodes[goal] = Keypoint(goal, g.center, goal, "terminal")

    edges = []
    s = court.start
    # from the start: aim anywhere
    if leg_clear(court, s, g.center):
        edges.append(Edge("start", goal, dist(s, g.center), True, bearing(s, g.center)))
    for o in gates:
        port = o.entry_port
        h = bearing(s, port)
        if dist(s, port) > 0 and o.accepts(h) and leg_clear(court, s, port, exclude={o.id}):
            edges.append(Edge("start", f"{o.id}:entry", dist(s, port), True, h))
    for b in court.free_balls:
        cid = f"{b.id}:contact"
        if cid not in nodes:
            continue
        ghost = nodes[cid].position
        if cut_angle(court, b.id, goal) < MAX_CUT_DEG and leg_clear(court, s, ghost, exclude={b.id}):
            # the contact ghost sits exactly 2R from the ball; path stays outside
            edges.append(Edge("start", cid, dist(s, ghost), True, bearing(s, ghost)))
        h = bearing(b.position, g.center)
        edges.append(Edge(cid, f"{b.id}:release", 0.0, True, h, traverses=b.id))
        if leg_clear(court, b.position, g.center, exclude={b.id}):
            edges.append(Edge(f"{b.id}:release", goal, dist(b.position, g.center), True, h))
    # traversal and exit rays
    for o in gates:
        edges.append(Edge(f"{o.id}:entry", f"{o.id}:exit", 0.0, True, o.heading, traverses=o.id))
        p = o.exit_port
        h = o.exit_heading
        u = unit(h)
        targets = [(goal, g.center, GOAL_LATERAL_FRAC * g.radius, None)]
        for t in gates:
            if t.id != o.id and t.accepts(h):
                targets.append((f"{t.id}:entry", t.entry_port, ENTRY_LATERAL_FRAC * 2 * t.face_half_width, t))
        for nid, pos, tol, tobs in targets:
            dx, dy = pos[0] - p.x, pos[1] - p.y
            along = dx * u.x + dy * u.y
            lateral = abs(u.x * dy - u.y * dx)
            if along <= 0 or lateral > tol:
                continue
            end = Vec2(p.x + u.x * along, p.y + u.y * along)
            ex = {o.id} | ({tobs.id} if tobs is not None else set())
            if leg_clear(court, p, end, exclude=ex):
                edges.append(Edge(f"{o.id}:exit", nid, along, True, h))
    return AssistGraph(court, goal, nodes, tuple(edges))


# ---------------------------------------------------------------------------
# search


def _is_gate(court: Court, oid: str) -> bool:
    if any(b.id == oid for b in court.free_balls):
        return True
    return isinstance(court.get(oid).interaction, (SpeedGate, Redirect))


def _route_from(graph: AssistGraph, ids: tuple, cost: float) -> Route:
    court = graph.court
    wps, gates, through = [], [], []
    total = 0.0
    for a, b in zip(ids, ids[1:]):
        e = graph.edge(a, b)
        wps.append((graph.nodes[a], e.heading_deg))
        total += e.length
        if e.traverses is not None:
            through.append(e.traverses)
            if _is_gate(court, e.traverses):
                gates.append(e.traverses)
    wps.append((graph.nodes[ids[-1]], 0.0))
    return Route(tuple(wps), total, tuple(gates), tuple(through), graph.goal, cost)


def edge_cost(graph: AssistGraph, e: Edge) -> float:
    c = e.length
    if e.traverses is not None and _is_gate(graph.court, e.traverses):
        c += GATE_SURCHARGE
    return c


def find_routes(graph: AssistGraph, k: int = 3) -> list:
    """Up to ``k`` simple routes in ascending cost, ties by waypoint ids."""
    if k < 1:
        raise ValueError("k must be at least 1")
    adj = {n: [] for n in graph.nodes}
    for e in graph.edges:
        adj[e.src].append(e)
    heap = [(0.0, ("start",), 0.0)]
    out = []
    pops = 0
    while heap and len(out) < k and pops < MAX_EXPANSIONS:
        _, ids, cost = heapq.heappop(heap)
        pops += 1
        node = ids[-1]
        if node == graph.goal:
            out.append(_route_from(graph, ids, cost))
            continue
        for e in adj[node]:
            if e.dst in ids:
                continue
            c = cost + edge_cost(graph, e)
            heapq.heappush(heap, (round(c, 9), ids + (e.dst,), c))
    if not out:
        raise NoRoute(f"no route from start to {graph.goal!r}")
    return out


# ---------------------------------------------------------------------------
# speed bookkeeping


def _segments(route: Route):
    """Route as alternating ('leg', length) and ('pass', id) items."""
    items = []
    wps = route.waypoints
    for i in range(len(wps) - 1):
        a, b = wps[i][0], wps[i + 1][0]
        if a.role == "entry" and b.role == "exit" and a.owner == b.owner:
            items.append(("pass", a.owner))
        else:
            L = dist(a.position, b.position) if a.role != "exit" else _exit_leg(a, b, wps[i][1])
            items.append(("leg", L))
    return items


def _exit_leg(a: Keypoint, b: Keypoint, heading: float) -> float:
    u = unit(heading)
    return (b.position.x - a.position.x) * u.x + (b.position.y - a.position.y) * u.y


def _target_speed(goal, cfg) -> float:
    it = goal.interaction
    if goal.kind.value == "DiskEndpoint":
        return math.sqrt(2.0 * cfg.a_roll * it.radius)
    return it.s_capture


def _pass_back(court, oid, route, s, lo_mode=False):
    """Speed needed before passing ``oid`` to leave it with ``s``."""
    try:
        o = court.get(oid)
    except UnknownId:
        # free ball: the struck ball must carry s / cos(cut)
        cut = cut_angle(court, oid, route.goal)
        return s / math.cos(math.radians(cut))
    it = o.interaction
    if isinstance(it, SpeedGate):
        return max(it.s_min, math.sqrt(s * s + it.s_cost * it.s_cost))
    if isinstance(it, Redirect):
        return s / it.speed_factor
    return s


def required_speed(route: Route, court: Court, cfg) -> float:
    """Launch speed (m/s) by backward energy bookkeeping from the goal."""
    s = _target_speed(court.get(route.goal), cfg)
    for kind, val in reversed(_segments(route)):
        if kind == "leg":
            s = math.sqrt(s * s + 2.0 * cfg.a_roll * val)
        else:
            s = _pass_back(court, val, route, s)
    return s


def launch_window(route: Route, court: Court, cfg):
    """Launch speeds (lo, hi) that arrive at the goal able to be captured.

    ``lo`` just reaches the near rim, ``hi`` crosses the far rim no faster
    than the capture speed.  Returns ``None`` if the window is empty or
    lies entirely above ``cfg.s_max``.
    """
    goal = court.get(route.goal)
    it = goal.interaction
    items = _segments(route)
    kind, L = items[-1]
    lo2 = 2.0 * cfg.a_roll * max(L - it.radius, 0.0)
    hi2 = it.s_capture ** 2 + 2.0 * cfg.a_roll * (L + it.radius)
    lo, hi = math.sqrt(lo2), math.sqrt(hi2)
    for kind, val in reversed(items[:-1]):
        if kind == "leg":
            lo = math.sqrt(lo * lo + 2.0 * cfg.a_roll * val)
            hi = math.sqrt(hi * hi + 2.0 * cfg.a_roll * val)
            continue
        o = court.get(val) if court.has(val) else None
        gi = o.interaction if o is not None else None
        if isinstance(gi, SpeedGate):
            hi = math.sqrt(hi * hi + gi.s_cost ** 2)
            lo = max(gi.s_min, math.sqrt(lo * lo + gi.s_cost ** 2))
            if hi < gi.s_min:
                return None
        else:
            lo = _pass_back(court, val, route, lo)
            hi = _pass_back(court, val, route, hi)
    hi = min(hi, cfg.s_max)
    if lo > hi:
        return None
    return lo, hi


def plan(court: Court, goal: str, k: int = 3) -> list:
    return find_routes(build_graph(court, goal), k)
