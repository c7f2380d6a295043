"""Outer loop: judge whether a court is solvable and, if not, change it.

Candidate edits are triaged analytically (route existence and a non-empty
launch window per route) and the cheapest candidates are confirmed by a
full inner-loop run before being returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .court import (
    DEFAULT_PARAMS,
    Court,
    ModificationInstruction,
    ObstacleKind,
    apply_modification,
    mirror_court,
    modification_payload,
    select_endpoint,
)
from .dynamics import SimConfig
from .errors import GeometryError, NoRemedy, NoRoute, UnknownId
from .geometry import Vec2, bearing, dist, point_segment_distance, unit, wrap_deg
from .innerloop import DEFAULT_BUDGET, InnerResult, run_inner
from .planner import launch_window, leg_clear, plan, required_speed

K = ObstacleKind
ALL_EDITS = ("move", "rotate", "add", "remove", "change")
MOVE_STEP = 0.05
ROTATE_STEPS = (-20.0, -10.0, 10.0, 20.0)
LATTICE = 0.25
BAND = 0.5
ADD_KINDS = (K.Curve, K.BridgeTunnel)
TRIAGE_ROUTES = 5
MAX_VERIFY = 12
DEFAULT_ROUNDS = 3


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasibility: bool
    reason: str  # feasible | obstacle_blocking | exceeds_speed_limit | no_parameters_found
    obstacle: Optional[str] = None

    def __post_init__(self):
        if self.feasibility != (self.reason == "feasible"):
            raise ValueError("feasibility must match reason")

    @property
    def text(self) -> str:
        t = self.reason.replace("_", " ")
        return f"{t}: {self.obstacle}" if self.obstacle else t

    def to_json(self) -> dict:
        return {"feasibility": self.feasibility, "reason": self.text}


@dataclass(frozen=True)
class Round:
    index: int
    inner: InnerResult
    verdict: FeasibilityVerdict
    applied: tuple = ()

    def to_json(self) -> dict:
        return {
            "round": self.index,
            "inner": self.inner.to_json(),
            "feasibility": self.verdict.to_json(),
            "modifications": modification_payload(self.applied),
        }


@dataclass(frozen=True)
class OuterResult:
    verdict: FeasibilityVerdict
    modifications: tuple
    final_court: Court
    final_inner: InnerResult
    rounds: tuple = field(default=())

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    @property
    def solved(self) -> bool:
        return self.final_inner.solved

    def to_json(self) -> dict:
        return {
            "solved": self.solved,
            "rounds": [r.to_json() for r in self.rounds],
            "feasibility": self.verdict.to_json(),
            "modifications": modification_payload(self.modifications),
        }


# ---------------------------------------------------------------------------
# verdicts


def _all_routes(court: Court, goal: str, k: int = TRIAGE_ROUTES):
    try:
        return plan(court, goal, k)
    except NoRoute:
        return []


def assess_feasibility(court: Court, goal: str, inner: InnerResult, cfg: SimConfig = SimConfig()) -> FeasibilityVerdict:
    if inner.solved:
        return FeasibilityVerdict(True, "feasible")
    esc = inner.escalation
    if esc is not None and esc.kind == "NoRoute":
        return FeasibilityVerdict(False, "obstacle_blocking")
    if esc is not None and esc.kind == "MaxSpeedRollback":
        routes = _all_routes(court, goal)
        if all(required_speed(r, court, cfg) > cfg.s_max for r in routes):
            return FeasibilityVerdict(False, "exceeds_speed_limit", esc.obstacle)
    return FeasibilityVerdict(False, "no_parameters_found")


def statically_feasible(court: Court, goal: str, cfg: SimConfig = SimConfig()) -> bool:
    """Some route has a non-empty launch window below the speed limit."""
    return any(launch_window(r, court, cfg) is not None for r in _all_routes(court, goal))


# ---------------------------------------------------------------------------
# candidate enumeration


def _fresh_id(court: Court, stem: str) -> str:
    i = 1
    while court.has(f"{stem}_{i}") or any(b.id == f"{stem}_{i}" for b in court.free_balls):
        i += 1
    return f"{stem}_{i}"


def _lattice(court: Court):
    xs = np.arange(LATTICE, court.length - 1e-9, LATTICE)
    ys = np.arange(LATTICE, court.width - 1e-9, LATTICE)
    for x in xs:
        for y in ys:
            yield Vec2(round(float(x), 6), round(float(y), 6))


def _band_segments(court: Court, goal: str, inner: Optional[InnerResult]):
    segs = []
    routes = inner.routes if inner is not None and inner.routes else ()
    for r in routes:
        pts = [k.position for k, _ in r.waypoints]
        segs.extend(zip(pts, pts[1:]))
    if not segs:
        segs.append((court.start, court.get(goal).center))
    return segs


def _curve_heading(site: Vec2, goal_pos, delta: float, half_len: float) -> float:
    """Heading that sends the curve's exit ray through the goal."""
    h = bearing(site, goal_pos) - delta
    for _ in range(30):
        u = unit(h)
        port = (site.x + u.x * half_len, site.y + u.y * half_len)
        nh = bearing(port, goal_pos) - delta
        if abs(wrap_deg(nh - h)) < 1e-12:
            break
        h = nh
    return wrap_deg(h)


def enumerate_candidates(court: Court, goal: str, inner: Optional[InnerResult] = None, allowed=ALL_EDITS):
    """Single-edit candidates, in a fixed deterministic order."""
    out = []
    movable = [o for o in court.obstacles if not o.kind.capturing]
    if "move" in allowed:
        for o in movable:
            for k in range(8):
                u = unit(45.0 * k)
                p = Vec2(round(o.center.x + MOVE_STEP * u.x, 9), round(o.center.y + MOVE_STEP * u.y, 9))
                out.append(ModificationInstruction("move", obstacle=o.id, position=p))
    if "rotate" in allowed:
        for o in movable:
            if o.is_disk:
                continue
            for d in ROTATE_STEPS:
                out.append(ModificationInstruction("rotate", obstacle=o.id, heading_deg=wrap_deg(o.heading + d)))
    if "add" in allowed:
        g = court.get(goal).center
        segs = _band_segments(court, goal, inner)
        sites = [s for s in _lattice(court) if min(point_segment_distance(s, a, b) for a, b in segs) <= BAND]
        for kind in ADD_KINDS:
            params = DEFAULT_PARAMS[kind]
            oid = _fresh_id(court, kind.value.lower())
            for s in sites:
                if dist(s, g) < 0.3 or dist(s, court.start) < 0.2:
                    continue
                if kind is K.Curve:
                    for delta in (60.0, -60.0):
                        h = _curve_heading(s, g, delta, 0.5 * params["length"])
                        p = dict(params, delta_heading_deg=delta)
                        out.append(
                            ModificationInstruction(
                                "add", obstacle=oid, kind=kind, position=s, heading_deg=round(h, 6),
                                params=tuple(sorted(p.items())),
                            )
                        )
                else:
                    h = bearing(s, g)
                    out.append(
                        ModificationInstruction(
                            "add", obstacle=oid, kind=kind, position=s, heading_deg=round(h, 6),
                            params=tuple(sorted(params.items())),
                        )
                    )
    if "remove" in allowed:
        for o in movable:
            out.append(ModificationInstruction("remove", obstacle=o.id))
    if "change" in allowed:
        e = court.get(goal)
        other = K.CupEndpoint if e.kind is K.DiskEndpoint else K.DiskEndpoint
        out.append(ModificationInstruction("change", endpoint=goal, kind=other))
        for s in _lattice(court):
            if dist(s, e.center) > 1e-9:
                out.append(ModificationInstruction("change", endpoint=goal, position=s))
    return out


def _triage(court: Court, goal: str, instr, cfg: SimConfig):
    try:
        new = apply_modification(court, instr)
    except (GeometryError, UnknownId):
        return None
    routes = _all_routes(new, goal)
    windows = [(launch_window(r, new, cfg), r) for r in routes]
    ok = [required_speed(r, new, cfg) for w, r in windows if w is not None]
    if not ok:
        return None
    return new, min(ok)


_KIND_RANK = {K.Curve: 0, K.BridgeTunnel: 1}


def propose_modifications(
    court: Court,
    goal: str,
    verdict: FeasibilityVerdict,
    k: int = 1,
    cfg: SimConfig = SimConfig(),
    allowed=ALL_EDITS,
    inner: Optional[InnerResult] = None,
    budget: int = DEFAULT_BUDGET,
    verify: bool = True,
) -> list:
    """Top-``k`` single-edit remedies as ``(instructions, score)`` pairs.

    The score is ``(edit cost, kind rank, required launch speed)``; lower is
    better.  With ``verify`` the candidates are confirmed by solving the
    edited court before they are returned.

    Raises
    ------
    NoRemedy
        No enumerated edit makes the court solvable.
    """
    if verdict.feasibility:
        raise ValueError("propose_modifications needs an infeasible verdict")
    goal = select_endpoint(court, goal)
    scored = []
    for idx, instr in enumerate(enumerate_candidates(court, goal, inner, allowed)):
        t = _triage(court, goal, instr, cfg)
        if t is None:
            continue
        new, speed = t
        score = (instr.cost, _KIND_RANK.get(instr.kind, 2) if instr.type == "add" else 0, round(speed, 9))
        scored.append((score, idx, instr, new))
    scored.sort(key=lambda s: (s[0], s[1]))
    out = []
    tried = 0
    for score, _, instr, new in scored:
        if len(out) >= k:
            break
        if verify:
            if tried >= MAX_VERIFY * k:
                break
            tried += 1
            if not run_inner(new, goal, cfg, budget).solved:
                continue
        out.append(([instr], score))
    if not out:
        raise NoRemedy(f"no single edit makes {goal!r} reachable ({verdict.text})", verdict)
    return out


# ---------------------------------------------------------------------------
# the loop


def run_outer(
    court: Court,
    goal,
    cfg: SimConfig = SimConfig(),
    max_rounds: int = DEFAULT_ROUNDS,
    budget: int = DEFAULT_BUDGET,
    allowed=ALL_EDITS,
) -> OuterResult:
    """Alternate inner solving, feasibility assessment and court edits."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    goal_id = select_endpoint(court, goal)
    cur = court
    mods = []
    rounds = []
    for r in range(1, max_rounds + 1):
        inner = run_inner(cur, goal_id, cfg, budget)
        verdict = assess_feasibility(cur, goal_id, inner, cfg)
        if inner.solved or r == max_rounds:
            rounds.append(Round(r, inner, verdict))
            break
        try:
            (instrs, _), = propose_modifications(cur, goal_id, verdict, 1, cfg, allowed, inner, budget)
        except NoRemedy as exc:
            rounds.append(Round(r, inner, verdict))
            raise NoRemedy(str(exc), verdict) from None
        rounds.append(Round(r, inner, verdict, tuple(instrs)))
        for i in instrs:
            cur = apply_modification(cur, i)
        mods.extend(instrs)
    return OuterResult(verdict, tuple(mods), cur, inner, tuple(rounds))


# ---------------------------------------------------------------------------
# evolution

_CONFOUND_KINDS = (K.StraightWall, K.DiskEndpoint, K.Volcano, K.CampArch)
_PASSABLE_KINDS = (K.BridgeTunnel, K.CampArch, K.Ramp)
FAMILIES = ("confounding", "passable", "endpoint", "mirror")


def _route_still_clear(court: Court, route) -> bool:
    pts = [k.position for k, _ in route.waypoints]
    owners = {k.owner for k, _ in route.waypoints}
    for (a, _), (b, _) in zip(route.waypoints, route.waypoints[1:]):
        if a.role == "entry" and b.role == "exit" and a.owner == b.owner:
            continue
        if not leg_clear(court, a.position, b.position, exclude=owners):
            return False
    return len(pts) >= 2


def _solved_route(solved: InnerResult):
    last = solved.attempts[-1]
    return last.route


def _try_confounding(court, goal, route, rng, cfg):
    kind = _CONFOUND_KINDS[int(rng.integers(len(_CONFOUND_KINDS)))]
    pos = Vec2(round(float(rng.uniform(0.2, court.length - 0.2)), 3), round(float(rng.uniform(0.2, court.width - 0.2)), 3))
    h = round(float(rng.uniform(-180.0, 180.0)), 1)
    instr = ModificationInstruction(
        "add", obstacle=_fresh_id(court, "decoy"), kind=kind, position=pos, heading_deg=h,
        params=tuple(sorted(DEFAULT_PARAMS[kind].items())),
    )
    new = apply_modification(court, instr)
    if not _route_still_clear(new, route):
        return None
    # every leg of the solved route stays at least a ball-width from the new footprint
    o = new.get(instr.obstacle)
    for (a, _), (b, _) in zip(route.waypoints, route.waypoints[1:]):
        reach = o.radius if o.is_disk else 0.5 * math.hypot(o.params["length"], o.params["width"])
        if point_segment_distance(o.center, a.position, b.position) < reach + 0.05:
            return None
    return new


def _try_passable(court, goal, route, rng, cfg):
    legs = []
    for (a, h), (b, _) in zip(route.waypoints, route.waypoints[1:]):
        if a.role == "entry" and b.role == "exit":
            continue
        legs.append((a.position, b.position, h))
    a, b, h = legs[int(rng.integers(len(legs)))]
    kind = _PASSABLE_KINDS[int(rng.integers(len(_PASSABLE_KINDS)))]
    L = dist(a, b)
    half = 0.5 * DEFAULT_PARAMS[kind]["length"]
    if L < 2 * half + 0.4:
        return None
    f = float(rng.uniform(0.2 + half, L - 0.2 - half)) / L
    u = unit(h)
    # stay on the leg's own ray so the exit lines up with the next keypoint
    pos = Vec2(round(a.x + u.x * f * L, 6), round(a.y + u.y * f * L, 6))
    instr = ModificationInstruction(
        "add", obstacle=_fresh_id(court, kind.value.lower()), kind=kind, position=pos, heading_deg=round(h, 6),
        params=tuple(sorted(DEFAULT_PARAMS[kind].items())),
    )
    new = apply_modification(court, instr)
    through = [r for r in _all_routes(new, goal) if instr.obstacle in r.through]
    if not any(required_speed(r, new, cfg) <= cfg.s_max and launch_window(r, new, cfg) for r in through):
        return None
    return new


def _try_endpoint(court, goal, route, rng, cfg):
    e = court.get(goal)
    if rng.random() < 0.3:
        kind = K.CupEndpoint if e.kind is K.DiskEndpoint else K.DiskEndpoint
        instr = ModificationInstruction("change", endpoint=goal, kind=kind)
    else:
        pos = Vec2(round(float(rng.uniform(0.3, court.length - 0.3)), 3), round(float(rng.uniform(0.3, court.width - 0.3)), 3))
        instr = ModificationInstruction("change", endpoint=goal, position=pos)
    return apply_modification(court, instr)


def _try_mirror(court, goal, route, rng, cfg):
    m = mirror_court(court)
    # a court symmetric about its long axis mirrors onto itself
    if m.obstacles == court.obstacles and m.start == court.start and m.free_balls == court.free_balls:
        return None
    return m


_TRY = {"confounding": _try_confounding, "passable": _try_passable, "endpoint": _try_endpoint, "mirror": _try_mirror}


def evolve_court(court: Court, solved: InnerResult, seed: int = 0, n: int = 4, cfg: SimConfig = SimConfig(), tries: int = 40) -> list:
    """Up to ``n`` statically feasible variants of a solved court.

    Families are cycled in a fixed order; a family that yields nothing in
    ``tries`` draws is skipped.  Deterministic in ``seed``.
    """
    if not solved.solved:
        raise ValueError("evolve_court needs a solved inner result")
    goal = solved.goal
    route = _solved_route(solved)
    rng = np.random.default_rng(seed)
    out = []
    dead = set()
    i = 0
    while len(out) < n and len(dead) < len(FAMILIES):
        fam = FAMILIES[i % len(FAMILIES)]
        i += 1
        if fam in dead:
            continue
        if fam == "mirror" and any(v.name.endswith("-mirror") for v in out):
            dead.add(fam)
            continue
        made = None
        for _ in range(tries):
            try:
                cand = _TRY[fam](court, goal, route, rng, cfg)
            except (GeometryError, UnknownId):
                cand = None
            if cand is not None and statically_feasible(cand, goal, cfg):
                made = cand
                break
        if made is None:
            dead.add(fam)
            continue
        out.append(replace(made, name=f"{court.name}-v{len(out) + 1}-{fam}"))
    return out
