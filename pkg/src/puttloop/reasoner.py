"""Rule-based kinodynamic reasoning.

Three steps mirror the reasoning prompts: estimate hitting parameters for
a route, diagnose an executed episode, and refine the action from that
diagnosis.  Speed is refined by bisection inside a bracket; angle by a
clamped proportional correction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Protocol

import numpy as np

from .court import Court
from .dynamics import Action, Episode, SimConfig
from .errors import BracketCollapsed
from .geometry import bearing, unit, wrap_deg
from .planner import Route, required_speed

SPEED_MARGIN = 1.05
ANGLE_GAIN = 0.8
ANGLE_STEP_MAX = 10.0
ANGLE_TOL_DEG = 3.0
# a free ball amplifies aim error by roughly distance / (2R); aim must be finer
FREE_BALL_ANGLE_TOL_DEG = 0.2
MIN_BRACKET = 0.01
NOMINAL_SPEED_AMOUNT = 0.1


class Reason(str, enum.Enum):
    insufficient_speed = "insufficient_speed"
    excessive_speed = "excessive_speed"
    incorrect_angle = "incorrect_angle"
    blocked = "blocked"
    none = "none"

    @property
    def text(self) -> str:
        return self.value.replace("_", " ")


@dataclass(frozen=True)
class HitParams:
    hitting_angle: float
    hitting_speed: float
    confidence_score: float

    def to_json(self) -> dict:
        return {
            "hitting_angle": self.hitting_angle,
            "hitting_speed": self.hitting_speed,
            "confidence_score": self.confidence_score,
        }

    @property
    def action(self) -> Action:
        return Action(self.hitting_speed, self.hitting_angle)


@dataclass(frozen=True)
class Suggestion:
    parameter: str  # "speed" | "angle"
    direction: str  # "increase" | "decrease"
    amount: float

    def to_json(self) -> dict:
        return {"parameter": f"hitting {self.parameter}", "direction": self.direction, "amount": self.amount}


@dataclass(frozen=True)
class Evaluation:
    endpoint_reached: bool
    deviation_reason: Reason
    modification_suggestion: Optional[Suggestion] = None
    # signed first-leg miss (executed minus intended), degrees
    miss_angle_deg: float = 0.0

    def __post_init__(self):
        if self.endpoint_reached and (self.deviation_reason is not Reason.none or self.modification_suggestion):
            raise ValueError("a reached endpoint carries no deviation")

    def to_json(self) -> dict:
        s = self.modification_suggestion
        return {
            "endpoint_reached": self.endpoint_reached,
            "deviation_reason": self.deviation_reason.text,
            "modification_suggestion": None if s is None else s.to_json(),
        }


@dataclass(frozen=True)
class ActionBracket:
    v_lo: float = 0.0
    v_hi: float = 1.0
    theta_deg: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.v_lo < self.v_hi <= 1.0):
            raise BracketCollapsed(f"invalid bracket [{self.v_lo}, {self.v_hi}]")

    @property
    def width(self) -> float:
        return self.v_hi - self.v_lo


class Refinement(NamedTuple):
    action: Optional[Action]
    bracket: ActionBracket
    amount: float
    replan: bool = False


# ---------------------------------------------------------------------------
# estimation


def estimate_params(route: Route, court: Court, cfg: SimConfig = SimConfig()) -> HitParams:
    s = required_speed(route, court, cfg)
    v = min(max(SPEED_MARGIN * s / cfg.s_max, 0.0), 1.0)
    conf = min(max(0.9 - 0.1 * len(route.gates), 0.1), 0.9)
    return HitParams(wrap_deg(route.first_heading), v, conf)


# ---------------------------------------------------------------------------
# evaluation


def _first_event_index(episode: Episode, ball: int = 0) -> int:
    """Sample index of the first interaction of ``ball`` after launch."""
    bid = episode.ball_ids[ball]
    for e in episode.events[1:]:
        if e.ball == bid or e.kind == "BallBallHit":
            return int(math.floor(e.t / episode.dt + 1e-9))
    return len(episode.samples) - 1


def first_leg_miss(episode: Episode, route: Route) -> float:
    """Signed angle at the start between the target keypoint and the
    closest approach of the straight opening segment."""
    start = episode.samples[0, 0]
    target = route.first_target.position
    k = max(_first_event_index(episode), 1)
    seg = episode.samples[: k + 1, 0, :]
    travel = np.hypot(*(seg[-1] - start))
    if travel < 1e-9:
        return wrap_deg(episode.action.theta_deg - route.first_heading)
    d = np.hypot(seg[:, 0] - target[0], seg[:, 1] - target[1])
    c = seg[int(np.argmin(d))]
    if np.hypot(*(c - start)) < 1e-9:
        c = seg[-1]
    return wrap_deg(bearing(start, c) - bearing(start, target))


def _final_leg(route: Route, court: Court):
    kp, h = route.waypoints[-2]
    g = court.get(route.goal)
    u = unit(h)
    L = (g.center.x - kp.position.x) * u.x + (g.center.y - kp.position.y) * u.y
    return kp.position, u, L, g.radius


def _traversed(episode: Episode, oid: str) -> Optional[float]:
    for e in episode.events:
        if e.obstacle == oid and e.kind in ("TraversedObstacle", "Redirected", "BallBallHit"):
            return e.t
    return None


def evaluate(episode: Episode, route: Route, goal: str, court: Court) -> Evaluation:
    """Diagnose an episode against its route (priority order is fixed)."""
    term = episode.terminal
    if term.kind == "Captured" and term.obstacle == goal:
        return Evaluation(True, Reason.none)
    miss = first_leg_miss(episode, route)

    def speed(direction, reason):
        return Evaluation(False, reason, Suggestion("speed", direction, NOMINAL_SPEED_AMOUNT), miss)

    gates = set(route.gates)
    if any(e.kind == "RolledBack" and e.obstacle in gates for e in episode.events):
        return speed("increase", Reason.insufficient_speed)

    times = [_traversed(episode, oid) for oid in route.through]
    all_through = all(t is not None for t in times)
    p0, u, L, r = _final_leg(route, court)
    t_last = max([t for t in times if t is not None], default=0.0)
    k0 = int(math.floor(t_last / episode.dt + 1e-9))
    track = episode.samples[k0:, episode.scoring_ball, :]
    progress = float(np.max((track[:, 0] - p0.x) * u.x + (track[:, 1] - p0.y) * u.y))
    if all_through and progress > L + r:
        return speed("decrease", Reason.excessive_speed)

    free_first = bool(route.gates) and route.gates[0] in {b.id for b in court.free_balls}
    tol = FREE_BALL_ANGLE_TOL_DEG if free_first else ANGLE_TOL_DEG
    if abs(miss) > tol:
        step = min(ANGLE_GAIN * abs(miss), ANGLE_STEP_MAX)
        return Evaluation(
            False, Reason.incorrect_angle, Suggestion("angle", "decrease" if miss > 0 else "increase", step), miss
        )

    if term.kind == "Captured" or term.kind == "Timeout":
        return Evaluation(False, Reason.blocked, None, miss)
    if not all_through:
        if any(e.kind == "WallBounce" for e in episode.events):
            return Evaluation(False, Reason.blocked, None, miss)
        return speed("increase", Reason.insufficient_speed)
    if progress < L:
        return speed("increase", Reason.insufficient_speed)
    return speed("decrease", Reason.excessive_speed)


# ---------------------------------------------------------------------------
# refinement


def refine(bracket: ActionBracket, evaluation: Evaluation, last: Action) -> Refinement:
    """Next action from a failed evaluation.

    Raises
    ------
    BracketCollapsed
        When a speed refinement would leave a bracket narrower than the
        resolution (or empty).
    """
    if evaluation.endpoint_reached:
        raise ValueError("refine needs a failed evaluation")
    reason = evaluation.deviation_reason
    if reason is Reason.blocked:
        return Refinement(None, bracket, 0.0, True)
    if reason is Reason.incorrect_angle:
        step = -ANGLE_GAIN * evaluation.miss_angle_deg
        step = max(-ANGLE_STEP_MAX, min(ANGLE_STEP_MAX, step))
        theta = wrap_deg(last.theta_deg + step)
        return Refinement(Action(last.v, theta), replace(bracket, theta_deg=theta), abs(step))
    lo, hi = bracket.v_lo, bracket.v_hi
    if reason is Reason.insufficient_speed:
        lo = max(lo, last.v)
    else:
        hi = min(hi, last.v)
    if lo >= hi or hi - lo < MIN_BRACKET:
        raise BracketCollapsed(f"speed bracket [{lo:.4f}, {hi:.4f}] collapsed at v={last.v:.4f}")
    # keep the intended angle: executed angle noise is not an aim error
    nb = ActionBracket(lo, hi, bracket.theta_deg)
    v = 0.5 * (lo + hi)
    return Refinement(Action(v, bracket.theta_deg), nb, abs(v - last.v))


def applied(evaluation: Evaluation, ref: Refinement) -> Evaluation:
    """Evaluation with the suggestion amount set to the delta actually applied."""
    s = evaluation.modification_suggestion
    if s is None or ref.action is None:
        return evaluation
    return replace(evaluation, modification_suggestion=replace(s, amount=ref.amount))


# ---------------------------------------------------------------------------
# message boundary


class ReasonerInterface(Protocol):
    """Payload-level contract a model-backed reasoner could implement."""

    def estimate(self, route_json: dict) -> dict: ...

    def evaluate(self, episode_jsonl: str, route_json: dict) -> dict: ...

    def refine(self, evaluation_json: dict, last_params_json: dict) -> dict: ...


class RuleReasoner:
    """The shipped reasoner; wraps the functions above for one court."""

    def __init__(self, court: Court, cfg: SimConfig = SimConfig()):
        self.court = court
        self.cfg = cfg

    def estimate(self, route: Route) -> HitParams:
        return estimate_params(route, self.court, self.cfg)

    def evaluate(self, episode: Episode, route: Route) -> Evaluation:
        return evaluate(episode, route, route.goal, self.court)

    def refine(self, bracket: ActionBracket, evaluation: Evaluation, last: Action) -> Refinement:
        return refine(bracket, evaluation, last)
