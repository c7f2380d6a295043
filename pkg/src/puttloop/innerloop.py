"""Inner action-refinement loop: plan, execute, evaluate, refine."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import jsonio
from .court import Court, select_endpoint
from .dynamics import Action, Episode, SimConfig, simulate
from .errors import BracketCollapsed, NoRoute
from .planner import Route, plan
from .reasoner import (
    MIN_BRACKET,
    ActionBracket,
    Evaluation,
    HitParams,
    applied,
    estimate_params,
    evaluate,
    refine,
)

DEFAULT_BUDGET = 12
DEFAULT_ROUTES = 3
BLOCKED_SWITCH = 2
NO_PROGRESS_TOL = 1e-3

Executor = Callable[[Action], Episode]


@dataclass(frozen=True)
class Escalation:
    kind: str  # MaxSpeedRollback | NoRoute | BracketCollapsed
    obstacle: Optional[str] = None

    def __str__(self):
        return f"{self.kind}({self.obstacle})" if self.obstacle else self.kind


@dataclass(frozen=True)
class AttemptRecord:
    index: int
    action: Action
    params: HitParams
    episode: Episode
    evaluation: Evaluation
    route_id: int
    route: Route

    @property
    def episode_ref(self) -> str:
        return f"attempt-{self.index}"

    def to_json(self) -> dict:
        t = self.episode.terminal
        return {
            "index": self.index,
            "route_id": self.route_id,
            "route": self.route.to_json(),
            "hitting_parameters": self.params.to_json(),
            "action": self.action.to_json(),
            "executed_action": self.episode.action.to_json(),
            "evaluation": self.evaluation.to_json(),
            "terminal": t.to_json(),
            "episode_ref": self.episode_ref,
        }


@dataclass(frozen=True)
class InnerResult:
    status: str  # Solved | BudgetExhausted | Escalate
    attempts: tuple
    solved_action: Optional[Action] = None
    escalation: Optional[Escalation] = None
    routes: tuple = ()
    goal: str = ""

    @property
    def solved(self) -> bool:
        return self.status == "Solved"

    @property
    def label(self) -> str:
        return f"Escalate({self.escalation})" if self.escalation else self.status

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "escalation": None if self.escalation is None else str(self.escalation),
            "solved_action": None if self.solved_action is None else self.solved_action.to_json(),
            "attempts": len(self.attempts),
            "goal": self.goal,
        }


def attempt_log(result: InnerResult) -> str:
    """JSON-lines attempt log, one record per attempt."""
    return jsonio.dumps_lines(a.to_json() for a in result.attempts)


class _RouteCursor:
    """Route order with one wrap-around; skips routes that failed for good."""

    def __init__(self, n: int):
        self.n = n
        self.i = 0
        self.wrapped = False
        self.dead = set()

    def advance(self) -> Optional[int]:
        while True:
            self.i += 1
            if self.i >= self.n:
                if self.wrapped:
                    return None
                self.wrapped = True
                self.i = 0
            if self.i not in self.dead:
                return self.i
            if len(self.dead) >= self.n:
                return None


def run_inner(
    court: Court,
    goal,
    cfg: SimConfig = SimConfig(),
    budget: int = DEFAULT_BUDGET,
    executor: Optional[Executor] = None,
    k_routes: int = DEFAULT_ROUTES,
) -> InnerResult:
    """Refine actions until the goal captures the ball or the loop gives up.

    ``executor`` maps an action to an episode; it defaults to the simulator
    on ``court``.  Routes are tried in planner order and advanced on blocked
    or stalled attempts.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    goal_id = select_endpoint(court, goal)
    if executor is None:
        executor = lambda a: simulate(court, a, cfg)  # noqa: E731
    try:
        routes = tuple(plan(court, goal_id, k_routes))
    except NoRoute:
        return InnerResult("Escalate", (), escalation=Escalation("NoRoute"), goal=goal_id)

    cursor = _RouteCursor(len(routes))
    rollback: dict = {}
    collapsed = set()
    attempts = []

    def fresh(ri):
        hp = estimate_params(routes[ri], court, cfg)
        return hp, hp.action, ActionBracket(0.0, 1.0, hp.hitting_angle)

    ri = 0
    params, action, bracket = fresh(ri)
    blocked_run = 0
    prev = None
    while len(attempts) < budget:
        route = routes[ri]
        ep = executor(action)
        ev = evaluate(ep, route, goal_id, court)
        if ev.endpoint_reached:
            attempts.append(AttemptRecord(len(attempts) + 1, action, params, ep, ev, ri, route))
            return InnerResult("Solved", tuple(attempts), action, routes=routes, goal=goal_id)
        term = ep.terminal.position
        stalled = (
            prev is not None
            and prev[0] == ri
            and prev[1] is ev.deviation_reason
            and math.hypot(term.x - prev[2].x, term.y - prev[2].y) < NO_PROGRESS_TOL
        )
        prev = (ri, ev.deviation_reason, term)
        switch = False
        try:
            ref = refine(bracket, ev, ep.action)
        except BracketCollapsed:
            attempts.append(AttemptRecord(len(attempts) + 1, action, params, ep, ev, ri, route))
            rb = [e.obstacle for e in ep.events if e.kind == "RolledBack" and e.obstacle in route.gates]
            if rb and ep.action.v >= 1.0 - MIN_BRACKET and bracket.v_hi >= 1.0:
                rollback[ri] = rb[0]
            else:
                collapsed.add(ri)
            cursor.dead.add(ri)
            switch = True
        else:
            attempts.append(AttemptRecord(len(attempts) + 1, action, params, ep, applied(ev, ref), ri, route))
            if ref.replan or stalled:
                blocked_run += 1
                # a deterministic executor repeats itself; do not spend an attempt proving it
                if blocked_run >= BLOCKED_SWITCH or ref.action is None or ref.action == action:
                    switch = True
                else:
                    action, bracket = ref.action, ref.bracket
            else:
                blocked_run = 0
                action, bracket = ref.action, ref.bracket
                params = HitParams(action.theta_deg, action.v, params.confidence_score)
        if switch:
            blocked_run = 0
            prev = None
            nxt = cursor.advance()
            if nxt is None:
                break
            ri = nxt
            params, action, bracket = fresh(ri)
    return _give_up(tuple(attempts), routes, rollback, collapsed, goal_id)


def _give_up(attempts, routes, rollback, collapsed, goal_id) -> InnerResult:
    if rollback and len(rollback) + len(collapsed) == len(routes):
        esc = Escalation("MaxSpeedRollback", rollback[min(rollback)])
        return InnerResult("Escalate", attempts, escalation=esc, routes=routes, goal=goal_id)
    if collapsed and len(collapsed) == len(routes):
        return InnerResult("Escalate", attempts, escalation=Escalation("BracketCollapsed"), routes=routes, goal=goal_id)
    return InnerResult("BudgetExhausted", attempts, routes=routes, goal=goal_id)
