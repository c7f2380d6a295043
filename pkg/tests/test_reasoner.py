import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from puttloop.court import DEFAULT_PARAMS, Obstacle, ObstacleKind, Pose
from puttloop.dynamics import Action, SimConfig, simulate
from puttloop.errors import BracketCollapsed
from puttloop.planner import plan, required_speed
from puttloop.reasoner import (
    ANGLE_STEP_MAX,
    MIN_BRACKET,
    SPEED_MARGIN,
    ActionBracket,
    Evaluation,
    Reason,
    RuleReasoner,
    Suggestion,
    applied,
    estimate_params,
    evaluate,
    first_leg_miss,
    refine,
)

from helpers import disk_court

K = ObstacleKind
CFG = SimConfig()


def setup(x=2.05, y=1.0, extra=()):
    c = disk_court(x, y, start=(0.3, 1.0), extra=extra)
    (r,) = plan(c, "hole", 1)
    return c, r


def run(c, r, v, theta=None):
    ep = simulate(c, Action(v, r.first_heading if theta is None else theta), CFG)
    return ep, evaluate(ep, r, "hole", c)


class TestEstimate:
    def test_margin_and_heading(self):
        c, r = setup()
        hp = estimate_params(r, c, CFG)
        assert hp.hitting_speed == pytest.approx(SPEED_MARGIN * math.sqrt(1.71) / 2.5)
        assert hp.hitting_angle == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < hp.confidence_score <= 1.0

    def test_clamped_to_unit(self, bundled):
        c = bundled["coaster"][0]
        (r,) = plan(c, "hole", 1)
        assert estimate_params(r, c, CFG).hitting_speed == 1.0

    def test_json_keys(self):
        c, r = setup()
        assert set(estimate_params(r, c, CFG).to_json()) == {"hitting_angle", "hitting_speed", "confidence_score"}


class TestEvaluate:
    def test_captured(self):
        c, r = setup()
        s = required_speed(r, c, CFG)
        ep, ev = run(c, r, s / CFG.s_max)
        assert ev.endpoint_reached and ev.deviation_reason is Reason.none
        assert ev.to_json()["modification_suggestion"] is None

    def test_rest_past_goal_is_excessive(self):
        # rest 0.4 m past the goal centre: well beyond the rim
        c, r = setup()
        v = math.sqrt(2 * 0.45 * (1.75 + 0.4)) / CFG.s_max
        ep, ev = run(c, r, v)
        assert ev.deviation_reason is Reason.excessive_speed
        assert ev.modification_suggestion == Suggestion("speed", "decrease", 0.1)
        assert ev.to_json()["deviation_reason"] == "excessive speed"

    def test_short_is_insufficient(self):
        c, r = setup()
        v = math.sqrt(2 * 0.45 * 1.0) / CFG.s_max
        ev = run(c, r, v)[1]
        assert ev.deviation_reason is Reason.insufficient_speed
        assert ev.modification_suggestion.direction == "increase"

    @pytest.mark.parametrize("off", [6.0, -6.0, 15.0])
    def test_wrong_angle(self, off):
        c, r = setup()
        s = required_speed(r, c, CFG)
        ep, ev = run(c, r, s / CFG.s_max, off)
        assert ev.deviation_reason is Reason.incorrect_angle
        assert ev.miss_angle_deg == pytest.approx(off, abs=1e-6)
        sug = ev.modification_suggestion
        assert sug.parameter == "angle"
        assert sug.direction == ("decrease" if off > 0 else "increase")
        assert sug.amount == pytest.approx(min(0.8 * abs(off), ANGLE_STEP_MAX))

    def test_ramp_rollback_is_insufficient(self):
        ramp = Obstacle("ramp", K.Ramp, Pose((1.2, 1.0), 0.0), dict(DEFAULT_PARAMS[K.Ramp]))
        c, r = setup(2.2, 1.0, extra=(ramp,))
        ep, ev = run(c, r, 1.05 / CFG.s_max)
        assert any(e.kind == "RolledBack" for e in ep.events)
        assert ev.deviation_reason is Reason.insufficient_speed

    def test_reached_carries_no_deviation(self):
        with pytest.raises(ValueError):
            Evaluation(True, Reason.excessive_speed)


class TestRefine:
    def test_speed_bisection(self):
        ev = Evaluation(False, Reason.excessive_speed, Suggestion("speed", "decrease", 0.1))
        ref = refine(ActionBracket(0.0, 1.0, 5.0), ev, Action(0.8, 7.0))
        assert ref.bracket == ActionBracket(0.0, 0.8, 5.0)
        assert ref.action == Action(0.4, 5.0)
        assert ref.amount == pytest.approx(0.4)
        assert applied(ev, ref).modification_suggestion.amount == pytest.approx(0.4)

    def test_blocked_asks_for_replan(self):
        ref = refine(ActionBracket(), Evaluation(False, Reason.blocked), Action(0.5, 0.0))
        assert ref.replan and ref.action is None

    def test_collapse(self):
        ev = Evaluation(False, Reason.insufficient_speed, Suggestion("speed", "increase", 0.1))
        with pytest.raises(BracketCollapsed):
            refine(ActionBracket(0.5, 0.505), ev, Action(0.5, 0.0))
        with pytest.raises(BracketCollapsed):
            refine(ActionBracket(0.0, 1.0), ev, Action(1.0, 0.0))

    def test_success_not_refinable(self):
        with pytest.raises(ValueError):
            refine(ActionBracket(), Evaluation(True, Reason.none), Action(0.5, 0.0))

    @given(st.lists(st.booleans(), min_size=1, max_size=6), st.floats(0.0, 0.45), st.floats(0.55, 1.0))
    def test_width_halves(self, ups, lo, hi):
        b = ActionBracket(lo, hi, 0.0)
        w0 = b.width
        v = 0.5 * (lo + hi)
        for n, up in enumerate(ups, 1):
            reason = Reason.insufficient_speed if up else Reason.excessive_speed
            ev = Evaluation(False, reason, Suggestion("speed", "increase" if up else "decrease", 0.1))
            try:
                ref = refine(b, ev, Action(v, 0.0))
            except BracketCollapsed:
                assert w0 / 2 ** n < MIN_BRACKET + 1e-12
                return
            b, v = ref.bracket, ref.action.v
            assert b.width <= w0 / 2 ** n + 1e-12
            assert b.v_lo <= v <= b.v_hi


def affine_court_angle_steps(c, r, theta0, steps=6):
    """Iterate the angle correction against real simulations; return |miss| per step."""
    b = ActionBracket(0.0, 1.0, theta0)
    act = Action(0.5, theta0)
    misses = []
    for _ in range(steps + 1):
        ep = simulate(c, act, CFG)
        miss = first_leg_miss(ep, r)
        misses.append(abs(miss))
        ev = Evaluation(False, Reason.incorrect_angle, Suggestion("angle", "increase", 1.0), miss)
        ref = refine(b, ev, act)
        b, act = ref.bracket, ref.action
    return misses


@given(st.floats(-30.0, 30.0), st.sampled_from([(2.05, 1.0), (1.3, 1.35), (1.8, 0.5)]))
def test_angle_contraction(off, goal):
    c, r = setup(*goal)
    misses = affine_court_angle_steps(c, r, r.first_heading + off)
    assert misses[0] == pytest.approx(abs(off), abs=1e-6)
    assert misses[6] < 0.5
    assert all(b <= a + 1e-9 for a, b in zip(misses, misses[1:]))


@given(st.floats(-30.0, 30.0), st.floats(0.7, 1.5))
def test_angle_contraction_synthetic(e0, gain):
    """Affine response miss = a * (theta - theta*) with a around one."""
    theta, b = e0, ActionBracket()
    for _ in range(6):
        miss = gain * theta
        ev = Evaluation(False, Reason.incorrect_angle, Suggestion("angle", "increase", 1.0), miss)
        ref = refine(b, ev, Action(0.5, theta))
        theta, b = ref.action.theta_deg, ref.bracket
    assert abs(gain * theta) < 0.5


def test_rule_reasoner_wraps_functions():
    c, r = setup()
    rr = RuleReasoner(c, CFG)
    assert rr.estimate(r) == estimate_params(r, c, CFG)
    ep = simulate(c, rr.estimate(r).action, CFG)
    assert rr.evaluate(ep, r) == evaluate(ep, r, "hole", c)
