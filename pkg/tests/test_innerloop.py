import json

import pytest

from puttloop.dynamics import SimConfig, simulate
from puttloop.innerloop import InnerResult, attempt_log, run_inner
from puttloop.reasoner import Reason

from helpers import disk_court, empty_court

CFG = SimConfig()
TIER_BUDGET = {"simple": 5, "medium": 8, "complex": 12}


def test_empty_court_few_attempts():
    res = run_inner(empty_court(), "disk", CFG)
    assert res.solved and len(res.attempts) <= 3
    assert res.solved_action == res.attempts[-1].action
    assert res.attempts[-1].evaluation.endpoint_reached


@pytest.mark.parametrize("tier", ["simple", "medium", "complex"])
def test_corpus_tier_solved_within_budget(bundled, tier):
    for name, (c, t, goal) in bundled.items():
        if t != tier:
            continue
        res = run_inner(c, goal, CFG, budget=TIER_BUDGET[tier])
        assert res.solved, (name, res.label)


def test_budget_exhausted():
    c = disk_court(2.7, 1.0)
    full = run_inner(c, "disk", CFG)
    assert len(full.attempts) > 1
    res = run_inner(c, "disk", CFG, budget=1)
    assert res.status == "BudgetExhausted" and len(res.attempts) == 1
    with pytest.raises(ValueError):
        run_inner(c, "disk", CFG, budget=0)


def test_escalations(bundled):
    r = run_inner(bundled["coaster"][0], "disk", CFG)
    assert r.label == "Escalate(MaxSpeedRollback(coaster))"
    r = run_inner(bundled["overshoot"][0], "disk", CFG)
    assert r.label == "Escalate(BracketCollapsed)"
    r = run_inner(bundled["boxed"][0], "disk", CFG)
    assert r.label == "Escalate(NoRoute)" and r.attempts == ()


def test_speed_attempts_follow_bisection(bundled):
    for name, (c, tier, goal) in bundled.items():
        if tier == "scenario":
            continue
        res = run_inner(c, goal, CFG)
        lo, hi = 0.0, 1.0
        for a, b in zip(res.attempts, res.attempts[1:]):
            if a.route_id != b.route_id:
                lo, hi = 0.0, 1.0
                continue
            reason = a.evaluation.deviation_reason
            if reason is Reason.insufficient_speed:
                lo = max(lo, a.episode.action.v)
            elif reason is Reason.excessive_speed:
                hi = min(hi, a.episode.action.v)
            else:
                continue
            assert b.action.v == pytest.approx(0.5 * (lo + hi)), name
            assert a.evaluation.modification_suggestion.amount == pytest.approx(abs(b.action.v - a.episode.action.v))


def test_alternative_routes_kept(bundled):
    res = run_inner(bundled["c03_two_pathways"][0], "disk", CFG)
    assert res.solved
    assert len({r.through for r in res.routes}) >= 2
    assert all(a.route == res.routes[a.route_id] for a in res.attempts)


def test_custom_executor_and_determinism(bundled):
    c = bundled["m05_volcano"][0]
    calls = []

    def ex(a):
        calls.append(a)
        return simulate(c, a, CFG)

    res = run_inner(c, "disk", CFG, executor=ex)
    assert len(calls) == len(res.attempts)
    again = run_inner(c, "disk", CFG)
    assert attempt_log(res) == attempt_log(again)


def test_attempt_log_lines(bundled):
    res = run_inner(bundled["billiard"][0], "disk", CFG)
    lines = attempt_log(res).splitlines()
    assert len(lines) == len(res.attempts)
    recs = [json.loads(x) for x in lines]
    assert [r["index"] for r in recs] == list(range(1, len(recs) + 1))
    assert recs[-1]["evaluation"]["endpoint_reached"] is True
    assert recs[-1]["terminal"]["kind"] == "Captured"


def test_result_json(bundled):
    res = run_inner(bundled["s01_empty"][0], "disk", CFG)
    d = res.to_json()
    assert d["status"] == "Solved" and d["escalation"] is None and d["goal"] == "hole"
    assert isinstance(res, InnerResult)


def test_replay_soundness(bundled):
    from puttloop.offline import ProjectionExecutor, generate_dataset

    for name, (c, tier, goal) in bundled.items():
        if tier == "scenario":
            continue
        res = run_inner(c, goal, CFG)
        ep = simulate(c, res.solved_action, CFG)
        assert (ep.terminal.kind, ep.terminal.obstacle) == ("Captured", res.goal), name
        ex = ProjectionExecutor(generate_dataset(c, res.solved_action, n=20, seed=7, cfg=CFG))
        off = run_inner(c, goal, CFG, executor=ex)
        if off.solved:
            t = ex(off.solved_action).terminal
            assert (t.kind, t.obstacle) == ("Captured", off.goal), name
