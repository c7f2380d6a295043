"""Byte-level golden files for the five exchange payloads.

Set ``PUTTLOOP_REGEN_GOLDEN=1`` to rewrite the files after an intended
format change.
"""
import json
import math
import os

import pytest

from puttloop import jsonio
from puttloop.court import ModificationInstruction, ObstacleKind, modification_payload
from puttloop.dynamics import Action, SimConfig, simulate
from puttloop.innerloop import run_inner
from puttloop.outerloop import assess_feasibility, run_outer
from puttloop.planner import plan
from puttloop.reasoner import estimate_params, evaluate
from puttloop.geometry import Vec2

from conftest import GOLDEN

CFG = SimConfig()
REGEN = os.environ.get("PUTTLOOP_REGEN_GOLDEN") == "1"

# exact key sets shown in the reasoning prompts
KEYS = {
    "route": {"route", "stroke_count", "total_distance"},
    "hitting_parameters": {"hitting_angle", "hitting_speed", "confidence_score"},
    "evaluation": {"endpoint_reached", "deviation_reason", "modification_suggestion"},
    "feasibility": {"feasibility", "reason"},
    "modification": {"modification_instructions"},
}


def payloads(bundled):
    c = bundled["c03_two_pathways"][0]
    routes = plan(c, "hole", 2)
    hp = estimate_params(routes[0], c, CFG)
    simple = bundled["s01_empty"][0]
    (r,) = plan(simple, "hole", 1)
    v = math.sqrt(2 * 0.45 * (1.0 + 0.4)) / CFG.s_max
    ev_fail = evaluate(simulate(simple, Action(v, 0.0), CFG), r, "hole", simple)
    ev_ok = run_inner(simple, "hole", CFG).attempts[-1].evaluation
    coaster = bundled["coaster"][0]
    inner = run_inner(coaster, "hole", CFG)
    feas = [assess_feasibility(coaster, "hole", inner, CFG), assess_feasibility(simple, "hole", run_inner(simple, "hole", CFG), CFG)]
    mods = list(run_outer(coaster, "hole", CFG).modifications) + [
        ModificationInstruction("remove", obstacle="west"),
        ModificationInstruction("change", endpoint="hole", kind=ObstacleKind.CupEndpoint),
        ModificationInstruction("change", endpoint="hole", position=Vec2(1.5, 0.75)),
    ]
    return {
        "route": [x.to_json() for x in routes],
        "hitting_parameters": [hp.to_json()],
        "evaluation": [ev_fail.to_json(), ev_ok.to_json()],
        "feasibility": [f.to_json() for f in feas],
        "modification": [modification_payload(mods)],
    }


@pytest.fixture(scope="module")
def generated(bundled):
    return payloads(bundled)


@pytest.mark.parametrize("name", sorted(KEYS))
def test_golden_bytes(generated, name):
    text = jsonio.dumps_lines(generated[name])
    path = GOLDEN / f"{name}.jsonl"
    if REGEN:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    assert path.read_text() == text


@pytest.mark.parametrize("name", sorted(KEYS))
def test_field_names(generated, name):
    for payload in generated[name]:
        assert set(payload) == KEYS[name]


def test_nested_fields(generated):
    for p in generated["route"]:
        assert all(set(w) == {"keypoint", "angle"} for w in p["route"])
    fail, ok = generated["evaluation"]
    assert set(fail["modification_suggestion"]) == {"parameter", "direction", "amount"}
    assert fail["modification_suggestion"]["parameter"] == "hitting speed"
    assert fail["deviation_reason"] == "excessive speed"
    assert ok == {"endpoint_reached": True, "deviation_reason": "none", "modification_suggestion": None}
    assert generated["feasibility"][0]["reason"].startswith("exceeds speed limit")


def test_modifications_parse_back(generated):
    for d in generated["modification"][0]["modification_instructions"]:
        i = ModificationInstruction.from_json(json.loads(json.dumps(d)))
        assert i.to_json() == d
