import math

import pytest
import shapely.geometry as sg
from hypothesis import given
from hypothesis import strategies as st

from puttloop.court import BALL_RADIUS, DEFAULT_PARAMS, Court, Obstacle, ObstacleKind, Pose, validate_court
from puttloop.dynamics import Action, SimConfig, simulate
from puttloop.errors import GeometryError, NoRoute
from puttloop.geometry import Vec2
from puttloop.planner import (
    GATE_SURCHARGE,
    Keypoint,
    Route,
    build_graph,
    edge_cost,
    find_routes,
    launch_window,
    leg_clear,
    plan,
    required_speed,
)

from helpers import disk_court, empty_court

K = ObstacleKind
CFG = SimConfig()


def ob(oid, kind, x, y, h=0.0):
    return Obstacle(oid, kind, Pose((x, y), h), dict(DEFAULT_PARAMS[kind]))


def shapely_clear(court, a, b, exclude=()):
    """Independent line-of-sight oracle on shapely geometry."""
    line = sg.LineString([a, b])
    L = line.length
    if L <= 2e-6:
        return True
    line = sg.LineString([line.interpolate(1e-6), line.interpolate(L - 1e-6)])
    for o in court.obstacles:
        if o.id in exclude or o.kind.capturing:
            continue
        shape = sg.Point(o.center).buffer(o.radius, 256) if o.is_disk else sg.Polygon(o.polygon)
        if line.intersects(shape):
            return False
    for bl in court.free_balls:
        if bl.id not in exclude and line.distance(sg.Point(bl.position)) <= 2 * BALL_RADIUS:
            return False
    return True


class TestGraph:
    def test_empty_court(self):
        g = build_graph(empty_court(), "hole")
        assert set(g.nodes) == {"start", "hole"}
        assert len(g.edges) == 1 and g.edges[0].clear

    def test_ramp_blocks_direct_sight(self):
        c = disk_court(2.2, 1.0, start=(0.3, 1.0), extra=(ob("ramp", K.Ramp, 1.2, 1.0),))
        g = build_graph(c, "hole")
        pairs = {(e.src, e.dst) for e in g.edges}
        assert ("start", "hole") not in pairs
        assert ("start", "ramp:entry") in pairs and ("ramp:exit", "hole") in pairs
        assert not shapely_clear(c, c.start, c.get("hole").center)
        assert g.nodes["ramp:entry"].position == c.get("ramp").entry_port
        assert g.nodes["ramp:exit"].position == c.get("ramp").exit_port

    def test_tunnel_route_under_ramp(self, bundled):
        c = bundled["c06_tunnel_under_ramp"][0]
        g = build_graph(c, "hole")
        assert {"tunnel:entry", "tunnel:exit"} <= set(g.nodes)
        routes = plan(c, "hole", 3)
        assert any("tunnel" in r.through for r in routes)

    def test_two_pathways(self, bundled):
        routes = plan(bundled["c03_two_pathways"][0], "hole", 2)
        assert len(routes) == 2
        assert set(routes[0].through) != set(routes[1].through)
        assert all(r.through for r in routes)

    def test_boxed_goal(self, bundled):
        with pytest.raises(NoRoute):
            plan(bundled["boxed"][0], "hole")

    def test_billiard_route_through_ball(self, bundled):
        routes = plan(bundled["billiard"][0], "hole", 3)
        assert routes[0].gates == ("white",)


@st.composite
def courts_and_segments(draw):
    kinds = [K.StraightWall, K.Ramp, K.Volcano, K.BridgeTunnel, K.RollerCoaster, K.Curve]
    obs = [Obstacle("hole", K.DiskEndpoint, Pose((2.8, 0.2), 0.0), {})]
    for i in range(draw(st.integers(1, 4))):
        kind = draw(st.sampled_from(kinds))
        cand = ob(f"o{i}", kind, draw(st.floats(0.5, 2.5)), draw(st.floats(0.4, 1.6)), draw(st.floats(0, 359)))
        try:
            validate_court(Court(Vec2(0.1, 0.1), tuple(obs + [cand])))
            obs.append(cand)
        except GeometryError:
            pass
    c = validate_court(Court(Vec2(0.1, 0.1), tuple(obs)))
    pt = st.tuples(st.floats(0.0, 3.0), st.floats(0.0, 2.0))
    return c, draw(pt), draw(pt)


@given(courts_and_segments())
def test_leg_clear_matches_shapely(args):
    c, a, b = args
    assert leg_clear(c, a, b) == shapely_clear(c, a, b)


def brute_force_routes(graph):
    adj = {}
    for e in graph.edges:
        adj.setdefault(e.src, []).append(e)
    out = []

    def dfs(ids, cost):
        if ids[-1] == graph.goal:
            out.append((round(cost, 9), ids))
            return
        for e in adj.get(ids[-1], []):
            if e.dst not in ids:
                dfs(ids + (e.dst,), cost + edge_cost(graph, e))

    dfs(("start",), 0.0)
    return sorted(out)


def small_courts(bundled):
    for name, (c, _, goal) in bundled.items():
        if name == "boxed":
            continue
        g = build_graph(c, goal if goal in {o.id for o in c.obstacles} else _goal(c, goal))
        if len(g.nodes) <= 10:
            yield name, g


def _goal(c, q):
    from puttloop.court import select_endpoint

    return select_endpoint(c, q)


def test_find_routes_matches_brute_force(bundled):
    seen = 0
    for name, g in small_courts(bundled):
        brute = brute_force_routes(g)
        got = find_routes(g, k=10_000)
        assert [(round(r.cost, 9), r.ids) for r in got] == brute, name
        seen += 1
    assert seen >= 20


def test_routes_collision_free(bundled):
    for name, (c, tier, goal) in bundled.items():
        if name == "boxed":
            continue
        for r in plan(c, _goal(c, goal), 5):
            wps = r.waypoints
            for (a, h), (b, _) in zip(wps, wps[1:]):
                if a.role == "entry" and b.role == "exit":
                    continue
                end = b.position
                if a.role == "exit":
                    u = (math.cos(math.radians(h)), math.sin(math.radians(h)))
                    along = (end.x - a.position.x) * u[0] + (end.y - a.position.y) * u[1]
                    end = (a.position.x + u[0] * along, a.position.y + u[1] * along)
                ex = {a.owner, b.owner}
                assert shapely_clear(c, a.position, end, exclude=ex), (name, a.id, b.id)


def test_cost_includes_gate_surcharge():
    c = disk_court(2.2, 1.0, start=(0.3, 1.0), extra=(ob("ramp", K.Ramp, 1.2, 1.0),))
    (r,) = plan(c, "hole", 1)
    assert r.gates == ("ramp",)
    assert r.cost == pytest.approx(r.total_distance + GATE_SURCHARGE)


def test_routes_sorted_by_cost_then_ids(bundled):
    for name, (c, tier, goal) in bundled.items():
        if name == "boxed":
            continue
        keys = [(round(r.cost, 9), r.ids) for r in find_routes(build_graph(c, _goal(c, goal)), 50)]
        assert keys == sorted(keys), name


class TestRequiredSpeed:
    def test_straight_leg_to_disk(self):
        c = disk_court(2.05, 1.0, start=(0.3, 1.0))
        (r,) = plan(c, "hole", 1)
        assert r.total_distance == pytest.approx(1.75)
        assert required_speed(r, c, CFG) == pytest.approx(math.sqrt(1.71), abs=1e-12)

    def test_zero_length(self):
        c = disk_court(2.05, 1.0)
        g = c.get("hole")
        kps = (Keypoint("start", g.center, "start", "terminal"), Keypoint("hole", g.center, "hole", "terminal"))
        r = Route(((kps[0], 0.0), (kps[1], 0.0)), 0.0, (), (), "hole", 0.0)
        assert required_speed(r, c, CFG) == pytest.approx(math.sqrt(2 * 0.45 * 0.15))
        cup = disk_court(2.05, 1.0, kind=K.CupEndpoint)
        assert required_speed(r, cup, CFG) == pytest.approx(1.2)

    def test_coaster_needs_its_threshold(self, bundled):
        c = bundled["coaster"][0]
        (r,) = plan(c, "hole", 1)
        assert required_speed(r, c, CFG) >= 2.6
        assert launch_window(r, c, CFG) is None

    @given(st.floats(0.6, 2.6), st.floats(0.05, 1.0))
    def test_monotone_in_leg_length(self, x, extra):
        x2 = min(x + extra, 2.8)
        if x2 <= x:
            return
        s1 = required_speed(plan(disk_court(x, 1.0), "hole")[0], disk_court(x, 1.0), CFG)
        s2 = required_speed(plan(disk_court(x2, 1.0), "hole")[0], disk_court(x2, 1.0), CFG)
        assert s2 > s1

    @given(st.floats(0.7, 2.8), st.floats(0.3, 1.7))
    def test_exact_speed_rests_inside_disk(self, x, y):
        c = disk_court(x, y, start=(0.25, 1.0))
        (r,) = plan(c, "hole", 1)
        s = required_speed(r, c, CFG)
        if s > CFG.s_max:
            return
        ep = simulate(c, Action(s / CFG.s_max, r.first_heading), CFG)
        assert ep.terminal.kind == "Captured" and ep.terminal.obstacle == "hole"

    def test_gate_recursion(self):
        c = disk_court(2.2, 1.0, start=(0.3, 1.0), extra=(ob("ramp", K.Ramp, 1.2, 1.0),))
        (r,) = plan(c, "hole", 1)
        s_goal = math.sqrt(2 * 0.45 * 0.15)
        after = math.sqrt(s_goal ** 2 + 2 * 0.45 * (2.2 - 1.4))
        before = max(1.0, math.sqrt(after ** 2 + 0.81))
        expect = math.sqrt(before ** 2 + 2 * 0.45 * (1.0 - 0.3))
        assert required_speed(r, c, CFG) == pytest.approx(expect, abs=1e-12)

    def test_window_contains_required_speed(self, bundled):
        for name, (c, tier, goal) in bundled.items():
            if tier == "scenario":
                continue
            for r in plan(c, _goal(c, goal), 3):
                w = launch_window(r, c, CFG)
                if w is not None:
                    assert w[0] <= required_speed(r, c, CFG) + 1e-12, name


def test_route_json_fields(bundled):
    (r,) = plan(bundled["s01_empty"][0], "hole", 1)
    d = r.to_json()
    assert set(d) == {"route", "stroke_count", "total_distance"}
    assert d["stroke_count"] == 1
    assert all(set(w) == {"keypoint", "angle"} and w["angle"].endswith(" degrees") for w in d["route"])
