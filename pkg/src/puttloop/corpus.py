"""The bundled court corpus.

Courts are authored here in code and dumped to ``data/corpus`` as
canonical JSON; ``index.json`` records each court's tier and goal query.
Tiers: ``simple`` (no gates on the route), ``medium`` (one gate),
``complex`` (two or more gates, multiple routes or a free ball) and
``scenario`` (deliberately infeasible or special-purpose courts).
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from . import jsonio
from .court import DEFAULT_PARAMS, Court, FreeBall, Obstacle, ObstacleKind, Pose, read_court, save_court, validate_court
from .geometry import Vec2

K = ObstacleKind


def _o(oid, kind, x, y, h=0.0, **params):
    p = dict(DEFAULT_PARAMS[kind])
    p.update({k: float(v) for k, v in params.items()})
    return Obstacle(oid, kind, Pose((x, y), h), p)


def _court(name, start, *obstacles, balls=()):
    return validate_court(
        Court(Vec2(*start), tuple(obstacles), tuple(FreeBall(b, Vec2(*p)) for b, p in balls), name=name)
    )


def _wall(oid, x, y, h=0.0, length=0.5):
    return _o(oid, K.StraightWall, x, y, h, length=length)


def simple():
    return [
        (_court("s01_empty", (0.25, 1.0), _o("hole", K.DiskEndpoint, 1.25, 1.0)), "disk"),
        (_court("s02_offset", (0.3, 1.0), _o("hole", K.DiskEndpoint, 1.3, 1.35)), "disk"),
        (_court("s03_cup_long", (0.25, 1.0), _o("cup", K.CupEndpoint, 2.2, 0.7)), "cup"),
        (
            _court(
                "s04_two_disks",
                (0.3, 1.0),
                _o("left_disk", K.DiskEndpoint, 1.2, 1.5),
                _o("right_disk", K.DiskEndpoint, 1.2, 0.5),
            ),
            "disk left",
        ),
        (
            _court("s05_cup_wall", (0.3, 0.6), _o("cup", K.CupEndpoint, 2.5, 1.4), _wall("w1", 1.5, 0.4, 0.0)),
            "cup",
        ),
        (_court("s06_short_diag", (0.3, 0.6), _o("hole", K.DiskEndpoint, 1.0, 1.4)), "disk"),
        (
            _court(
                "s07_corridor",
                (0.3, 1.0),
                _o("cup", K.CupEndpoint, 1.9, 1.0),
                _wall("w1", 1.1, 1.35, 0.0, 1.0),
                _wall("w2", 1.1, 0.65, 0.0, 1.0),
            ),
            "cup",
        ),
        (
            _court("s08_volcano_aside", (0.3, 1.0), _o("hole", K.DiskEndpoint, 1.4, 1.0), _o("v1", K.Volcano, 1.0, 1.6)),
            "disk",
        ),
        (
            _court(
                "s09_disk_and_cup",
                (0.3, 1.0),
                _o("hole", K.DiskEndpoint, 1.3, 0.7),
                _o("cup", K.CupEndpoint, 2.4, 1.6),
            ),
            "disk",
        ),
        (_court("s10_cup_far", (0.25, 1.6), _o("cup", K.CupEndpoint, 2.7, 0.4)), "cup"),
    ]


def medium():
    return [
        (
            _court("m01_tunnel", (0.3, 1.0), _o("tunnel", K.BridgeTunnel, 1.2, 1.0), _o("hole", K.DiskEndpoint, 2.0, 1.0)),
            "disk",
        ),
        (
            _court("m02_ramp_cup", (0.3, 1.0), _o("ramp", K.Ramp, 1.1, 1.0), _o("cup", K.CupEndpoint, 2.3, 1.0)),
            "cup",
        ),
        (
            _court(
                "m03_curve_left",
                (0.3, 0.5),
                _o("curve", K.Curve, 1.3, 0.5, 0.0),
                _o("hole", K.DiskEndpoint, 1.85, 1.25),
                _wall("w1", 0.95, 1.0, 45.0),
            ),
            "disk",
        ),
        (
            _court(
                "m04_arch",
                (0.3, 1.2),
                _o("arch", K.CampArch, 1.3, 1.2),
                _o("hole", K.DiskEndpoint, 2.1, 1.2),
                _wall("w1", 1.3, 0.7, 90.0, 0.5),
            ),
            "disk",
        ),
        (
            _court("m05_volcano", (0.3, 1.0), _o("volcano", K.Volcano, 1.0, 1.0), _o("hole", K.DiskEndpoint, 1.8, 1.0)),
            "disk",
        ),
        (
            _court(
                "m06_pitfall_cup", (0.3, 0.8), _o("plate", K.PitfallPlate, 1.2, 0.8), _o("cup", K.CupEndpoint, 2.4, 0.8)
            ),
            "cup",
        ),
        (
            _court("m07_ramp_disk", (0.3, 1.4), _o("ramp", K.Ramp, 1.0, 1.4), _o("hole", K.DiskEndpoint, 1.85, 1.4)),
            "disk",
        ),
        (
            _court(
                "m08_tunnel_angled",
                (0.3, 0.5),
                _o("tunnel", K.BridgeTunnel, 1.3, 1.0, 26.565051),
                _o("cup", K.CupEndpoint, 2.3, 1.5),
            ),
            "cup",
        ),
    ]


def complex_():
    return [
        (
            _court(
                "c01_ramp_curve",
                (0.3, 0.4),
                _o("ramp", K.Ramp, 1.0, 0.4),
                _o("curve", K.Curve, 1.6, 0.4, 0.0),
                _o("hole", K.DiskEndpoint, 2.1, 1.25),
            ),
            "disk",
        ),
        (
            _court(
                "c02_tunnel_ramp",
                (0.25, 1.0),
                _o("tunnel", K.BridgeTunnel, 0.8, 1.0),
                _o("ramp", K.Ramp, 1.6, 1.0),
                _o("cup", K.CupEndpoint, 2.6, 1.0),
            ),
            "cup",
        ),
        (two_pathway(), "disk"),
        (
            _court(
                "c04_volcano_tunnel",
                (0.25, 0.8),
                _o("volcano", K.Volcano, 0.8, 0.8),
                _o("tunnel", K.BridgeTunnel, 1.55, 0.8),
                _o("cup", K.CupEndpoint, 2.5, 0.8),
            ),
            "cup",
        ),
        (
            _court(
                "c05_double_curve",
                (0.3, 0.3),
                _o("curve_a", K.Curve, 1.0, 0.3, 0.0),
                _o("curve_b", K.Curve, 1.456218, 1.0, 60.0),
                _o("hole", K.DiskEndpoint, 1.0, 1.7),
            ),
            "disk",
        ),
        (tunnel_under_ramp(), "disk"),
        (billiard(), "disk"),
    ]


def two_pathway():
    """A ramp lane and an arch lane both lead to the hole; a short wall splits them."""
    return _court(
        "c03_two_pathways",
        (0.3, 1.0),
        _o("ramp", K.Ramp, 1.644059, 1.238343, -14.0),
        _o("arch", K.CampArch, 1.547815, 0.776351, 12.0),
        _wall("divider", 1.0, 1.0, 90.0, 0.2),
        _o("hole", K.DiskEndpoint, 2.6, 1.0),
    )


def tunnel_under_ramp():
    """A sideways ramp blocks the straight shot; the hole is reached by tunnelling past it."""
    return _court(
        "c06_tunnel_under_ramp",
        (0.3, 0.8),
        _o("ramp", K.Ramp, 2.1, 0.86, 90.0),
        _o("tunnel", K.BridgeTunnel, 1.451057, 1.109017),
        _o("hole", K.DiskEndpoint, 2.6, 1.109017),
    )


def billiard():
    """Hit the red ball so that it bumps the white ball into the disk."""
    return _court(
        "billiard",
        (0.3, 1.0),
        _o("hole", K.DiskEndpoint, 2.3, 1.5),
        _wall("screen", 1.4, 1.3, 70.0, 0.6),
        balls=(("white", (1.3, 0.9)),),
    )


def coaster():
    """Only route runs over a roller coaster that max speed cannot climb."""
    return _court(
        "coaster",
        (0.3, 1.0),
        _o("coaster", K.RollerCoaster, 1.45, 1.0),
        _o("hole", K.DiskEndpoint, 2.6, 1.0),
    )


def overshoot():
    """A pitfall plate lets balls through only fast enough to roll past the shallow disk."""
    return _court(
        "overshoot",
        (0.3, 1.0),
        _o("plate", K.PitfallPlate, 1.1, 1.0),
        _o("hole", K.DiskEndpoint, 1.85, 1.0),
        _wall("w_up", 1.1, 1.3, 0.0, 1.2),
        _wall("w_dn", 1.1, 0.7, 0.0, 1.2),
    )


def boxed():
    """Four walls close the hole off; corner gaps are narrower than a ball."""
    return _court(
        "boxed",
        (0.3, 1.0),
        _o("hole", K.DiskEndpoint, 2.0, 1.0),
        _wall("north", 2.0, 1.325, 0.0, 0.6),
        _wall("east", 2.335, 1.0, 90.0, 0.6),
        _wall("south", 2.0, 0.675, 0.0, 0.6),
        _wall("west", 1.665, 1.0, 90.0, 0.6),
    )


def scenarios():
    return [(coaster(), "disk"), (overshoot(), "disk"), (boxed(), "disk")]


def build_corpus() -> dict:
    """``{name: (court, tier, goal query)}`` for every bundled court."""
    out = {}
    for tier, items in (("simple", simple()), ("medium", medium()), ("complex", complex_()), ("scenario", scenarios())):
        for court, goal in items:
            out[court.name] = (court, tier, goal)
    return out


def write_corpus(directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    index = {}
    for name, (court, tier, goal) in build_corpus().items():
        (d / f"{name}.json").write_bytes(save_court(court))
        index[name] = {"tier": tier, "goal": goal}
    (d / "index.json").write_text(jsonio.dumps(index) + "\n")


def corpus_dir() -> Path:
    return Path(str(resources.files("puttloop") / "data" / "corpus"))


def load_corpus(directory=None) -> dict:
    """Read the dumped corpus back as ``{name: (court, tier, goal query)}``."""
    d = Path(directory) if directory is not None else corpus_dir()
    index = json.loads((d / "index.json").read_text())
    return {name: (read_court(d / f"{name}.json"), meta["tier"], meta["goal"]) for name, meta in sorted(index.items())}
