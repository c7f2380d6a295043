"""Offline evaluation by nearest-sample projection.

A dataset holds recorded episodes for one court.  Instead of executing an
action, the loop projects it onto the closest recorded action and adopts
that record's episode as the outcome.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels, jsonio
from .court import Court
from .dynamics import Action, Episode, Event, SimConfig, simulate
from .errors import EmptyDataset, SchemaError
from .geometry import Vec2

DEFAULT_SPREAD = (0.1, 2.0)
DEFAULT_STRIDE = 20


@dataclass(frozen=True)
class ActionMetric:
    theta_scale: float = 90.0

    def __post_init__(self):
        if not self.theta_scale > 0:
            raise ValueError("theta_scale must be positive")

    def __call__(self, a: Action, b: Action) -> float:
        return math.hypot(a.v - b.v, (a.theta_deg - b.theta_deg) / self.theta_scale)


@dataclass(frozen=True, eq=False)
class DatasetRecord:
    court_id: str
    action: Action
    episode: Episode

    @property
    def outcome(self) -> Event:
        return self.episode.terminal

    def to_json(self, stride: int = DEFAULT_STRIDE) -> dict:
        ep = self.episode
        idx = list(range(0, len(ep.samples), stride))
        if idx[-1] != len(ep.samples) - 1:
            idx.append(len(ep.samples) - 1)
        return {
            "court_id": self.court_id,
            "action": self.action.to_json(),
            "outcome": {"kind": self.outcome.kind, "obstacle": self.outcome.obstacle,
                        "position": [self.outcome.position.x, self.outcome.position.y]},
            "episode": {
                "dt": ep.dt,
                "stride": stride,
                "balls": list(ep.ball_ids),
                "scoring_ball": ep.scoring_ball,
                "launch_speed": ep.launch_speed,
                "samples": ep.samples[idx],
                "events": [e.to_json() for e in ep.events],
            },
        }


def generate_dataset(
    court: Court,
    solved_action: Action,
    n: int = 20,
    spread=DEFAULT_SPREAD,
    seed: int = 0,
    cfg: SimConfig = SimConfig(),
) -> list:
    """``n`` simulated records with actions drawn uniformly around ``solved_action``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    dv, dth = float(spread[0]), float(spread[1])
    if dv < 0 or dth < 0:
        raise ValueError("spread must be non-negative")
    rng = np.random.default_rng(seed)
    lo, hi = max(0.0, solved_action.v - dv), min(1.0, solved_action.v + dv)
    out = []
    for _ in range(n):
        v = float(rng.uniform(lo, hi)) if hi > lo else lo
        th = solved_action.theta_deg + (float(rng.uniform(-dth, dth)) if dth > 0 else 0.0)
        a = Action(v, th)
        out.append(DatasetRecord(court.name, a, simulate(court, a, cfg)))
    return out


def _action_array(records) -> np.ndarray:
    return np.array([[r.action.v, r.action.theta_deg] for r in records], dtype=np.float64).reshape(-1, 2)


def project(dataset, query: Action, metric: ActionMetric = ActionMetric()) -> DatasetRecord:
    """Closest record to ``query``; ties go to the lowest index."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot project onto an empty dataset")
    acts = dataset.actions if isinstance(dataset, Dataset) else _action_array(dataset)
    i = _kernels.nearest_index(acts, float(query.v), float(query.theta_deg), float(metric.theta_scale))
    return dataset[int(i)]


class Dataset(list):
    """Records of one court with a cached action matrix."""

    def __init__(self, records: Iterable[DatasetRecord] = ()):
        super().__init__(records)
        self.actions = _action_array(self)


class ProjectionExecutor:
    """Executor adapter: an action runs as its nearest recorded episode."""

    def __init__(self, records, metric: ActionMetric = ActionMetric()):
        if len(records) == 0:
            raise EmptyDataset("projection executor needs records")
        self.dataset = records if isinstance(records, Dataset) else Dataset(records)
        self.metric = metric
        self.calls = []

    def __call__(self, action: Action) -> Episode:
        rec = project(self.dataset, action, self.metric)
        self.calls.append(rec)
        return rec.episode


# ---------------------------------------------------------------------------
# file format: per court, a header line then its records


def dumps_dataset(groups: dict, stride: int = DEFAULT_STRIDE) -> str:
    lines = []
    for cid in sorted(groups):
        recs = groups[cid]
        lines.append({"court_id": cid, "records": len(recs)})
        lines.extend(r.to_json(stride) for r in recs)
    return jsonio.dumps_lines(lines)


def _vec(v):
    return Vec2(float(v[0]), float(v[1]))


def _record_from_json(d: dict) -> DatasetRecord:
    e = d["episode"]
    events = tuple(
        Event(ev["t"], ev["kind"], ev["obstacle"], _vec(ev["position"]), ev["speed"], ev["ball"]) for ev in e["events"]
    )
    samples = np.array(e["samples"], dtype=np.float64)
    action = Action(d["action"]["v"], d["action"]["theta_deg"])
    ep = Episode(
        action=action,
        dt=e["dt"] * e["stride"],
        ball_ids=tuple(e["balls"]),
        samples=samples,
        events=events,
        launch_speed=e["launch_speed"],
        court_id=d["court_id"],
        scoring_ball=e["scoring_ball"],
    )
    if d["outcome"]["kind"] != events[-1].kind:
        raise SchemaError("record outcome disagrees with its episode terminal")
    return DatasetRecord(d["court_id"], action, ep)


def loads_dataset(text: str) -> dict:
    """Parse a dataset file into ``{court_id: Dataset}``."""
    groups: dict = {}
    cur, left = None, 0
    for ln, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        d = json.loads(line)
        if "records" in d and "action" not in d:
            if left:
                raise SchemaError(f"line {ln}: court {cur!r} is missing {left} record(s)")
            cur, left = d["court_id"], int(d["records"])
            if cur in groups:
                raise SchemaError(f"line {ln}: court {cur!r} appears twice")
            groups[cur] = []
            continue
        if cur is None or d.get("court_id") != cur or left <= 0:
            raise SchemaError(f"line {ln}: record outside its court group")
        groups[cur].append(_record_from_json(d))
        left -= 1
    if left:
        raise SchemaError(f"court {cur!r} is missing {left} record(s)")
    return {k: Dataset(v) for k, v in groups.items()}
