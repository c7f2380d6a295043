"""Command-line front door.

Exit codes
----------
0  solved (or the command succeeded)
1  bad input: unreadable file, schema or configuration error
2  solved after the outer loop changed the court
3  not solved: no remedy, budget exhausted or infeasible verdict
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from . import jsonio
from .armtraj import ArmModel, generate_swing
from .corpus import corpus_dir
from .court import read_court, save_court, select_endpoint
from .dynamics import Action, SimConfig
from .errors import NoRemedy, PuttloopError
from .innerloop import DEFAULT_BUDGET, run_inner
from .offline import DEFAULT_SPREAD, ProjectionExecutor, dumps_dataset, generate_dataset, loads_dataset, project
from .outerloop import ALL_EDITS, DEFAULT_ROUNDS, assess_feasibility, evolve_court, run_outer
from .svg import render_svg

EXIT_OK, EXIT_INPUT, EXIT_MODIFIED, EXIT_UNSOLVED = 0, 1, 2, 3

_SIM_KEYS = {f.name for f in dataclasses.fields(SimConfig)}
_CONFIG_TYPES = {
    "goal": str,
    "budget": int,
    "seed": int,
    "max_rounds": int,
    "outer": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "allowed": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "n": int,
}
_DEFAULTS = {"goal": None, "budget": DEFAULT_BUDGET, "seed": 0, "max_rounds": DEFAULT_ROUNDS, "outer": False,
             "allowed": ALL_EDITS, "n": 20}


class InputError(Exception):
    pass


def read_config(path) -> dict:
    """Parse a ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{ln}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key in _SIM_KEYS:
                out[key] = float(val)
            elif key in _CONFIG_TYPES:
                out[key] = _CONFIG_TYPES[key](val)
            else:
                raise InputError(f"{path}:{ln}: unknown key {key!r}")
        except ValueError as exc:
            raise InputError(f"{path}:{ln}: bad value for {key}: {exc}") from None
    return out


def effective(args) -> dict:
    """File values, overridden by flags that were given, over defaults."""
    conf = dict(_DEFAULTS)
    conf.update({k: getattr(SimConfig(), k) for k in _SIM_KEYS})
    if getattr(args, "config", None):
        conf.update(read_config(args.config))
    for key in list(_DEFAULTS) + sorted(_SIM_KEYS):
        val = getattr(args, key, None)
        if val is not None:
            conf[key] = val
    return conf


def sim_config(conf: dict) -> SimConfig:
    return SimConfig(**{k: float(conf[k]) for k in sorted(_SIM_KEYS)})


def load_court_arg(text: str):
    """A court file path, or ``corpus:<name>`` for a bundled court."""
    if text.startswith("corpus:"):
        path = corpus_dir() / f"{text[len('corpus:'):]}.json"
    else:
        path = Path(text)
    if not path.is_file():
        raise InputError(f"court file not found: {text}")
    return read_court(path)


def _config_echo(conf: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(conf.items())}


def _write(path, text: str) -> None:
    Path(path).write_text(text)


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    conf = effective(args)
    cfg = sim_config(conf)
    court = load_court_arg(args.court)
    goal = select_endpoint(court, _goal(args.court, conf))
    report = {"court_id": court.name, "goal": goal, "config": _config_echo(conf)}
    code = EXIT_UNSOLVED
    if args.dataset:
        groups = loads_dataset(Path(args.dataset).read_text())
        if court.name not in groups:
            raise InputError(f"dataset has no records for court {court.name!r}")
        report["dataset"] = str(args.dataset)
        inner = run_inner(court, goal, cfg, conf["budget"], executor=ProjectionExecutor(groups[court.name]))
        final_court = court
        code = EXIT_OK if inner.solved else EXIT_UNSOLVED
    elif conf["outer"]:
        try:
            res = run_outer(court, goal, cfg, conf["max_rounds"], conf["budget"], conf["allowed"])
        except NoRemedy as exc:
            inner = run_inner(court, goal, cfg, conf["budget"])
            final_court = court
            report["outer"] = {"solved": False, "error": "NoRemedy", "message": str(exc),
                               "feasibility": exc.verdict.to_json() if exc.verdict else None}
        else:
            inner, final_court = res.final_inner, res.final_court
            report["outer"] = res.to_json()
            if res.solved:
                code = EXIT_OK if not res.modifications else EXIT_MODIFIED
    else:
        inner = run_inner(court, goal, cfg, conf["budget"])
        final_court = court
        code = EXIT_OK if inner.solved else EXIT_UNSOLVED
    verdict = assess_feasibility(final_court, goal, inner, cfg) if not args.dataset else None
    report["inner"] = inner.to_json()
    if verdict is not None:
        report["feasibility"] = verdict.to_json()
    report["attempts"] = [a.to_json() for a in inner.attempts]
    report["exit_code"] = code
    text = jsonio.dumps(report) + "\n"
    if args.report_out:
        _write(args.report_out, text)
    if args.svg_out:
        route = inner.attempts[-1].route if inner.attempts else (inner.routes[0] if inner.routes else None)
        _write(args.svg_out, render_svg(final_court, [a.episode for a in inner.attempts], route))
    print(f"{court.name}: {inner.label} after {len(inner.attempts)} attempt(s)")
    return code


def cmd_check(args) -> int:
    conf = effective(args)
    cfg = sim_config(conf)
    court = load_court_arg(args.court)
    goal = select_endpoint(court, _goal(args.court, conf))
    verdict = assess_feasibility(court, goal, run_inner(court, goal, cfg, conf["budget"]), cfg)
    text = jsonio.dumps(verdict.to_json()) + "\n"
    if args.report_out:
        _write(args.report_out, text)
    sys.stdout.write(text)
    return EXIT_OK if verdict.feasibility else EXIT_UNSOLVED


def cmd_dataset(args) -> int:
    conf = effective(args)
    cfg = sim_config(conf)
    groups = {}
    for i, court_arg in enumerate(args.court):
        court = load_court_arg(court_arg)
        goal = select_endpoint(court, _goal(court_arg, conf))
        inner = run_inner(court, goal, cfg, conf["budget"])
        if not inner.solved:
            print(f"{court.name}: not solved ({inner.label}); no dataset", file=sys.stderr)
            return EXIT_UNSOLVED
        spread = (args.spread_v, args.spread_theta)
        groups[court.name] = generate_dataset(court, inner.solved_action, conf["n"], spread, conf["seed"] + i, cfg)
    _write(args.out, dumps_dataset(groups))
    print(f"wrote {sum(len(g) for g in groups.values())} record(s) for {len(groups)} court(s) to {args.out}")
    return EXIT_OK


def _goal(court_arg: str, conf: dict) -> str:
    """The configured goal query, else the corpus index entry, else ``"disk"``."""
    if conf["goal"]:
        return conf["goal"]
    if court_arg.startswith("corpus:"):
        meta = json.loads((corpus_dir() / "index.json").read_text()).get(court_arg[len("corpus:"):])
        if meta:
            return meta["goal"]
    return "disk"


def cmd_project(args) -> int:
    groups = loads_dataset(Path(args.dataset).read_text())
    if args.court_id is None:
        if len(groups) != 1:
            raise InputError("dataset holds several courts; pass --court-id")
        (cid,) = groups
    else:
        cid = args.court_id
        if cid not in groups:
            raise InputError(f"dataset has no records for court {cid!r}")
    rec = project(groups[cid], Action(args.v, args.theta))
    out = {"court_id": cid, "query": Action(args.v, args.theta).to_json(), "action": rec.action.to_json(),
           "outcome": rec.outcome.to_json()}
    sys.stdout.write(jsonio.dumps(out) + "\n")
    return EXIT_OK


def cmd_evolve(args) -> int:
    conf = effective(args)
    cfg = sim_config(conf)
    court = load_court_arg(args.court)
    goal = select_endpoint(court, _goal(args.court, conf))
    inner = run_inner(court, goal, cfg, conf["budget"])
    if not inner.solved:
        print(f"{court.name}: not solved ({inner.label}); nothing to evolve", file=sys.stderr)
        return EXIT_UNSOLVED
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for v in evolve_court(court, inner, conf["seed"], conf["n"], cfg):
        (out_dir / f"{v.name}.json").write_bytes(save_court(v))
        print(v.name)
    return EXIT_OK


def cmd_traj(args) -> int:
    conf = effective(args)
    traj = generate_swing(ArmModel(), Action(args.v, args.theta), cfg=sim_config(conf))
    _write(args.out, traj.to_csv())
    print(f"wrote {len(traj.t)} samples, contact at row {traj.contact_index + 1}, to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _common(p, court=True):
    if court:
        p.add_argument("--court", required=True, help="court JSON path or corpus:<name>")
    p.add_argument("--goal", help='goal query such as "disk", "cup left" or an endpoint id')
    p.add_argument("--budget", type=int, help="inner-loop attempt budget")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="key=value file; flags override it")
    for k in sorted(_SIM_KEYS):
        p.add_argument(f"--{k.replace('_', '-')}", dest=k, type=float, help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="puttloop",
        description="Closed-loop minigolf solver.",
        epilog="exit codes: 0 solved, 1 input error, 2 solved after court edits, 3 not solved",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the inner loop, optionally the outer loop")
    _common(p)
    p.add_argument("--outer", action="store_const", const=True, help="edit the court when it is infeasible")
    p.add_argument("--max-rounds", dest="max_rounds", type=int)
    p.add_argument("--allowed", type=_CONFIG_TYPES["allowed"], help="comma-separated edit types for the outer loop")
    p.add_argument("--dataset", help="execute by projection onto this dataset file")
    p.add_argument("--svg-out")
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="feasibility verdict for a court")
    _common(p)
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("dataset", help="record episodes around each court's solved action")
    _common(p, court=False)
    p.add_argument("--court", action="append", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--spread-v", type=float, default=DEFAULT_SPREAD[0])
    p.add_argument("--spread-theta", type=float, default=DEFAULT_SPREAD[1])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("project", help="nearest recorded outcome for an action")
    p.add_argument("--dataset", required=True)
    p.add_argument("--court-id")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("evolve", help="write feasible variants of a solved court")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("traj", help="swing trajectory CSV for an action")
    _common(p, court=False)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_traj)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PuttloopError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    # wall-clock time stays out of the report so that reports are reproducible
    print(f"elapsed {1000 * (time.perf_counter() - t0):.0f} ms", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
