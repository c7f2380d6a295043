"""Nested closed-loop solver for a simulated minigolf court.

The inner loop refines a hit ``(v, theta)`` from diagnosed failures; the
outer loop judges whether the court is solvable at all and edits it when
it is not.
"""
from .court import Court, load_court, read_court, save_court, select_endpoint
from .dynamics import Action, Episode, SimConfig, simulate
from .innerloop import InnerResult, run_inner
from .outerloop import OuterResult, assess_feasibility, propose_modifications, run_outer
from .planner import plan

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Court",
    "Episode",
    "InnerResult",
    "OuterResult",
    "SimConfig",
    "assess_feasibility",
    "load_court",
    "plan",
    "propose_modifications",
    "read_court",
    "run_inner",
    "run_outer",
    "save_court",
    "select_endpoint",
    "simulate",
]
