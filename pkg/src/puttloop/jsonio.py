"""Canonical JSON: sorted keys, floats with six decimals, no whitespace drift.

Every file the package writes goes through :func:`dumps` so byte-level
comparisons (golden files, determinism checks) are meaningful.
"""
from __future__ import annotations

import json
import math

import numpy as np


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} cannot be serialized")
    s = f"{x:.6f}"
    if s == "-0.000000":
        s = "0.000000"
    return s


def _emit(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    out: list = []
    _emit(obj, out)
    return "".join(out)


def dumps_lines(records) -> str:
    return "".join(dumps(r) + "\n" for r in records)


def fmt_degrees(angle: float) -> str:
    """``"-20 degrees"`` style angle strings, exact to six decimals."""
    s = f"{angle:.6f}".rstrip("0").rstrip(".")
    if s in ("-0", ""):
        s = "0"
    return f"{s} degrees"


def parse_degrees(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    if s.endswith("degrees"):
        s = s[: -len("degrees")]
    return float(s.strip())
