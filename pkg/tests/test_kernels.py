"""The numba kernels and their numpy fallbacks must agree exactly."""
import os
import subprocess
import sys

import numpy as np
import pytest

from puttloop import _kernels
from puttloop.dynamics import Action, SimConfig, simulate
from puttloop.innerloop import run_inner

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_episodes_bit_identical_on_corpus(bundled):
    rng = np.random.default_rng(3)
    for name, (c, _, goal) in bundled.items():
        actions = [Action(float(rng.uniform(0.05, 1.0)), float(rng.uniform(-60, 60))) for _ in range(1)]
        inner = run_inner(c, goal)
        actions += [a.action for a in inner.attempts[:1]]
        # the pure-numpy loop is slow; a short horizon still covers every interaction
        cfg = SimConfig(t_max=1.5)
        for a in actions:
            e1 = simulate(c, a, cfg, kernel=_kernels.advance_numba)
            e2 = simulate(c, a, cfg, kernel=_kernels.advance_numpy)
            assert e1 == e2, (name, a)
            assert e1.to_jsonl(50) == e2.to_jsonl(50)


def test_nearest_index_agree_and_tie_break():
    rng = np.random.default_rng(0)
    acts = np.column_stack([rng.uniform(0, 1, 300), rng.uniform(-180, 180, 300)])
    for _ in range(200):
        v, th = float(rng.uniform(0, 1)), float(rng.uniform(-180, 180))
        assert _kernels.nearest_index_numba(acts, v, th, 90.0) == _kernels.nearest_index_numpy(acts, v, th, 90.0)
    dup = np.array([[0.5, 0.0], [0.5, 0.0], [0.1, 0.0]])
    assert _kernels.nearest_index_numba(dup, 0.5, 0.0, 90.0) == 0
    assert _kernels.nearest_index_numpy(dup, 0.5, 0.0, 90.0) == 0


@pytest.mark.parametrize("flag, expect", [("1", "False"), ("", "True")])
def test_environment_flag_selects_kernel(flag, expect):
    env = dict(os.environ, PUTTLOOP_NO_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from puttloop import _kernels; print(_kernels.USE_NUMBA)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expect
