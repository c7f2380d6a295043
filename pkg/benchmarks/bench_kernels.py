"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from puttloop import _kernels
from puttloop.corpus import load_corpus
from puttloop.dynamics import Action, SimConfig, simulate


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_simulate(repeat):
    court = load_corpus()["billiard"][0]
    act = Action(0.5, 10.0)
    cfg = SimConfig(t_max=2.0)
    out = {}
    for label, kernel in (("numba", _kernels.advance_numba), ("numpy", _kernels.advance_numpy)):
        if kernel is None:
            continue
        simulate(court, act, cfg, kernel=kernel)  # compile / warm up
        steps = len(simulate(court, act, cfg, kernel=kernel).samples)
        out[label] = (best_of(lambda: simulate(court, act, cfg, kernel=kernel), repeat), steps)
    return out


def bench_nearest(repeat):
    rng = np.random.default_rng(0)
    acts = np.column_stack([rng.uniform(0, 1, 5000), rng.uniform(-180, 180, 5000)])
    qs = rng.uniform(0, 1, (200, 2))
    out = {}
    for label, fn in (("numba", _kernels.nearest_index_numba), ("numpy", _kernels.nearest_index_numpy)):
        if fn is None:
            continue
        fn(acts, 0.5, 0.0, 90.0)

        def run():
            for v, th in qs:
                fn(acts, float(v), float(th), 90.0)

        out[label] = best_of(run, repeat)
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    sim = bench_simulate(args.repeat)
    for label, (t, steps) in sim.items():
        print(f"simulate  {label:6s} {t * 1e3:9.2f} ms  ({steps} steps, {t / steps * 1e6:.2f} us/step)")
    near = bench_nearest(args.repeat)
    for label, t in near.items():
        print(f"nearest   {label:6s} {t * 1e3:9.2f} ms  (200 queries x 5000 records)")
    if "numba" in sim and "numpy" in sim:
        print(f"simulate speed-up {sim['numpy'][0] / sim['numba'][0]:.1f}x")


if __name__ == "__main__":
    main()
