#!/usr/bin/env python3
"""Benchmark the compiled thinning kernel against the pure-Python fallback.

Both backends produce bitwise-identical paths (the test suite enforces it),
so this is purely a throughput comparison.

    python3 benchmarks/bench_backends.py [--paths N] [--horizon T]
"""

import argparse
import time

import numpy as np

from hawkeslab import HawkesModel, MarkDistribution, available_backends, simulate
from hawkeslab._backend import get_kernel
from hawkeslab.rng import stream_key
from hawkeslab.simulator import DEATH_THRESHOLD, REFRESH_INTERVAL


def bench_backend(model, backend, n_paths, horizon, stats_only):
    kernel = get_kernel(backend)
    args = model.kernel_arrays()
    events = 0
    t0 = time.perf_counter()
    for i in range(n_paths):
        out = kernel.run_thinning(*args, 0.0, horizon, model.mu,
                                  stream_key(1, i), not stats_only, None,
                                  10_000_000, REFRESH_INTERVAL, DEATH_THRESHOLD)
        events += out["n_events"]
    return events, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=50)
    ap.add_argument("--horizon", type=float, default=200.0)
    args = ap.parse_args()

    model = HawkesModel.make([2.0, 3.0], [[0.5, 2.0], [2.0, 0.5]], [4.0, 4.0],
                             MarkDistribution.exponential(1.0))
    print(f"model: bivariate benchmark; {args.paths} paths, horizon {args.horizon}")
    print(f"available backends: {', '.join(available_backends())}\n")

    rows = []
    for backend in available_backends():
        for stats_only in (False, True):
            ev, dt = bench_backend(model, backend, args.paths, args.horizon,
                                   stats_only)
            mode = "aggregates" if stats_only else "full events"
            rows.append((backend, mode, ev, dt, ev / dt / 1e6))
    base = {m: dt for b, m, _, dt, _ in rows if b == "python"
            for m, dt in [(m, dt)]}
    print(f"{'backend':<8} {'mode':<12} {'events':>10} {'secs':>8} "
          f"{'Mev/s':>8} {'speedup':>8}")
    for b, m, ev, dt, rate in rows:
        speed = base.get(m, dt) / dt
        print(f"{b:<8} {m:<12} {ev:>10d} {dt:>8.3f} {rate:>8.2f} {speed:>7.1f}x")

    # cross-check a sample path for equality while we are at it
    if len(available_backends()) == 2:
        a = simulate(model, 50.0, 3, backend="python")
        b = simulate(model, 50.0, 3, backend="cython")
        same = (np.array_equal(a.times, b.times)
                and np.array_equal(a.marks, b.marks))
        print(f"\nbitwise path parity on a spot check: {same}")


if __name__ == "__main__":
    main()
