"""Timing comparison of the two kernel backends.

Runs the hot numeric paths (scalar stepping, trajectory rollout, batched
horizon costing) against both the pure-Python reference and the compiled
extension, when present, and prints a small table.  Times are best-of-5
wall clock, so run on an idle machine for stable numbers.

    python3 benchmarks/bench_kernels.py [--scale N]
"""

import argparse
import time

import numpy as np

from aquactl.growth import DEFAULT_PARAMS
from aquactl.kernels import available_backends


def _best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_step_w(mod, pv, n):
    def run():
        w = 100.0
        for _ in range(n):
            w = mod.step_w(w, 0.6, 30.0, 6.0, 0.01, 1.0, 1.0, True, pv)
        return w
    return _best_of(run)


def bench_rollout(mod, pv, n):
    horizon = 60
    f = np.full(horizon, 0.6)
    T = np.full(horizon, 30.0)
    do = np.full(horizon, 6.0)
    uia = np.full(horizon, 0.01)
    rho = np.ones(horizon)
    out = np.empty(horizon + 1)

    def run():
        for _ in range(n):
            mod.rollout(100.0, f, T, do, uia, rho, 1.0, True, pv, out)
    return _best_of(run)


def bench_horizon_costs(mod, pv, n):
    # the MPC inner loop shape: 64 candidates, 10 steps
    s_count, horizon = 64, 10
    rng = np.random.default_rng(0)
    F = rng.uniform(0.0, 1.0, (s_count, horizon))
    Tc = np.full((s_count, horizon), 30.0)
    Dc = np.full((s_count, horizon), 6.0)
    uia = np.full(horizon, 0.01)
    rho = np.ones(horizon)
    w_ref = np.full(horizon, 150.0)
    j_out = np.empty(s_count)
    v_out = np.empty(s_count, dtype=np.int64)

    def run():
        for _ in range(n):
            mod.horizon_costs(100.0, F, Tc, Dc, uia, rho, w_ref,
                              0.5, 30.0, 6.0, 1.0, True,
                              0, 1.0, 0.0, 0.0, 1.0, 0.1,
                              1e-6, 1e12, 1e9, pv, j_out, v_out)
    return _best_of(run)


CASES = (
    ("step_w x{n}", bench_step_w, 50_000),
    ("rollout(60) x{n}", bench_rollout, 2_000),
    ("horizon_costs(64x10) x{n}", bench_horizon_costs, 200),
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0,
                    help="multiply every iteration count (default 1.0)")
    args = ap.parse_args(argv)

    backends = available_backends()
    pv = DEFAULT_PARAMS.packed()
    names = list(backends)
    header = f"{'kernel':<28}" + "".join(f"{b + ' (s)':>16}" for b in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, fn, base_n in CASES:
        n = max(1, int(base_n * args.scale))
        times = [fn(backends[b], pv, n) for b in names]
        row = f"{label.format(n=n):<28}" + "".join(
            f"{t:>16.4f}" for t in times)
        if len(times) == 2 and times[1] > 0.0:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)
    if "compiled" not in backends:
        print("\ncompiled backend not available; showing python only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
