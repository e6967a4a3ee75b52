"""Time the numba and numpy flavours of each hot kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call (compilation or cache load) is excluded from the timings.
"""
import argparse
import math
import time

import numpy as np

from rmtzeta._accel import HAVE_NUMBA
from rmtzeta._hot import NUMBA_KERNELS, NUMPY_KERNELS


def make_inputs(rng):
    t = np.sort(rng.uniform(200.0, 5000.0, 20000))
    theta = rng.uniform(0.0, 2 * math.pi, t.size)

    sigma = np.full(4000, 0.5)
    tt = rng.uniform(0.0, 2000.0, sigma.size)
    nterms = (np.maximum(10, np.ceil(tt / math.pi)) + 5).astype(np.int64)

    count, dim = 500, 40
    values = np.sort(rng.uniform(0.0, dim, (count, dim)), axis=1).ravel()
    offsets = np.arange(count + 1, dtype=np.int64) * dim
    edges = np.linspace(0.0, 3.0, 31)

    diffs = rng.uniform(0.0, 500.0, 30000)
    weights = 4.0 / (4.0 + diffs ** 2)
    freqs = np.linspace(0.0, 5.0, 1000)
    return {
        "rs_main_sum": (t, theta),
        "em_head": (sigma, tt, nterms),
        "pair_counts": (values, offsets, float(dim), edges),
        "cos_sum": (diffs, weights, freqs),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    inputs = make_inputs(np.random.default_rng(args.seed))
    print(f"{'kernel':<12} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, kernel_args in inputs.items():
        fast, slow = NUMBA_KERNELS[name], NUMPY_KERNELS[name]
        fast(*kernel_args)  # compile / load cache
        t_fast, r_fast = best_of(fast, kernel_args, args.repeat)
        t_slow, r_slow = best_of(slow, kernel_args, args.repeat)
        print(f"{name:<12} {t_fast:>10.4f} {t_slow:>10.4f} {t_slow / t_fast:>8.1f} "
              f"{max_diff(r_fast, r_slow):>11.2e}")


if __name__ == "__main__":
    main()
