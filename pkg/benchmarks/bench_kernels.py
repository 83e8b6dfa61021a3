#!/usr/bin/env python3
"""Compare the jitted kernels against their pure-numpy fallbacks.

Runs each kernel on a production-sized workload and prints a timing table.
The numpy path is what you get with MODALAUG_NO_NUMBA=1; this script
imports both implementations directly so one process covers both.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from modalaug import kernels


def timeit(fn, *args, repeats=5):
    fn(*args)                      # warm up (JIT compile)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not kernels.USING_NUMBA:
        raise SystemExit("numba path is disabled; unset MODALAUG_NO_NUMBA to benchmark both")

    rng = np.random.default_rng(0)
    j, m, t = 256 * 256, 19, 300          # one long sample at full resolution
    modes = rng.standard_normal((j, m)) + 1j * rng.standard_normal((j, m))
    amps = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    deltas = rng.uniform(-0.3, 0.0, m)
    omegas = rng.uniform(-40, 40, m)
    times = np.arange(t) * 0.01
    field = rng.standard_normal((512, 512))
    rgb = rng.uniform(0, 255, (1024, 1024, 3))

    rows = [
        ("evolve_field (65536x19 -> 300 frames)",
         timeit(kernels.evolve_field_nb, modes, amps, deltas, omegas, times,
                repeats=args.repeats),
         timeit(kernels.evolve_field_np, modes, amps, deltas, omegas, times,
                repeats=args.repeats)),
        ("quantize_u8 (512x512)",
         timeit(kernels.quantize_u8_nb, field, repeats=args.repeats),
         timeit(kernels.quantize_u8_np, field, repeats=args.repeats)),
        ("total_variation (512x512)",
         timeit(kernels.total_variation_nb, field, repeats=args.repeats),
         timeit(kernels.total_variation_np, field, repeats=args.repeats)),
        ("rgb_to_gray (1024x1024)",
         timeit(kernels.rgb_to_gray_nb, rgb, repeats=args.repeats),
         timeit(kernels.rgb_to_gray_np, rgb, repeats=args.repeats)),
    ]

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, t_nb, t_np in rows:
        print(f"{name:<{width}}  {t_nb * 1e3:>8.2f}ms  {t_np * 1e3:>8.2f}ms  "
              f"{t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
