"""Timing comparison of the compiled kernels against the pure-NumPy fallback.

Run directly:

    python benchmarks/bench_kernels.py

Each kernel is timed with the best of several repeats and the outputs of
the two backends are checked against each other, so this doubles as a
quick parity smoke test on machines without a compiler.
"""

import time

import numpy as np

from lesioncut._kernels import affinity_entries, backend_name, median_filter_u8


def best_of(repeats, fn, *args, **kwargs):
    times = []
    result = None
    for _ in range(repeats):
        started = time.perf_counter()
        result = fn(*args, **kwargs)
        times.append(time.perf_counter() - started)
    return min(times), result


def bench_median(rng):
    print("median_filter_u8, window 7")
    for side in (256, 512):
        img = rng.integers(0, 256, size=(side, side), dtype=np.uint8)
        t_pure, out_pure = best_of(3, median_filter_u8, img, 7, backend="pure")
        line = f"  {side}x{side}: pure {t_pure * 1e3:8.2f} ms"
        if backend_name() == "native":
            t_nat, out_nat = best_of(3, median_filter_u8, img, 7, backend="native")
            diff = int(np.abs(out_nat.astype(int) - out_pure.astype(int)).max())
            line += (
                f"   native {t_nat * 1e3:8.2f} ms"
                f"   speedup {t_pure / t_nat:5.1f}x   max diff {diff}"
            )
        print(line)


def bench_affinity(rng):
    print("affinity_entries, radius 5")
    for side in (120, 160):
        field = rng.integers(0, 256, size=(side, side)).astype(np.float64) / 255.0
        args = (field, 5.0, 1 / 0.1**2, 1 / 4.0**2)
        t_pure, (pr, pc, pv) = best_of(3, affinity_entries, *args, backend="pure")
        line = f"  {side}x{side} ({pv.size} entries): pure {t_pure * 1e3:8.2f} ms"
        if backend_name() == "native":
            t_nat, (nr, nc, nv) = best_of(3, affinity_entries, *args, backend="native")
            assert np.array_equal(pr, nr) and np.array_equal(pc, nc)
            diff = float(np.abs(pv - nv).max())
            line += (
                f"   native {t_nat * 1e3:8.2f} ms"
                f"   speedup {t_pure / t_nat:5.1f}x   max diff {diff:.2e}"
            )
        print(line)


def main():
    print(f"active backend: {backend_name()}")
    rng = np.random.default_rng(0)
    bench_median(rng)
    bench_affinity(rng)


if __name__ == "__main__":
    main()
