#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Workloads mirror the hot paths: paired (t, f) response sums as issued by the
measurement loop, and time-by-frequency gain grids as issued by true-SNR
evaluation and calibration.  Run:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from mmwtrack.kernels import _numpy as knp

try:
    from mmwtrack.kernels import _numba as knb

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    print("numba not importable; benchmarking the numpy backend only")


def make_inputs(n_pairs, n_t, n_f, n_paths, seed=0):
    rng = np.random.default_rng(seed)
    amp = rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)
    tau = rng.uniform(0, 500e-9, n_paths)
    fd = rng.uniform(-200, 200, n_paths)
    t_pairs = rng.uniform(0, 10, n_pairs)
    f_pairs = rng.uniform(59.75e9, 60.25e9, n_pairs)
    t_grid = np.linspace(0, 10, n_t)
    f_grid = np.linspace(59.75e9, 60.25e9, n_f)
    return amp, tau, fd, t_pairs, f_pairs, t_grid, f_grid


def bench(fn, *args, repeats=5):
    fn(*args)  # warm-up (JIT compile / cache touch)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    cases = [
        ("pairs  n=2.5e5 L=5", "pairs", 250_000, 0, 0, 5),
        ("pairs  n=2.5e5 L=20", "pairs", 250_000, 0, 0, 20),
        ("grid 625x64    L=10", "grid", 0, 625, 64, 10),
        ("grid 625x64    L=30", "grid", 0, 625, 64, 30),
        ("grid   1x65536 L=5", "grid", 0, 1, 65_536, 5),
    ]
    print(f"{'case':<22} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    print("-" * 55)
    for label, kind, n_pairs, n_t, n_f, n_paths in cases:
        amp, tau, fd, tp, fp, tg, fg = make_inputs(max(n_pairs, 1), max(n_t, 1),
                                                   max(n_f, 1), n_paths)
        if kind == "pairs":
            t_np = bench(knp.phasor_response, amp, tau, fd, tp, fp)
            t_nb = bench(knb.phasor_response, amp, tau, fd, tp, fp) if HAS_NUMBA else float("nan")
        else:
            t_np = bench(knp.mean_gain_grid, amp, tau, fd, tg, fg)
            t_nb = bench(knb.mean_gain_grid, amp, tau, fd, tg, fg) if HAS_NUMBA else float("nan")
        speed = t_np / t_nb if HAS_NUMBA else float("nan")
        print(f"{label:<22} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {speed:>8.2f}x")

    # end-to-end: one tracking run through whichever backend is active
    from mmwtrack.config import ExperimentConfig
    from mmwtrack.evaluate import build_realization, run_tracking
    from mmwtrack.kernels import backend_name

    exp = ExperimentConfig()
    real = build_realization(exp, 1)
    run_tracking(exp, real, 2e-3)  # warm
    start = time.perf_counter()
    run_tracking(exp, real, 2e-3)
    print(f"\ntracking run (10 s horizon, backend={backend_name()}): "
          f"{(time.perf_counter() - start) * 1e3:.0f} ms")


if __name__ == "__main__":
    main()
