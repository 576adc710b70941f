#!/usr/bin/env python3
"""Timing comparison of the numba and pure-numpy sampler kernels.

Runs each hot kernel on representative workloads with both backends and
prints a small table of per-call times and speedups.  The numba functions
are compiled once (a warm-up call) before timing so the numbers reflect
steady-state throughput, not JIT latency.

Usage:  python3 benchmarks/bench_kernels.py [--paths N] [--repeat K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from levyou import _kernels


def _time(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=400_000,
                    help="number of simulated paths in each workload")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions (best is reported)")
    args = ap.parse_args()

    n = args.paths
    rng = np.random.default_rng(20260822)

    numba_backend = _kernels._build_numba_backend()
    if numba_backend is None:
        raise SystemExit("numba is not importable; nothing to compare")
    numpy_backend = _kernels._NUMPY_BACKEND

    d, atoms, freqs, jumps = 2, 3, 16, 5 * n

    U = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
    W = rng.exponential(size=n)
    Z = rng.standard_normal((n, atoms))
    gammas = np.abs(rng.standard_normal(atoms)) + 0.1
    shifts = rng.standard_normal(atoms)
    directions = rng.standard_normal((atoms, d))
    X = rng.standard_normal((n, d))
    xi = rng.standard_normal((freqs, d))
    path_index = rng.integers(0, n, size=jumps)
    vectors = rng.standard_normal((jumps, d))

    workloads = [
        ("cms_standard_skewed", (1.5, U, W)),
        ("combine_stable_atoms", (Z, gammas, shifts, directions)),
        ("empirical_cf_sum", (X, xi)),
    ]

    rows = []
    for name, call_args in workloads:
        fn_np, fn_nb = numpy_backend[name], numba_backend[name]
        fn_nb(*call_args)  # compile
        t_np = _time(fn_np, *call_args, repeat=args.repeat)
        t_nb = _time(fn_nb, *call_args, repeat=args.repeat)
        rows.append((name, t_np, t_nb))

    # scatter_add_jumps mutates its accumulator, so give each call a fresh one
    fn_np = numpy_backend["scatter_add_jumps"]
    fn_nb = numba_backend["scatter_add_jumps"]
    fn_nb(np.zeros((n, d)), path_index, vectors)  # compile
    t_np = _time(lambda: fn_np(np.zeros((n, d)), path_index, vectors),
                 repeat=args.repeat)
    t_nb = _time(lambda: fn_nb(np.zeros((n, d)), path_index, vectors),
                 repeat=args.repeat)
    rows.append(("scatter_add_jumps", t_np, t_nb))

    print(f"paths={n}  jumps={jumps}  frequencies={freqs}  "
          f"(best of {args.repeat})")
    print(f"{'kernel':<22} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, t_np, t_nb in rows:
        print(f"{name:<22} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
