#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each sampling kernel on both engines with the same seed, checks
the outputs agree, and reports throughput.  Select a single engine for
library use via CSE_LAB_KERNELS={auto,numba,numpy}.

Usage: python benchmarks/bench_kernels.py [--n 2000000]
"""

import argparse
import time

import numpy as np

from cse_lab import presets
from cse_lab.kernels import numpy_impl, rng, signed_cdf

try:
    from cse_lab.kernels import numba_impl
    HAS_NUMBA = True
except ImportError:
    numba_impl = None
    HAS_NUMBA = False
    print("numba not importable: timing the numpy path only")


def bench(name, fn_numpy, fn_numba, args_numpy, args_numba, n):
    if HAS_NUMBA:
        fn_numba(*args_numba, 0, 1000)          # compile outside the timer
    t0 = time.perf_counter()
    ref = fn_numpy(*args_numpy, 0, n)
    t_np = time.perf_counter() - t0
    line = f"{name:13s} numpy {n / t_np / 1e6:8.2f} Mtrials/s"
    if HAS_NUMBA:
        t0 = time.perf_counter()
        out = fn_numba(*args_numba, 0, n)
        t_nb = time.perf_counter() - t0
        # integer kernels agree exactly; the float kernel only up to
        # summation order (~1e-12 relative)
        match = "outputs match" if np.array_equal(
            np.asarray(ref), np.asarray(out)) or np.allclose(ref, out, rtol=1e-9) \
            else "OUTPUT MISMATCH"
        line += f" | numba {n / t_nb / 1e6:8.2f} Mtrials/s | x{t_np / t_nb:5.1f} | {match}"
    print(line)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=2_000_000)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    n, seed = args.n, args.seed

    rep = presets.single_photon_representation(30)
    cdf, signs, _ = signed_cdf(rep.coefficients)
    amps = np.asarray(rep.probe_set.amplitudes, dtype=float)
    state0 = rng.stream_state(seed)

    outcome_cdf = np.cumsum(
        np.stack([p.diagonal()[:8] / p.diagonal()[:8].sum()
                  for p in rep.probe_set.probes]), axis=1)
    outcome_cdf[:, -1] = 1.0

    bench("table_counts",
          numpy_impl.table_counts, HAS_NUMBA and numba_impl.table_counts,
          (cdf, outcome_cdf, signs, seed), (cdf, outcome_cdf, signs, state0), n)
    bench("hom_counts",
          numpy_impl.hom_counts, HAS_NUMBA and numba_impl.hom_counts,
          (cdf, amps, signs, 0.8, 0.9747, seed),
          (cdf, amps, signs, 0.8, 0.9747, state0), n)
    bench("g2_counts",
          numpy_impl.g2_counts, HAS_NUMBA and numba_impl.g2_counts,
          (cdf, amps, signs, 0.8, 0.001, 0.9747, 0.7, seed),
          (cdf, amps, signs, 0.8, 0.001, 0.9747, 0.7, state0), n)
    bench("g2_weights",
          numpy_impl.g2_weights, HAS_NUMBA and numba_impl.g2_weights,
          (cdf, amps, signs, 0.8, 0.001, 0.9747, 0.7, seed),
          (cdf, amps, signs, 0.8, 0.001, 0.9747, 0.7, state0), n)
    bench("bell_counts",
          numpy_impl.bell_counts, HAS_NUMBA and numba_impl.bell_counts,
          (cdf, amps, signs, 0.95, 0.587, 0.177, 2, seed),
          (cdf, amps, signs, 0.95, 0.587, 0.177, 2, state0), n)


if __name__ == "__main__":
    main()
