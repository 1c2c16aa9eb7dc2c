"""Sampling kernel dispatch.

Two interchangeable engines produce bit-identical count tables from the
same seed: a numba JIT path for throughput and a vectorized numpy
fallback.  Selection: env var ``CSE_LAB_KERNELS`` in {"auto", "numba",
"numpy"}; "auto" (default) uses numba when importable.

``benchmarks/bench_kernels.py`` compares the two engines.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import numpy_impl, rng
from .rng import derive_seed, stream_state  # re-exported

_ENV = "CSE_LAB_KERNELS"
_THREAD_BLOCK = 1 << 20


def _load_numba_impl():
    from . import numba_impl
    return numba_impl


def active_engine() -> str:
    """Resolve the engine name from the environment ("numba"/"numpy")."""
    choice = os.environ.get(_ENV, "auto").lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        _load_numba_impl()
        return "numba"
    if choice != "auto":
        raise ValueError(f"{_ENV} must be auto, numba or numpy, got {choice!r}")
    try:
        _load_numba_impl()
        return "numba"
    except ImportError:
        return "numpy"


def _dispatch(name, probe_args, tail_args, seed, start, n, threads=1):
    engine = active_engine()
    if engine == "numba":
        impl = getattr(_load_numba_impl(), name)
        args = (*probe_args, *tail_args, stream_state(seed))
    else:
        impl = getattr(numpy_impl, name)
        args = (*probe_args, *tail_args, seed)
    if threads <= 1 or n <= _THREAD_BLOCK:
        return impl(*args, start, n)
    # fixed block grid: results do not depend on the thread count
    blocks = [(start + b, min(_THREAD_BLOCK, start + n - (start + b)))
              for b in range(0, n, _THREAD_BLOCK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda blk: impl(*args, blk[0], blk[1]), blocks))
    total = parts[0].copy()
    for p in parts[1:]:
        total += p
    return total


def table_counts(probe_cdf, outcome_cdf, signs, seed, n, start=0, threads=1):
    return _dispatch("table_counts", (probe_cdf, outcome_cdf, signs), (),
                     seed, start, n, threads)


def hom_counts(probe_cdf, amps, signs, eta, f_amp, seed, n, start=0, threads=1):
    return _dispatch("hom_counts", (probe_cdf, amps, signs),
                     (float(eta), float(f_amp)), seed, start, n, threads)


def g2_counts(probe_cdf, amps, signs, eta, eps, f_root, theta, seed, n,
              start=0, threads=1):
    return _dispatch("g2_counts", (probe_cdf, amps, signs),
                     (float(eta), float(eps), float(f_root), float(theta)),
                     seed, start, n, threads)


def g2_weights(probe_cdf, amps, signs, eta, eps, f_root, theta, seed, n,
               start=0, threads=1):
    return _dispatch("g2_weights", (probe_cdf, amps, signs),
                     (float(eta), float(eps), float(f_root), float(theta)),
                     seed, start, n, threads)


def bell_counts(probe_cdf, amps, signs, eta, mu1, mu2, rounds, seed, n,
                start=0, threads=1):
    return _dispatch("bell_counts", (probe_cdf, amps, signs),
                     (float(eta), float(mu1), float(mu2), int(rounds)),
                     seed, start, n, threads)


def signed_cdf(coefficients) -> tuple:
    """(probability cdf, sign array, zeta) for signed-mixture sampling."""
    c = np.asarray(coefficients, dtype=float)
    zeta = np.abs(c).sum()
    cdf = np.cumsum(np.abs(c) / zeta)
    cdf[-1] = 1.0
    signs = np.where(c >= 0, 1, -1).astype(np.int8)
    return cdf, signs, float(zeta)
