"""Counter-based uniform stream shared by all sampling kernels.

The generator is SplitMix64 driven as a pure counter: draw ``k`` of a
stream is ``mix(state0 + (k+1) * GOLDEN)``.  Because each trial owns a
fixed block of counter slots, any partition of trials across chunks,
threads or engines reproduces the identical stream, which is what makes
the kernel outputs independent of worker count.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z):
    """SplitMix64 finalizer; accepts uint64 scalars or arrays.

    uint64 wraparound is the intended arithmetic.
    """
    z = np.uint64(z) if np.isscalar(z) else z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def stream_state(seed: int) -> np.uint64:
    """Scrambled base state for a 64-bit seed."""
    return mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ GOLDEN)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for substream ``index`` (per scan point, per job)."""
    with np.errstate(over="ignore"):
        child = mix64(stream_state(seed) + np.uint64(index + 1) * _MIX2)
    return int(child)


def uniforms(seed: int, counters: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) doubles at the given counter slots (vectorized)."""
    with np.errstate(over="ignore"):
        state = stream_state(seed) + (counters.astype(np.uint64) + np.uint64(1)) * GOLDEN
    bits = mix64(state)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53
