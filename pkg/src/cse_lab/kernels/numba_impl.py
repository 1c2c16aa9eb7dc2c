"""Numba JIT kernels; stream- and count-identical to numpy_impl.

Importing this module requires numba.  Every expression that feeds a
comparison mirrors the numpy implementation's evaluation order so both
engines produce the same integer count tables for the same seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _uniform(state0, counter):
    z = state0 + (counter + np.uint64(1)) * GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return np.float64(z >> np.uint64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def _pick(cdf, u):
    # first index with cdf[idx] > u (searchsorted side='right')
    lo = 0
    hi = cdf.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def table_counts(probe_cdf, outcome_cdf, signs, state0, start, n):
    n_out = outcome_cdf.shape[1]
    counts = np.zeros((2, n_out), dtype=np.int64)
    for t in range(n):
        ctr = np.uint64(start + t) * np.uint64(2)
        u1 = _uniform(state0, ctr)
        u2 = _uniform(state0, ctr + np.uint64(1))
        j = _pick(probe_cdf, u1)
        out = _pick(outcome_cdf[j], u2)
        sidx = (1 - signs[j]) // 2
        counts[sidx, out] += 1
    return counts


@njit(cache=True, nogil=True)
def hom_counts(probe_cdf, amps, signs, eta, f_amp, state0, start, n):
    counts = np.zeros(2, dtype=np.int64)
    for t in range(n):
        ctr = np.uint64(start + t) * np.uint64(5)
        uk = _uniform(state0, ctr)
        ul = _uniform(state0, ctr + np.uint64(1))
        uphi = _uniform(state0, ctr + np.uint64(2))
        u1 = _uniform(state0, ctr + np.uint64(3))
        u2 = _uniform(state0, ctr + np.uint64(4))
        k = _pick(probe_cdf, uk)
        l = _pick(probe_cdf, ul)
        ak = amps[k]
        al = amps[l]
        phi = 2.0 * np.pi * uphi
        base_int = ak * ak + al * al
        cross = 2.0 * f_amp * ak * al * np.cos(phi)
        p_plus = np.exp(-eta / 2.0 * (base_int + cross))
        p_minus = np.exp(-eta / 2.0 * (base_int - cross))
        if (u1 < 1.0 - p_plus) and (u2 < 1.0 - p_minus):
            sidx = (1 - signs[k] * signs[l]) // 2
            counts[sidx] += 1
    return counts


@njit(cache=True, nogil=True)
def g2_counts(probe_cdf, amps, signs, eta, eps, f_root, theta, state0, start, n):
    counts = np.zeros((2, 4), dtype=np.int64)
    ct = np.cos(theta)
    st = np.sin(theta)
    for t in range(n):
        ctr = np.uint64(start + t) * np.uint64(5)
        ui = _uniform(state0, ctr)
        uj = _uniform(state0, ctr + np.uint64(1))
        uphi = _uniform(state0, ctr + np.uint64(2))
        u1 = _uniform(state0, ctr + np.uint64(3))
        u2 = _uniform(state0, ctr + np.uint64(4))
        i = _pick(probe_cdf, ui)
        j = _pick(probe_cdf, uj)
        x = amps[i]
        y = amps[j]
        phi = 2.0 * np.pi * uphi
        cross = 2.0 * f_root * x * y * st * np.sin(phi)
        p_plus = (1.0 - eps) * np.exp(
            -eta / 2.0 * (x * x * (1.0 + ct) + y * y * (1.0 - ct) + cross))
        p_minus = (1.0 - eps) * np.exp(
            -eta / 2.0 * (x * x * (1.0 - ct) + y * y * (1.0 + ct) - cross))
        d1 = 1 if u1 < 1.0 - p_minus else 0
        d2 = 1 if u2 < 1.0 - p_plus else 0
        sidx = (1 - signs[i] * signs[j]) // 2
        counts[sidx, d1 * 2 + d2] += 1
    return counts


@njit(cache=True, nogil=True)
def g2_weights(probe_cdf, amps, signs, eta, eps, f_root, theta, state0, start, n):
    sums = np.zeros(9)
    ct = np.cos(theta)
    st = np.sin(theta)
    for t in range(n):
        ctr = np.uint64(start + t) * np.uint64(5)
        ui = _uniform(state0, ctr)
        uj = _uniform(state0, ctr + np.uint64(1))
        uphi = _uniform(state0, ctr + np.uint64(2))
        i = _pick(probe_cdf, ui)
        j = _pick(probe_cdf, uj)
        x = amps[i]
        y = amps[j]
        phi = 2.0 * np.pi * uphi
        cross = 2.0 * f_root * x * y * st * np.sin(phi)
        p_plus = (1.0 - eps) * np.exp(
            -eta / 2.0 * (x * x * (1.0 + ct) + y * y * (1.0 - ct) + cross))
        p_minus = (1.0 - eps) * np.exp(
            -eta / 2.0 * (x * x * (1.0 - ct) + y * y * (1.0 + ct) - cross))
        v1 = 1.0 - p_minus
        v2 = 1.0 - p_plus
        v11 = v1 * v2
        s = np.float64(signs[i] * signs[j])
        sums[0] += s * v11
        sums[1] += s * v1
        sums[2] += s * v2
        sums[3] += v11 * v11
        sums[4] += v11 * v1
        sums[5] += v11 * v2
        sums[6] += v1 * v1
        sums[7] += v1 * v2
        sums[8] += v2 * v2
    return sums


@njit(cache=True, nogil=True)
def bell_counts(probe_cdf, amps, signs, eta, mu1, mu2, rounds, state0, start, n):
    width = 8 * rounds + 1
    counts = np.zeros((2, width), dtype=np.int64)
    draws = np.uint64(2 + 4 * rounds)
    sqrt2 = np.sqrt(2.0)
    for t in range(n):
        ctr = np.uint64(start + t) * draws
        uj = _uniform(state0, ctr)
        uphi = _uniform(state0, ctr + np.uint64(1))
        j = _pick(probe_cdf, uj)
        a = amps[j]
        phi = 2.0 * np.pi * uphi
        cphi = np.cos(phi)
        q1 = np.exp(-eta * (a * a / 2.0 + mu1 * mu1 - sqrt2 * a * mu1 * cphi))
        qm2 = np.exp(-eta * (a * a / 2.0 + mu2 * mu2 + sqrt2 * a * mu2 * cphi))
        total = 0
        for r in range(rounds):
            off = np.uint64(2 + 4 * r)
            ux = _uniform(state0, ctr + off)
            uy = _uniform(state0, ctr + off + np.uint64(1))
            ua = _uniform(state0, ctr + off + np.uint64(2))
            ub = _uniform(state0, ctr + off + np.uint64(3))
            x = 1 if ux >= 0.5 else 0
            y = 1 if uy >= 0.5 else 0
            pa = qm2 if x == 1 else q1
            pb = q1 if y == 1 else qm2
            ia = 1 if ua < pa else 0
            ib = 1 if ub < pb else 0
            sigma = -1 if (x == 0 and y == 1) else 1
            total += 4 * sigma * ia * ib - 2 * x * ia - 2 * (1 - y) * ib
        sidx = (1 - signs[j]) // 2
        counts[sidx, total + 4 * rounds] += 1
    return counts
