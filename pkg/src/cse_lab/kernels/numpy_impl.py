"""Vectorized numpy kernels (reference path).

Each kernel returns integer count tables, so results are exactly
reproducible and independent of chunking.  Counter slot layouts must
stay in lockstep with the numba implementations.
"""

from __future__ import annotations

import numpy as np

from .rng import uniforms

_CHUNK = 1 << 16


def _chunks(start, n):
    done = 0
    while done < n:
        size = min(_CHUNK, n - done)
        yield start + done, size
        done += size


def table_counts(probe_cdf, outcome_cdf, signs, seed, start, n):
    """Counts[sign, outcome] for table-driven measurement sampling.

    Slot layout per trial: 0 probe pick, 1 outcome pick.
    """
    n_out = outcome_cdf.shape[1]
    counts = np.zeros((2, n_out), dtype=np.int64)
    for base, size in _chunks(start, n):
        t = np.arange(base, base + size, dtype=np.uint64)
        u1 = uniforms(seed, t * np.uint64(2))
        u2 = uniforms(seed, t * np.uint64(2) + np.uint64(1))
        j = np.searchsorted(probe_cdf, u1, side="right")
        rows = outcome_cdf[j]
        out = (rows <= u2[:, None]).sum(axis=1)
        sidx = (1 - signs[j]) // 2
        np.add.at(counts, (sidx, out), 1)
    return counts


def hom_counts(probe_cdf, amps, signs, eta, f_amp, seed, start, n):
    """Signed coincidence counts for the two-detector interference test.

    Slot layout per trial: 0 probe a, 1 probe b, 2 phase, 3 click D1,
    4 click D2.  Returns counts[sign] of coincidences plus trial totals.
    """
    counts = np.zeros(2, dtype=np.int64)
    for base, size in _chunks(start, n):
        t = np.arange(base, base + size, dtype=np.uint64) * np.uint64(5)
        uk = uniforms(seed, t)
        ul = uniforms(seed, t + np.uint64(1))
        uphi = uniforms(seed, t + np.uint64(2))
        u1 = uniforms(seed, t + np.uint64(3))
        u2 = uniforms(seed, t + np.uint64(4))
        k = np.searchsorted(probe_cdf, uk, side="right")
        l = np.searchsorted(probe_cdf, ul, side="right")
        ak = amps[k]
        al = amps[l]
        phi = 2.0 * np.pi * uphi
        base_int = ak * ak + al * al
        cross = 2.0 * f_amp * ak * al * np.cos(phi)
        p_plus = np.exp(-eta / 2.0 * (base_int + cross))
        p_minus = np.exp(-eta / 2.0 * (base_int - cross))
        coinc = (u1 < 1.0 - p_plus) & (u2 < 1.0 - p_minus)
        sidx = (1 - signs[k] * signs[l]) // 2
        np.add.at(counts, sidx[coinc], 1)
    return counts


def g2_counts(probe_cdf, amps, signs, eta, eps, f_root, theta, seed, start, n):
    """Counts[sign, click-pattern] for the phase-scan interferometer.

    Patterns index (D1, D2) as 2*d1 + d2.  Slot layout matches
    hom_counts.
    """
    counts = np.zeros((2, 4), dtype=np.int64)
    ct, st = np.cos(theta), np.sin(theta)
    for base, size in _chunks(start, n):
        t = np.arange(base, base + size, dtype=np.uint64) * np.uint64(5)
        ui = uniforms(seed, t)
        uj = uniforms(seed, t + np.uint64(1))
        uphi = uniforms(seed, t + np.uint64(2))
        u1 = uniforms(seed, t + np.uint64(3))
        u2 = uniforms(seed, t + np.uint64(4))
        i = np.searchsorted(probe_cdf, ui, side="right")
        j = np.searchsorted(probe_cdf, uj, side="right")
        x = amps[i]
        y = amps[j]
        phi = 2.0 * np.pi * uphi
        cross = 2.0 * f_root * x * y * st * np.sin(phi)
        p_plus = (1.0 - eps) * np.exp(
            -eta / 2.0 * (x * x * (1.0 + ct) + y * y * (1.0 - ct) + cross))
        p_minus = (1.0 - eps) * np.exp(
            -eta / 2.0 * (x * x * (1.0 - ct) + y * y * (1.0 + ct) - cross))
        d1 = u1 < 1.0 - p_minus
        d2 = u2 < 1.0 - p_plus
        pattern = d1.astype(np.int64) * 2 + d2.astype(np.int64)
        sidx = (1 - signs[i] * signs[j]) // 2
        np.add.at(counts, (sidx, pattern), 1)
    return counts


def g2_weights(probe_cdf, amps, signs, eta, eps, f_root, theta, seed, start, n):
    """Analytic-value accumulation for the phase-scan estimator.

    Per trial the click probabilities (v11, v1, v2) given the sampled
    (probe pair, phase) are recorded directly instead of Bernoulli
    outcomes.  Returns float sums [signed v11, signed v1, signed v2,
    v11*v11, v11*v1, v11*v2, v1*v1, v1*v2, v2*v2]; chunks accumulate in
    fixed order so results are reproducible.  Slot layout matches
    g2_counts (the two click slots are burned to keep streams aligned).
    """
    sums = np.zeros(9)
    ct, st = np.cos(theta), np.sin(theta)
    for base, size in _chunks(start, n):
        t = np.arange(base, base + size, dtype=np.uint64) * np.uint64(5)
        ui = uniforms(seed, t)
        uj = uniforms(seed, t + np.uint64(1))
        uphi = uniforms(seed, t + np.uint64(2))
        i = np.searchsorted(probe_cdf, ui, side="right")
        j = np.searchsorted(probe_cdf, uj, side="right")
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
        s = (signs[i] * signs[j]).astype(np.float64)
        sums[0] += float(s @ v11)
        sums[1] += float(s @ v1)
        sums[2] += float(s @ v2)
        sums[3] += float(v11 @ v11)
        sums[4] += float(v11 @ v1)
        sums[5] += float(v11 @ v2)
        sums[6] += float(v1 @ v1)
        sums[7] += float(v1 @ v2)
        sums[8] += float(v2 @ v2)
    return sums


def bell_counts(probe_cdf, amps, signs, eta, mu1, mu2, rounds, seed, start, n):
    """Counts[sign, round-sum] for the displaced no-click correlation test.

    Per trial one probe pair (index, phase) is prepared ``rounds`` times;
    each copy gets fresh uniformly random displacement settings and
    click draws.  Round value is the setting-unbiased combination
    4*sigma*ia*ib - 2[x=beta]*ia - 2[y=gamma]*ib in [-4, 4]; the trial
    records the sum over rounds.  Slot layout per trial: 0 probe,
    1 phase, then per round (x, y, click a, click b).
    """
    width = 8 * rounds + 1
    counts = np.zeros((2, width), dtype=np.int64)
    draws = np.uint64(2 + 4 * rounds)
    sqrt2 = np.sqrt(2.0)
    for base, size in _chunks(start, n):
        t = np.arange(base, base + size, dtype=np.uint64) * draws
        uj = uniforms(seed, t)
        uphi = uniforms(seed, t + np.uint64(1))
        j = np.searchsorted(probe_cdf, uj, side="right")
        a = amps[j]
        phi = 2.0 * np.pi * uphi
        cphi = np.cos(phi)
        q1 = np.exp(-eta * (a * a / 2.0 + mu1 * mu1 - sqrt2 * a * mu1 * cphi))
        qm2 = np.exp(-eta * (a * a / 2.0 + mu2 * mu2 + sqrt2 * a * mu2 * cphi))
        total = np.zeros(size, dtype=np.int64)
        for r in range(rounds):
            off = np.uint64(2 + 4 * r)
            ux = uniforms(seed, t + off)
            uy = uniforms(seed, t + off + np.uint64(1))
            ua = uniforms(seed, t + off + np.uint64(2))
            ub = uniforms(seed, t + off + np.uint64(3))
            x = ux >= 0.5   # False: alpha=mu1, True: beta=-mu2
            y = uy >= 0.5   # False: gamma=mu2, True: delta=-mu1
            pa = np.where(x, qm2, q1)
            pb = np.where(y, q1, qm2)
            ia = (ua < pa).astype(np.int64)
            ib = (ub < pb).astype(np.int64)
            sigma = np.where(~x & y, -1, 1)
            total += (4 * sigma * ia * ib - 2 * x.astype(np.int64) * ia
                      - 2 * (~y).astype(np.int64) * ib)
        sidx = (1 - signs[j]) // 2
        np.add.at(counts, (sidx, total + 4 * rounds), 1)
    return counts
