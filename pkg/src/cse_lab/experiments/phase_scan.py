"""Phase estimation with the two-photon entangled state: normalized
coincidence rate g2(theta) scan, closed form versus signed emulation.

Two single photons interfere at a splitter, pick up a relative phase
theta, recombine, and feed two detectors with efficiency eta and
dark-count epsilon.  ``f`` here is the intensity overlap; amplitudes
carry sqrt(f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .. import kernels
from ..decompose import Representation
from .detector import DetectorModel

N_PHASE_QUAD = 256
_PHI = np.linspace(0.0, 2.0 * np.pi, N_PHASE_QUAD, endpoint=False)


def g2_closed_form(theta: float, det: DetectorModel, f: float) -> float:
    """Normalized coincidence rate for the true two-photon input."""
    eta, eps = det.eta, det.epsilon
    z = (1.0 + f) * eta * math.cos(2.0 * theta)
    num = 16.0 * (eta * (1.0 - eps) * (z + eta * (3.0 - f - 4.0 * eps) + 8.0 * eps)
                  + 4.0 * eps ** 2)
    den = (eta * (1.0 - eps) * z + eta * (1.0 - eps) * (8.0 - f * eta - eta)
           + 8.0 * eps) ** 2
    return num / den


def ideal_both_photons_probability(theta: float, f: float) -> float:
    """Lossless reference: both photons in one arm."""
    return (1.0 + f) / 4.0 * math.sin(theta) ** 2


def ideal_coincidence_probability(theta: float, f: float) -> float:
    """Lossless reference: one photon in each arm."""
    return (1.0 - f) / 2.0 + (1.0 + f) / 2.0 * math.cos(theta) ** 2


def _no_click_probs(x, y, theta, phi, det: DetectorModel, f: float):
    ct, st = math.cos(theta), math.sin(theta)
    froot = math.sqrt(f)
    cross = 2.0 * froot * x * y * st * np.sin(phi)
    p_plus = (1.0 - det.epsilon) * np.exp(
        -det.eta / 2.0 * (x * x * (1.0 + ct) + y * y * (1.0 - ct) + cross))
    p_minus = (1.0 - det.epsilon) * np.exp(
        -det.eta / 2.0 * (x * x * (1.0 - ct) + y * y * (1.0 + ct) - cross))
    return p_plus, p_minus


def probe_click_probabilities(rep: Representation, theta: float,
                              det: DetectorModel, f: float):
    """(p11, p1., p.1) of the emulated input by phase quadrature."""
    amps = np.asarray(rep.probe_set.amplitudes, dtype=float)
    c = rep.coefficients
    n = len(amps)
    p11 = np.empty((n, n))
    p1_ = np.empty((n, n))
    p_1 = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            pp, pm = _no_click_probs(amps[i], amps[j], theta, _PHI, det, f)
            p11[i, j] = ((1.0 - pm) * (1.0 - pp)).mean()
            p1_[i, j] = (1.0 - pm).mean()
            p_1[i, j] = (1.0 - pp).mean()
    return (float(c @ p11 @ c), float(c @ p1_ @ c), float(c @ p_1 @ c))


def g2_probe_value(rep: Representation, theta: float, det: DetectorModel,
                   f: float) -> float:
    p11, p1_, p_1 = probe_click_probabilities(rep, theta, det, f)
    return p11 / (p1_ * p_1)


@dataclass
class G2Point:
    theta: float
    g2_true: float
    g2_emulated: float
    sigma: float

    def to_dict(self):
        return asdict(self)


def g2_point_emulation(rep: Representation, theta: float, det: DetectorModel,
                       f: float, n_samples: int, seed: int,
                       threads: int = 1, protocol: str = "analytic") -> G2Point:
    """One scan point: signed sampling, ratio estimate and its
    delta-method standard error.

    ``protocol`` = "analytic" records the exact click probabilities of
    each sampled (probe pair, phase); "click" additionally samples the
    detector outcomes, which needs paper-scale sample counts before the
    ratio's denominators resolve.
    """
    cdf, signs, zeta1 = kernels.signed_cdf(rep.coefficients)
    amps = np.asarray(rep.probe_set.amplitudes, dtype=float)
    zeta2 = zeta1 ** 2
    n = float(n_samples)
    if protocol == "analytic":
        sums = kernels.g2_weights(cdf, amps, signs, det.eta, det.epsilon,
                                  math.sqrt(f), theta, seed, int(n_samples),
                                  threads=threads)
        s11, s1_, s_1 = zeta2 * sums[:3] / n
        e11, e11_1, e11_2, e1, e1_2, e2 = zeta2 ** 2 * sums[3:] / n
        m = np.array([
            [e11, e11_1, e11_2],
            [e11_1, e1, e1_2],
            [e11_2, e1_2, e2],
        ])
    elif protocol == "click":
        counts = kernels.g2_counts(cdf, amps, signs, det.eta, det.epsilon,
                                   math.sqrt(f), theta, seed, int(n_samples),
                                   threads=threads)
        signed = (counts[0] - counts[1]).astype(float)
        total = (counts[0] + counts[1]).astype(float)
        # patterns: index 2*d1 + d2
        s11 = zeta2 * signed[3] / n
        s1_ = zeta2 * (signed[2] + signed[3]) / n
        s_1 = zeta2 * (signed[1] + signed[3]) / n
        # indicator products collapse onto pattern totals: ind1*ind2 = ind11
        e11 = zeta2 ** 2 * total[3] / n
        e1 = zeta2 ** 2 * (total[2] + total[3]) / n
        e2 = zeta2 ** 2 * (total[1] + total[3]) / n
        m = np.array([
            [e11, e11, e11],
            [e11, e1, e11],
            [e11, e11, e2],
        ])
    else:
        raise ValueError(f"unknown protocol {protocol!r}")

    g2_ref = g2_closed_form(theta, det, f)
    if s1_ <= 0.0 or s_1 <= 0.0:
        # denominators not resolved at this sample size; report an
        # uninformative point rather than a bogus ratio
        return G2Point(theta=float(theta), g2_true=g2_ref,
                       g2_emulated=float("nan"), sigma=float("inf"))
    g2 = s11 / (s1_ * s_1)
    mu = np.array([s11, s1_, s_1])
    cov = (m - np.outer(mu, mu)) / n
    grad = np.array([1.0 / (s1_ * s_1), -g2 / s1_, -g2 / s_1])
    var_g2 = float(grad @ cov @ grad)
    return G2Point(
        theta=float(theta),
        g2_true=g2_ref,
        g2_emulated=float(g2),
        sigma=math.sqrt(max(var_g2, 0.0)),
    )


def g2_scan(rep: Representation, thetas, det: DetectorModel, f: float,
            n_per_point: int, seed: int, threads: int = 1,
            protocol: str = "analytic"):
    """Emulated scan; each point runs on an independent derived stream."""
    return [
        g2_point_emulation(rep, th, det, f, n_per_point,
                           kernels.derive_seed(seed, i), threads=threads,
                           protocol=protocol)
        for i, th in enumerate(thetas)
    ]
