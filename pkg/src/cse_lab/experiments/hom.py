"""Two-photon interference dip: coincidence probabilities and emulation.

The model follows the bunching test with two detectors behind a
balanced splitter and a scalar mode overlap: for true single photons
the coincidence probability is (1 - f^2) eta^2 / 2 where f is the
amplitude overlap.  Probe pairs of phase-averaged coherent states give
a phase-integral coincidence formula; dark counts are not part of this
setup.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import math

import numpy as np

from .. import kernels
from ..decompose import Representation
from ..sampler import EmulationEstimate, required_samples
from .detector import DetectorModel

N_PHASE_QUAD = 256

_PHI = np.linspace(0.0, 2.0 * np.pi, N_PHASE_QUAD, endpoint=False)


def hom_true_p12(eta: float, f_amp: float) -> float:
    """Coincidence probability for true single-photon inputs."""
    if not 0.0 <= f_amp <= 1.0:
        raise ValueError("overlap must be in [0, 1]")
    return (1.0 - f_amp ** 2) * eta ** 2 / 2.0


def hom_probe_p12(alpha_k: float, alpha_l: float, eta: float, f_amp: float) -> float:
    """Coincidence probability for the coherent probe pair (k, l),
    phase-averaged by trapezoid quadrature (periodic, spectrally exact)."""
    base = alpha_k ** 2 + alpha_l ** 2
    cross = 2.0 * f_amp * alpha_k * alpha_l * np.cos(_PHI)
    p_plus = np.exp(-eta / 2.0 * (base + cross))
    p_minus = np.exp(-eta / 2.0 * (base - cross))
    return float(((1.0 - p_plus) * (1.0 - p_minus)).mean())


def _pair_matrix(rep: Representation, eta: float, f_amp: float) -> np.ndarray:
    amps = np.asarray(rep.probe_set.amplitudes, dtype=float)
    n = len(amps)
    out = np.empty((n, n))
    for k in range(n):
        for l in range(k, n):
            out[k, l] = out[l, k] = hom_probe_p12(amps[k], amps[l], eta, f_amp)
    return out


def hom_rep_p12(rep: Representation, eta: float, f_amp: float) -> float:
    """Coincidence probability of the emulated two-photon input,
    sum_{kl} c_k c_l p12^{kl} (deterministic quadrature, no sampling)."""
    p = _pair_matrix(rep, eta, f_amp)
    return float(rep.coefficients @ p @ rep.coefficients)


def hom_predicted_variance(rep: Representation, eta: float, f_amp: float) -> float:
    """Single-trial variance of the signed coincidence estimator."""
    p = _pair_matrix(rep, eta, f_amp)
    c_abs = np.abs(rep.coefficients)
    zeta2 = rep.zeta ** 2
    mean = hom_rep_p12(rep, eta, f_amp)
    return zeta2 * float(c_abs @ p @ c_abs) - mean ** 2


def hom_emulation(rep: Representation, det: DetectorModel, f_amp: float,
                  n_samples: int, seed: int, threads: int = 1) -> EmulationEstimate:
    """Signed Monte Carlo over probe pairs with per-trial random phase."""
    cdf, signs, zeta1 = kernels.signed_cdf(rep.coefficients)
    amps = np.asarray(rep.probe_set.amplitudes, dtype=float)
    counts = kernels.hom_counts(cdf, amps, signs, det.eta, f_amp, seed,
                                int(n_samples), threads=threads)
    zeta2 = zeta1 ** 2
    n = float(n_samples)
    mean = zeta2 * float(counts[0] - counts[1]) / n
    second = zeta2 ** 2 * float(counts[0] + counts[1]) / n
    var_emp = max(second - mean ** 2, 0.0)
    return EmulationEstimate(
        mean=mean,
        std_error=math.sqrt(var_emp / n),
        n_samples=int(n_samples),
        seed=int(seed),
        variance_empirical=var_emp,
        variance_predicted=hom_predicted_variance(rep, det.eta, f_amp),
    )


@dataclass
class HomReport:
    eta: float
    f_amp: float
    p12_true: float
    p12_rep: float
    emulated_mean: float
    emulated_std_error: float
    variance_predicted: float
    variance_empirical: float
    required_n: int
    n_samples: int
    seed: int

    def to_dict(self):
        return asdict(self)


def hom_experiment(rep: Representation, det: DetectorModel, f_amp: float,
                   n_samples: int, seed: int, threads: int = 1) -> HomReport:
    est = hom_emulation(rep, det, f_amp, n_samples, seed, threads=threads)
    p_true = hom_true_p12(det.eta, f_amp)
    p_rep = hom_rep_p12(rep, det.eta, f_amp)
    # discrimination target: the dip against distinguishable photons (f = 0)
    halfwidth = abs(hom_rep_p12(rep, det.eta, 0.0) - p_rep)
    return HomReport(
        eta=det.eta,
        f_amp=f_amp,
        p12_true=p_true,
        p12_rep=p_rep,
        emulated_mean=est.mean,
        emulated_std_error=est.std_error,
        variance_predicted=est.variance_predicted,
        variance_empirical=est.variance_empirical,
        required_n=required_samples(est.variance_predicted, halfwidth),
        n_samples=int(n_samples),
        seed=int(seed),
    )
