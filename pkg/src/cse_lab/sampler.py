"""Signed-mixture Monte Carlo estimation and its variance accounting.

A representation with negative coefficients is sampled as a positive
mixture over |c_j| with a +/-1 ancilla label; measurement results are
combined as (zeta/N) * sum_k sgn(c_k) A_k.  The price is an excess
variance over direct measurement, computed here in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .decompose import Representation
from .errors import MixedProbeError
from .fock import Observable

STD_CONFIDENCE_SIGMAS = 3.0


@dataclass
class SignedMixture:
    """Sampling distribution p_j = |c_j| / zeta with ancilla signs."""

    probabilities: np.ndarray
    signs: np.ndarray
    zeta: float
    probe_refs: np.ndarray

    @classmethod
    def from_coefficients(cls, coefficients) -> "SignedMixture":
        c = np.asarray(coefficients, dtype=float)
        zeta = float(np.abs(c).sum())
        return cls(
            probabilities=np.abs(c) / zeta,
            signs=np.where(c >= 0, 1, -1).astype(np.int8),
            zeta=zeta,
            probe_refs=np.arange(len(c)),
        )

    @classmethod
    def from_representation(cls, rep: Representation) -> "SignedMixture":
        return cls.from_coefficients(rep.coefficients)

    def cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        return cdf

    def validate(self):
        if abs(self.probabilities.sum() - 1.0) > 1e-9:
            raise ValueError("mixture probabilities must sum to 1")
        signed = self.zeta * float(self.signs @ self.probabilities)
        if abs(signed - 1.0) > 1e-9:
            raise ValueError("signed mixture does not encode zeta+ - zeta- = 1")
        return self


def sample_signed(mix: SignedMixture, rng: np.random.Generator):
    """One draw: (probe index, ancilla sign)."""
    idx = int(np.searchsorted(mix.cdf(), rng.random(), side="right"))
    return mix.probe_refs[idx], int(mix.signs[idx])


class MeasurementModel:
    """Finite-outcome measurement: values a_l and per-probe distributions."""

    def __init__(self, outcome_values, probabilities):
        self.outcome_values = np.asarray(outcome_values, dtype=float)
        self.probabilities = np.asarray(probabilities, dtype=float)
        if self.probabilities.ndim != 2 or \
                self.probabilities.shape[1] != len(self.outcome_values):
            raise ValueError("probabilities must be (n_probes, n_outcomes)")
        rows = self.probabilities.sum(axis=1)
        if np.abs(rows - 1.0).max() > 1e-10:
            raise ValueError("each outcome distribution must sum to 1")
        if self.probabilities.min() < -1e-12:
            raise ValueError("negative outcome probability")

    @property
    def n_probes(self) -> int:
        return self.probabilities.shape[0]

    def outcome_probabilities(self, probe_index: int) -> np.ndarray:
        return self.probabilities[probe_index]

    def outcome_cdf(self) -> np.ndarray:
        cdf = np.cumsum(np.clip(self.probabilities, 0.0, None), axis=1)
        cdf[:, -1] = 1.0
        return cdf

    def probe_mean(self) -> np.ndarray:
        return self.probabilities @ self.outcome_values

    def probe_second_moment(self) -> np.ndarray:
        return self.probabilities @ self.outcome_values ** 2

    # -- constructors -------------------------------------------------

    @classmethod
    def from_diagonal_observable(cls, obs: Observable, probe_set) -> "MeasurementModel":
        """Projective measurement of a Fock-diagonal observable."""
        if not obs.is_diagonal():
            raise ValueError("observable must be diagonal in the Fock basis")
        values = obs.diagonal()
        dim = len(values)
        probs = np.stack([p.diagonal()[:dim] for p in probe_set.probes])
        probs = probs / probs.sum(axis=1, keepdims=True)
        return cls(values, probs)

    @classmethod
    def from_povm(cls, povm, values, probe_set) -> "MeasurementModel":
        """POVM outcomes with assigned values (e.g. fitted witness weights)."""
        probs = np.empty((len(probe_set.probes), len(povm)))
        for j, p in enumerate(probe_set.probes):
            d = p.diagonal()
            for m, el in enumerate(povm):
                probs[j, m] = float(el.diagonal()[: len(d)] @ d)
        probs = probs / probs.sum(axis=1, keepdims=True)
        return cls(np.asarray(values, dtype=float), probs)

    @classmethod
    def expectation_valued(cls, per_probe_expectations) -> "MeasurementModel":
        """Degenerate model whose outcome for probe j is its exact
        expectation value (probe-sampling noise only)."""
        vals = np.asarray(per_probe_expectations, dtype=float)
        return cls(vals, np.eye(len(vals)))


@dataclass
class EmulationEstimate:
    """Monte Carlo estimate with empirical error accounting."""

    mean: float
    std_error: float
    n_samples: int
    seed: int
    variance_empirical: float
    variance_predicted: float = None

    def within(self, reference: float, n_sigmas: float = STD_CONFIDENCE_SIGMAS) -> bool:
        return abs(self.mean - reference) <= n_sigmas * self.std_error


def emulate_expectation(mix: SignedMixture, model: MeasurementModel,
                        n_samples: int, seed: int, threads: int = 1) -> EmulationEstimate:
    """Estimate <A> = (zeta/N) sum_k sgn(c_k) A_k by table-driven sampling."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if model.n_probes != len(mix.probabilities):
        raise ValueError("model and mixture probe counts differ")
    counts = kernels.table_counts(mix.cdf(), model.outcome_cdf(), mix.signs,
                                  seed, int(n_samples), threads=threads)
    vals = model.outcome_values
    n = float(n_samples)
    signed = (counts[0] - counts[1]).astype(float)
    total = (counts[0] + counts[1]).astype(float)
    mean = mix.zeta * float(vals @ signed) / n
    second = mix.zeta ** 2 * float((vals ** 2) @ total) / n
    var_emp = max(second - mean ** 2, 0.0)
    return EmulationEstimate(
        mean=mean,
        std_error=math.sqrt(var_emp / n),
        n_samples=int(n_samples),
        seed=int(seed),
        variance_empirical=var_emp,
    )


@dataclass
class ExcessVariance:
    delta_ab: float
    delta_a: float
    excess: float


def excess_variance(rep: Representation, measured) -> ExcessVariance:
    """Variance penalty of signed emulation for an observable.

    ``measured`` is either an Observable (projective measurement; the
    second moment uses the operator square) or a MeasurementModel
    (second moment over its outcome table).  Returns the emulation
    variance Delta_AB, the direct-measurement variance Delta_A of the
    reconstructed state, and their difference
    2 zeta+ zeta- (Tr{rho+ A^2} + Tr{rho- A^2}) >= 0.
    """
    c = rep.coefficients
    if isinstance(measured, Observable):
        a_sq = measured.matrix @ measured.matrix
        m1 = np.array([np.einsum("ij,ji->", measured.matrix, p.matrix).real
                       for p in rep.probe_set.probes])
        m2 = np.array([np.einsum("ij,ji->", a_sq, p.matrix).real
                       for p in rep.probe_set.probes])
    elif isinstance(measured, MeasurementModel):
        m1 = measured.probe_mean()
        m2 = measured.probe_second_moment()
    else:
        raise TypeError("measured must be an Observable or MeasurementModel")

    zp, zm, zeta = rep.zeta_plus, rep.zeta_minus, rep.zeta
    mean = float(c @ m1)
    t_plus = float(c[c > 0] @ m2[c > 0])       # zeta+ * Tr{rho+ A^2}
    t_minus = float(-c[c < 0] @ m2[c < 0])     # zeta- * Tr{rho- A^2}
    delta_ab = zeta * (t_plus + t_minus) - mean ** 2
    delta_a = (t_plus - t_minus) - mean ** 2
    excess = 2.0 * (zm * t_plus + zp * t_minus)
    return ExcessVariance(delta_ab=delta_ab, delta_a=delta_a, excess=excess)


def required_samples(variance: float, target_halfwidth: float,
                     confidence_sigmas: float = STD_CONFIDENCE_SIGMAS) -> int:
    """Smallest N with confidence_sigmas * sqrt(variance / N) <= halfwidth."""
    if variance < 0 or target_halfwidth <= 0 or confidence_sigmas <= 0:
        raise ValueError("variance >= 0 and positive halfwidth/sigmas required")
    if variance == 0:
        return 1
    return max(1, math.ceil(variance * (confidence_sigmas / target_halfwidth) ** 2))


def sampling_mse(rep: Representation, n_s: int, require_pure: bool = False):
    """Mean squared error of state sampling with N_s multinomial draws.

    Returns (mse_general, mse_pure); the pure-probe closed form
    [(1 - Tr rho^2) + (zeta^2 - 1)] / N_s is None for mixed probes
    unless ``require_pure`` (which then raises MixedProbeError).
    """
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    mats = [p.matrix for p in rep.probe_set.probes]
    k = len(mats)
    gram = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            val = np.einsum("ij,ji->", mats[i], mats[j]).real
            gram[i, j] = gram[j, i] = val
    c = rep.coefficients
    purity_recon = float(c @ gram @ c)
    general = (rep.zeta * float(np.abs(c) @ np.diag(gram)) - purity_recon) / n_s
    all_pure = bool(np.abs(np.diag(gram) - 1.0).max() < 1e-9)
    if not all_pure:
        if require_pure:
            raise MixedProbeError("pure-probe MSE requested with mixed probes")
        return general, None
    pure = ((1.0 - purity_recon) + (rep.zeta ** 2 - 1.0)) / n_s
    return general, pure
