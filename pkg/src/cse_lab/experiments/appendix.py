"""Statistical self-checks: systematic-error bound, estimator
convergence rate, multinomial sampling MSE and the probe-placement
residual versus a finite-difference gradient."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .. import fock
from ..decompose import (
    Representation,
    optimality_residual,
    reconstruct,
    systematic_error_bound,
)
from ..sampler import MeasurementModel, SignedMixture, emulate_expectation, sampling_mse


def _random_state(rng, dim) -> fock.DensityMatrix:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return fock.DensityMatrix(m / m.trace().real, (dim,))


def systematic_bound_suite(n_trials: int = 500, dim: int = 6, seed: int = 0):
    """Check |Tr{A (rho - rho_true)}| <= 2M sqrt(1-F) on random triples.

    Returns (max lhs - bound, list of (lhs, bound)).
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    pairs = []
    for _ in range(n_trials):
        rho = _random_state(rng, dim)
        sigma = _random_state(rng, dim)
        h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (h + h.conj().T) / 2.0
        bound_m = float(np.abs(np.linalg.eigvalsh(h)).max())
        lhs = abs(np.einsum("ij,ji->", h, rho.matrix - sigma.matrix).real)
        rhs = systematic_error_bound(fock.fidelity(rho, sigma), bound_m)
        pairs.append((lhs, rhs))
        worst = max(worst, lhs - rhs)
    return worst, pairs


def convergence_slope(rep: Representation, model: MeasurementModel,
                      n_values, replicas: int, seed: int, threads: int = 1):
    """Slope of log RMS error versus log N for the signed estimator.

    The exact expectation is the signed sum of per-probe means; RMS is
    taken over independent derived seeds at each N.
    """
    mix = SignedMixture.from_representation(rep)
    exact = float(rep.coefficients @ model.probe_mean())
    rms = []
    stream = 0
    for n in n_values:
        errs = []
        for _ in range(replicas):
            from ..kernels import derive_seed
            est = emulate_expectation(mix, model, int(n),
                                      derive_seed(seed, stream), threads=threads)
            errs.append((est.mean - exact) ** 2)
            stream += 1
        rms.append(math.sqrt(sum(errs) / len(errs)))
    slope = np.polyfit(np.log10(np.asarray(n_values, dtype=float)),
                       np.log10(np.asarray(rms)), 1)[0]
    return float(slope), rms


def multinomial_mse_suite(rep: Representation, n_s: int, replicas: int,
                          seed: int):
    """Empirical Tr{(rho_hat - rho)^2} over multinomial samplings versus
    the closed forms.  Returns (empirical, mse_general, mse_pure)."""
    rng = np.random.default_rng(seed)
    mats = [p.matrix for p in rep.probe_set.probes]
    k = len(mats)
    gram = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            gram[i, j] = gram[j, i] = np.einsum("ij,ji->", mats[i], mats[j]).real
    c = rep.coefficients
    zeta = rep.zeta
    p = np.abs(c) / zeta
    s = np.sign(c)
    acc = 0.0
    for _ in range(replicas):
        nu = rng.multinomial(n_s, p) / n_s
        d = zeta * nu * s - c
        acc += float(d @ gram @ d)
    general, pure = sampling_mse(rep, n_s)
    return acc / replicas, general, pure


def residual_fd_check(rep: Representation, h: float = 1e-5):
    """Compare the commutator residual against central finite differences
    of the squared distance D = Tr{(rho - rho_true)^2} in each probe
    amplitude (Wirtinger gradient dD/d(conj a_j) = 2 c_j r_j).

    Returns (analytic residuals, finite-difference residuals, max abs diff).
    """
    analytic = optimality_residual(rep)
    target = rep.target_ref.matrix
    dim = rep.probe_set.dim
    amps = [complex(a) for a in rep.probe_set.amplitudes]
    c = rep.coefficients

    def distance(alphas):
        m = sum(cj * fock.coherent_state(a, dim).matrix
                for cj, a in zip(c, alphas))
        d = m - target
        return float(np.einsum("ij,ji->", d, d).real)

    fd = np.empty(len(amps), dtype=complex)
    for j in range(len(amps)):
        for part, delta in ((0, h), (1, 1j * h)):
            plus = list(amps)
            minus = list(amps)
            plus[j] = amps[j] + delta
            minus[j] = amps[j] - delta
            g = (distance(plus) - distance(minus)) / (2.0 * h)
            if part == 0:
                g_re = g
            else:
                g_im = g
        fd[j] = (g_re + 1j * g_im) / (4.0 * c[j])
    return analytic, fd, float(np.abs(analytic - fd).max())


@dataclass
class AppendixReport:
    bound_max_violation: float
    convergence_slope: float
    mse_empirical: float
    mse_formula: float
    mse_pure_extra_term: float
    residual_max_deviation: float

    def to_dict(self):
        return asdict(self)
