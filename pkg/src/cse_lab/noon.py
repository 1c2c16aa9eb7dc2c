"""Two-mode path-entangled state construction from beamsplitter algebra.

A balanced beamsplitter with a tunable phase maps |n, m> onto a
superposition over |j, n+m-j> with analytically known coefficients.
Averaging the phase over an N-point grid cancels all coherences except
the |N,0><0,N| pair, which yields an exact signed decomposition of the
N-photon path-entangled superposition state into beamsplitter states
plus two-mode Fock-product corrections.  Each ingredient is then
emulated with phase-averaged coherent probes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, pi, sqrt

import numpy as np
from scipy.special import gammaln

from . import fock
from .decompose import SCHEMA_VERSION, Representation
from .errors import CutoffTooSmallError, DimensionMismatchError
from .fock import DensityMatrix

RECONSTRUCTION_TOL = 1e-10


def r_coefficient(n: int, m: int, j: int) -> float:
    """Beamsplitter amplitude of |j, n+m-j> from input |n, m| (phase 0)."""
    if n < 0 or m < 0:
        raise ValueError("photon numbers must be nonnegative")
    total = n + m
    if not 0 <= j <= total:
        raise ValueError(f"output index {j} outside [0, {total}]")
    acc = 0.0
    log_pref = 0.5 * (gammaln(n + 1) + gammaln(m + 1)
                      + gammaln(j + 1) + gammaln(total - j + 1))
    for k in range(max(0, j - m), min(n, j) + 1):
        log_term = log_pref - (gammaln(k + 1) + gammaln(n - k + 1)
                               + gammaln(j - k + 1) + gammaln(m - j + k + 1))
        acc += (-1.0) ** (m - j + k) * np.exp(log_term)
    return acc * 2.0 ** (-total / 2.0)


def beamsplitter_amplitudes(n: int, m: int, theta: float) -> np.ndarray:
    """Output amplitudes A_j = R_nm^(j) e^{-i theta j} over j = 0..n+m."""
    total = n + m
    r = np.array([r_coefficient(n, m, j) for j in range(total + 1)])
    return r * np.exp(-1j * theta * np.arange(total + 1))


def beamsplitter_state(n: int, m: int, theta: float, dim: int = None) -> DensityMatrix:
    """Pure two-mode state of |n, m> after the phased balanced splitter."""
    if dim is None:
        dim = fock.default_cutoff()
    total = n + m
    if total >= dim:
        raise CutoffTooSmallError(f"need dim > {total}, got {dim}")
    amps = beamsplitter_amplitudes(n, m, theta)
    v = np.zeros(dim * dim, dtype=complex)
    for j in range(total + 1):
        v[j * dim + (total - j)] = amps[j]
    return DensityMatrix(np.outer(v, v.conj()), (dim, dim))


def beamsplitter_unitary(theta: float, dim: int) -> np.ndarray:
    """Matrix of the splitter on the truncated two-mode space.

    Exactly unitary on the sector with total photon number < dim;
    columns with larger totals are truncated.
    """
    u = np.zeros((dim * dim, dim * dim), dtype=complex)
    for n in range(dim):
        for m in range(dim):
            amps = beamsplitter_amplitudes(n, m, theta)
            col = n * dim + m
            for j, a in enumerate(amps):
                if j < dim and (n + m - j) < dim and (n + m - j) >= 0:
                    u[j * dim + (n + m - j), col] = a
    return u


def path_entangled_state(n_photons: int, dim: int = None) -> DensityMatrix:
    """(|N,0> - |0,N>)/sqrt(2) as a two-mode projector."""
    if dim is None:
        dim = fock.default_cutoff()
    if n_photons >= dim:
        raise CutoffTooSmallError(f"need dim > {n_photons}, got {dim}")
    v = np.zeros(dim * dim, dtype=complex)
    v[n_photons * dim] = 1.0 / sqrt(2.0)
    v[n_photons] = -1.0 / sqrt(2.0)
    return DensityMatrix(np.outer(v, v.conj()), (dim, dim))


@dataclass
class NoonDecomposition:
    """Exact signed decomposition of the N-photon entangled projector."""

    n_photons: int
    n: int
    m: int
    theta0: float
    bs_terms: list          # (weight > 0, theta)
    correction_terms: list  # (weight < 0, j) for |j><j| x |N-j><N-j|

    @property
    def fock_numbers_needed(self):
        need = {self.n, self.m}
        need.update(j for _, j in self.correction_terms)
        need.update(self.n_photons - j for _, j in self.correction_terms)
        return sorted(need)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "n_photons": self.n_photons,
            "split": [self.n, self.m],
            "theta0": self.theta0,
            "bs_terms": [[w, th] for w, th in self.bs_terms],
            "correction_terms": [[w, j] for w, j in self.correction_terms],
        }


def noon_decomposition(n_photons: int, cutoff: int = None) -> NoonDecomposition:
    """Build and verify the exact decomposition for N >= 1.

    Even N uses the halved phase grid with the near-balanced split
    n = m = N/2; odd N uses n = ceil(N/2), m = floor(N/2).  The
    reconstruction is checked entrywise against the exact projector.
    """
    big_n = int(n_photons)
    if big_n < 1:
        raise ValueError("n_photons must be >= 1")
    if big_n % 2 == 0:
        n = m = big_n // 2
        k_range = big_n // 2
        phase_weight = 2.0 / big_n
        corr_js = [2 * k for k in range(1, big_n // 2)]
    else:
        n, m = (big_n + 1) // 2, big_n // 2
        k_range = big_n
        phase_weight = 1.0 / big_n
        corr_js = list(range(1, big_n))
    theta0 = pi / big_n if m % 2 == 0 else 0.0
    # prefactor n! m! 2^(N-1) / N! kept exact until final float evaluation
    log_pref = (gammaln(n + 1) + gammaln(m + 1) + (big_n - 1) * np.log(2.0)
                - gammaln(big_n + 1))
    pref = float(np.exp(log_pref))
    bs_terms = [(pref * phase_weight, theta0 + 2.0 * pi * k / big_n)
                for k in range(k_range)]
    corr = [(-pref * r_coefficient(n, m, j) ** 2, j) for j in corr_js]
    dec = NoonDecomposition(big_n, n, m, theta0, bs_terms, corr)

    check_dim = cutoff if cutoff is not None else big_n + 1
    recon = reconstruct_decomposition(dec, check_dim)
    target = path_entangled_state(big_n, check_dim)
    err = np.abs(recon.matrix - target.matrix).max()
    if err > RECONSTRUCTION_TOL:
        raise RuntimeError(f"decomposition identity violated: {err:.2e}")
    return dec


def reconstruct_decomposition(dec: NoonDecomposition, dim: int) -> DensityMatrix:
    """Evaluate the decomposition as a dense two-mode operator."""
    total = np.zeros((dim * dim, dim * dim), dtype=complex)
    for w, theta in dec.bs_terms:
        total += w * beamsplitter_state(dec.n, dec.m, theta, dim).matrix
    big_n = dec.n_photons
    for w, j in dec.correction_terms:
        e = np.zeros(dim * dim)
        e[j * dim + (big_n - j)] = 1.0
        total += w * np.outer(e, e)
    return DensityMatrix(total, (dim, dim))


# ---------------------------------------------------------------------------
# composition with single-mode representations


@dataclass
class ComposedProbe:
    """Label of one flattened two-mode probe family.

    ``theta`` is None for plain product corrections (no beamsplitter);
    otherwise the probe is the double-phase-averaged splitter output of
    the coherent pair (amp_a, amp_b).
    """
    amp_a: float
    amp_b: float
    theta: float = None


@dataclass
class ComposedRepresentation:
    """Signed two-mode decomposition into coherent probe families."""

    n_photons: int
    decomposition: NoonDecomposition
    probes: list                 # ComposedProbe per flattened term
    coefficients: np.ndarray
    fidelity_achieved: float
    cutoff: int

    zeta_plus: float = field(init=False)
    zeta_minus: float = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        self.coefficients = c
        self.zeta_plus = float(c[c > 0].sum())
        self.zeta_minus = float(-c[c < 0].sum())

    @property
    def zeta(self) -> float:
        return self.zeta_plus + self.zeta_minus

    def to_dict(self) -> dict:
        d = self.decomposition.to_dict()
        d.update({
            "probes": [{"amp_a": p.amp_a, "amp_b": p.amp_b, "theta": p.theta}
                       for p in self.probes],
            "coefficients": [float(x) for x in self.coefficients],
            "zeta_plus": self.zeta_plus,
            "zeta_minus": self.zeta_minus,
            "fidelity": self.fidelity_achieved,
            "cutoff": self.cutoff,
        })
        return d


def _overlap_weights(n_photons: int, theta: float) -> np.ndarray:
    """|<target| splitter |p, q>|^2 for p + q = N, indexed by p."""
    big_n = n_photons
    out = np.empty(big_n + 1)
    for p in range(big_n + 1):
        q = big_n - p
        r0 = r_coefficient(p, q, 0)
        rn = r_coefficient(p, q, big_n)
        out[p] = (r0 * r0 + rn * rn - 2.0 * r0 * rn * cos(big_n * theta)) / 2.0
    return out


def compose_with_fock_representations(dec: NoonDecomposition,
                                      fock_reps: dict,
                                      cutoff: int = None) -> ComposedRepresentation:
    """Flatten the decomposition through single-mode representations.

    ``fock_reps`` maps each photon number in ``dec.fock_numbers_needed``
    to a phase-averaged-probe Representation.  Fidelity against the
    exact target is evaluated from the reconstructed probe diagonals at
    the representations' cutoff.
    """
    for nn in dec.fock_numbers_needed:
        if nn not in fock_reps:
            raise KeyError(f"missing Fock representation for n = {nn}")
    if cutoff is None:
        cutoff = min(rep.cutoff for rep in fock_reps.values())
    big_n = dec.n_photons

    diags = {}
    for nn, rep in fock_reps.items():
        q = np.column_stack([p.diagonal() for p in rep.probe_set.probes])
        diags[nn] = q @ rep.coefficients

    probes, coeffs = [], []
    fid = 0.0
    rep_n, rep_m = fock_reps[dec.n], fock_reps[dec.m]
    amps_n = np.asarray(rep_n.probe_set.amplitudes, dtype=float)
    amps_m = np.asarray(rep_m.probe_set.amplitudes, dtype=float)
    dn = diags[dec.n][:big_n + 1]
    dm = diags[dec.m][:big_n + 1]
    for w, theta in dec.bs_terms:
        k = _overlap_weights(big_n, theta)
        fid += w * float((dn * dm[::-1]) @ k)
        for ci, ai in zip(rep_n.coefficients, amps_n):
            for cj, aj in zip(rep_m.coefficients, amps_m):
                probes.append(ComposedProbe(ai, aj, theta))
                coeffs.append(w * ci * cj)
    for w, j in dec.correction_terms:
        rep_a, rep_b = fock_reps[j], fock_reps[big_n - j]
        da, db = diags[j], diags[big_n - j]
        fid += w * (da[big_n] * db[0] + da[0] * db[big_n]) / 2.0
        for ci, ai in zip(rep_a.coefficients,
                          np.asarray(rep_a.probe_set.amplitudes, dtype=float)):
            for cj, aj in zip(rep_b.coefficients,
                              np.asarray(rep_b.probe_set.amplitudes, dtype=float)):
                probes.append(ComposedProbe(ai, aj, None))
                coeffs.append(w * ci * cj)

    return ComposedRepresentation(
        n_photons=big_n,
        decomposition=dec,
        probes=probes,
        coefficients=np.asarray(coeffs),
        fidelity_achieved=float(fid),
        cutoff=cutoff,
    )


@dataclass
class TwoModeProbe:
    """One sampled two-mode coherent preparation (the splitter output of
    a random-phase coherent pair), with its ancilla sign."""

    amp_in_a: float
    amp_in_b: float
    phi1: float
    phi2: float
    theta: float
    output_a: complex
    output_b: complex
    sign: int


def sample_two_mode_probe(composed: ComposedRepresentation,
                          rng: np.random.Generator) -> TwoModeProbe:
    """Draw a flattened term with probability ~ |coefficient|, then two
    uniform phases, and return the physical output amplitudes."""
    c = composed.coefficients
    zeta = np.abs(c).sum()
    cdf = np.cumsum(np.abs(c) / zeta)
    cdf[-1] = 1.0
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    probe = composed.probes[idx]
    phi1 = 2.0 * pi * rng.random()
    phi2 = 2.0 * pi * rng.random()
    e1 = probe.amp_a * np.exp(1j * phi1)
    e2 = probe.amp_b * np.exp(1j * phi2)
    if probe.theta is None:
        out_a, out_b = e1, e2       # plain product term, no splitter
    else:
        out_a = (e1 + e2) / sqrt(2.0)
        out_b = np.exp(1j * probe.theta) * (e1 - e2) / sqrt(2.0)
    return TwoModeProbe(
        amp_in_a=probe.amp_a, amp_in_b=probe.amp_b,
        phi1=phi1, phi2=phi2,
        theta=probe.theta if probe.theta is not None else 0.0,
        output_a=complex(out_a), output_b=complex(out_b),
        sign=1 if c[idx] >= 0 else -1,
    )
