"""Truncated Fock-space linear algebra.

States and observables are dense numpy matrices on one or two bosonic
modes, each truncated to ``dim`` levels {|0>, ..., |dim-1>}.  Mode
dimensions are plain validated integers (``dim >= 2``); a two-mode
operator lives on the Kronecker product space with mode ``a`` as the
slow index.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import (
    CutoffTooSmallError,
    DimensionMismatchError,
    NonPhysicalStateError,
)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
TAIL_TOL = 1e-10

_DEFAULT_CUTOFF = 30


def default_cutoff() -> int:
    """Per-mode cutoff; env var CSE_LAB_DEFAULT_CUTOFF overrides 30."""
    env = os.environ.get("CSE_LAB_DEFAULT_CUTOFF")
    if env:
        dim = int(env)
        _check_dim(dim)
        return dim
    return _DEFAULT_CUTOFF


def _check_dim(dim: int) -> int:
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ValueError(f"mode dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


class DensityMatrix:
    """Truncated one- or two-mode operator with state bookkeeping.

    ``physical=True`` enforces Hermiticity within 1e-12, trace within
    1e-10 of ``declared_trace`` and (on :meth:`validate`) eigenvalues
    >= -1e-10.  Signed intermediates such as reconstruction residuals
    carry ``physical=False`` and skip the positivity requirement.
    """

    __slots__ = ("matrix", "dims", "physical", "discarded_mass")

    def __init__(self, matrix, dims, physical=True, declared_trace=1.0,
                 discarded_mass=0.0):
        dims = tuple(_check_dim(d) for d in dims)
        if len(dims) not in (1, 2):
            raise ValueError("only 1- or 2-mode operators are supported")
        matrix = np.asarray(matrix, dtype=complex)
        total = int(np.prod(dims))
        if matrix.shape != (total, total):
            raise DimensionMismatchError(
                f"matrix shape {matrix.shape} does not match dims {dims}")
        self.matrix = matrix
        self.dims = dims
        self.physical = bool(physical)
        self.discarded_mass = float(discarded_mass)
        herm = np.abs(matrix - matrix.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise NonPhysicalStateError(f"not Hermitian: deviation {herm:.2e}")
        if self.physical:
            tr = matrix.trace()
            if abs(tr - declared_trace) > TRACE_TOL:
                raise NonPhysicalStateError(
                    f"trace {tr:.12f} differs from {declared_trace} beyond {TRACE_TOL}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def trace(self) -> float:
        return float(self.matrix.trace().real)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def is_diagonal(self, tol=1e-12) -> bool:
        off = self.matrix - np.diag(self.matrix.diagonal())
        return bool(np.abs(off).max() <= tol) if off.size else True

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def validate(self):
        """Raise NonPhysicalStateError unless this is a valid state."""
        if not self.physical:
            raise NonPhysicalStateError("operator is flagged non-physical")
        if self.min_eigenvalue() < -PSD_TOL:
            raise NonPhysicalStateError(
                f"minimum eigenvalue {self.min_eigenvalue():.2e} below -{PSD_TOL}")
        return self

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix.copy(), self.dims, self.physical,
                             declared_trace=self.trace(),
                             discarded_mass=self.discarded_mass)

    def __repr__(self):
        kind = "state" if self.physical else "operator"
        return f"<DensityMatrix {kind} dims={self.dims}>"


class Observable:
    """Hermitian operator with an eigenvalue bound ``eigen_bound``."""

    __slots__ = ("matrix", "dims", "eigen_bound")

    def __init__(self, matrix, dims, eigen_bound=None):
        dims = tuple(_check_dim(d) for d in dims)
        matrix = np.asarray(matrix, dtype=complex)
        total = int(np.prod(dims))
        if matrix.shape != (total, total):
            raise DimensionMismatchError(
                f"matrix shape {matrix.shape} does not match dims {dims}")
        herm = np.abs(matrix - matrix.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise NonPhysicalStateError(f"not Hermitian: deviation {herm:.2e}")
        self.matrix = matrix
        self.dims = dims
        if eigen_bound is None:
            eigen_bound = float(np.abs(np.linalg.eigvalsh(matrix)).max())
        if eigen_bound < 0:
            raise ValueError("eigen_bound must be nonnegative")
        self.eigen_bound = float(eigen_bound)

    def is_diagonal(self, tol=1e-12) -> bool:
        off = self.matrix - np.diag(self.matrix.diagonal())
        return bool(np.abs(off).max() <= tol) if off.size else True

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def __repr__(self):
        return f"<Observable dims={self.dims} M={self.eigen_bound:.4g}>"


# ---------------------------------------------------------------------------
# constructors


def poisson_tail(alpha_mag: float, dim: int) -> float:
    """Probability mass of a Poisson(|alpha|^2) beyond level dim-1."""
    if alpha_mag == 0:
        return 0.0
    return float(poisson.sf(dim - 1, alpha_mag ** 2))


def check_cutoff(alpha_mag: float, dim: int, tol: float = TAIL_TOL):
    tail = poisson_tail(abs(alpha_mag), dim)
    if tail > tol:
        raise CutoffTooSmallError(
            f"cutoff {dim} keeps Poisson tail {tail:.3e} > {tol:.0e} "
            f"for amplitude {alpha_mag}")
    return tail


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes <n|alpha> of the truncated, renormalized coherent ket."""
    n = np.arange(dim)
    mag = abs(alpha)
    if mag == 0:
        v = np.zeros(dim, dtype=complex)
        v[0] = 1.0
        return v
    logmag = n * np.log(mag) - mag ** 2 / 2 - gammaln(n + 1) / 2
    phase = np.exp(1j * n * np.angle(alpha))
    v = np.exp(logmag) * phase
    return v / np.linalg.norm(v)


def coherent_state(alpha: complex, dim: int = None) -> DensityMatrix:
    """Rank-1 projector |alpha><alpha| truncated to ``dim`` levels.

    Raises CutoffTooSmallError when the discarded Poisson tail exceeds
    1e-10.  The kept amplitudes are renormalized so the trace is exact;
    the discarded mass is recorded on the result.
    """
    if dim is None:
        dim = default_cutoff()
    _check_dim(dim)
    tail = check_cutoff(abs(alpha), dim)
    v = coherent_amplitudes(alpha, dim)
    return DensityMatrix(np.outer(v, v.conj()), (dim,), discarded_mass=tail)


def phase_averaged(alpha_mag: float, dim: int = None) -> DensityMatrix:
    """Uniform phase mixture of |alpha e^{i phi}>: diagonal Poisson state."""
    if dim is None:
        dim = default_cutoff()
    _check_dim(dim)
    if alpha_mag < 0:
        raise ValueError("amplitude magnitude must be nonnegative")
    tail = check_cutoff(alpha_mag, dim)
    w = poisson_weights(alpha_mag, dim)
    return DensityMatrix(np.diag(w.astype(complex)), (dim,), discarded_mass=tail)


def poisson_weights(alpha_mag: float, dim: int) -> np.ndarray:
    """Renormalized Poisson(|alpha|^2) photon-number weights."""
    n = np.arange(dim)
    if alpha_mag == 0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w
    logw = 2 * n * np.log(alpha_mag) - alpha_mag ** 2 - gammaln(n + 1)
    w = np.exp(logw)
    return w / w.sum()


def fock_state(n: int, dim: int = None) -> DensityMatrix:
    if dim is None:
        dim = default_cutoff()
    _check_dim(dim)
    if not 0 <= n < dim:
        raise ValueError(f"level {n} outside cutoff {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    m[n, n] = 1.0
    return DensityMatrix(m, (dim,))


def vacuum(dim: int = None) -> DensityMatrix:
    return fock_state(0, dim)


def identity(dim: int) -> Observable:
    return Observable(np.eye(dim), (dim,), eigen_bound=1.0)


def number_operator(dim: int) -> Observable:
    return Observable(np.diag(np.arange(dim, dtype=float)), (dim,),
                      eigen_bound=float(dim - 1))


def annihilation_operator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def diagonal_observable(values, eigen_bound=None) -> Observable:
    values = np.asarray(values, dtype=float)
    return Observable(np.diag(values.astype(complex)), (len(values),),
                      eigen_bound=eigen_bound)


# ---------------------------------------------------------------------------
# operations


def _match_dims(a, b):
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dims {a.dims} vs {b.dims}")


def expectation(obs: Observable, rho: DensityMatrix) -> float:
    """Tr{A rho}; real for Hermitian inputs."""
    _match_dims(obs, rho)
    val = np.einsum("ij,ji->", obs.matrix, rho.matrix)
    return float(val.real)


def psd_sqrt(matrix: np.ndarray, clamp: float = PSD_TOL) -> np.ndarray:
    """Matrix square root of a Hermitian PSD matrix.

    Eigenvalues in [-clamp, 0) are treated as numerical noise and
    clamped to zero; anything below -clamp raises.
    """
    vals, vecs = np.linalg.eigh(matrix)
    if vals[0] < -clamp:
        raise NonPhysicalStateError(
            f"matrix has eigenvalue {vals[0]:.2e} below -{clamp}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2."""
    _match_dims(rho, sigma)
    for s in (rho, sigma):
        if not s.physical:
            raise NonPhysicalStateError("fidelity requires physical states")
    # diagonal pair: Bhattacharyya form, cheap and exact
    if rho.is_diagonal() and sigma.is_diagonal():
        p = np.clip(rho.diagonal(), 0.0, None)
        q = np.clip(sigma.diagonal(), 0.0, None)
        return float(np.sqrt(p * q).sum() ** 2)
    s = psd_sqrt(rho.matrix)
    inner = s @ sigma.matrix @ s
    vals = np.linalg.eigvalsh(inner)
    if vals[0] < -PSD_TOL:
        raise NonPhysicalStateError(
            f"inner operator eigenvalue {vals[0]:.2e} below -{PSD_TOL}")
    f = np.sqrt(np.clip(vals, 0.0, None)).sum() ** 2
    return float(min(f, 1.0 + 1e-12))


def tensor_product(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    """Two-mode product state; inputs must be single-mode."""
    if rho_a.n_modes != 1 or rho_b.n_modes != 1:
        raise DimensionMismatchError("tensor_product expects single-mode inputs")
    m = np.kron(rho_a.matrix, rho_b.matrix)
    return DensityMatrix(
        m, (rho_a.dims[0], rho_b.dims[0]),
        physical=rho_a.physical and rho_b.physical,
        declared_trace=rho_a.trace() * rho_b.trace(),
        discarded_mass=rho_a.discarded_mass + rho_b.discarded_mass)
