"""Signed-coefficient representations of target states over probe sets.

The solver maximizes Uhlmann fidelity between a target state and an
affine combination of probes (coefficients sum to one, reconstruction
positive semidefinite).  Because every probe used in practice is
diagonal in the Fock basis, the semidefinite constraint reduces to
per-level nonnegativity of the reconstructed diagonal; that case is
solved exactly.  Non-diagonal targets fall back to alternating
projected gradient with eigenvalue clamping.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import fock
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    InfeasibleRepresentationError,
)
from .fock import DensityMatrix, Observable

SCHEMA_VERSION = "cse-lab/1"

# constraint rows with all probe weights below this are dropped from the
# solver (reconstruction there is bounded by solver tolerance anyway)
_NEGLIGIBLE_LEVEL = 1e-16


@dataclass
class ProbeSet:
    """Probe states plus the metadata needed to rebuild or sample them."""

    probes: list
    labels: list
    kinds: list = None            # "phase_averaged" | "coherent" | "custom"
    amplitudes: list = None       # complex amplitude per probe, or None

    def __post_init__(self):
        if not self.probes:
            raise ValueError("probe set must not be empty")
        dims = self.probes[0].dims
        for p in self.probes:
            if p.dims != dims:
                raise DimensionMismatchError("probes must share dims")
            if not p.physical:
                raise ValueError("probes must be physical states")
        if len(self.labels) != len(self.probes):
            raise ValueError("one label per probe required")
        if self.kinds is None:
            self.kinds = ["custom"] * len(self.probes)
        if self.amplitudes is None:
            self.amplitudes = [None] * len(self.probes)

    def __len__(self):
        return len(self.probes)

    @property
    def dims(self):
        return self.probes[0].dims

    @property
    def dim(self):
        return self.probes[0].dim


def phase_averaged_probes(amplitudes, dim=None) -> ProbeSet:
    """Phase-averaged coherent probes at the given real amplitudes."""
    if dim is None:
        dim = fock.default_cutoff()
    amplitudes = [float(a) for a in amplitudes]
    return ProbeSet(
        probes=[fock.phase_averaged(a, dim) for a in amplitudes],
        labels=[f"{a:g}" for a in amplitudes],
        kinds=["phase_averaged"] * len(amplitudes),
        amplitudes=amplitudes,
    )


def coherent_probes(amplitudes, dim=None) -> ProbeSet:
    """Pure coherent projector probes at the given complex amplitudes."""
    if dim is None:
        dim = fock.default_cutoff()
    amplitudes = [complex(a) for a in amplitudes]
    return ProbeSet(
        probes=[fock.coherent_state(a, dim) for a in amplitudes],
        labels=[f"{a:g}" for a in amplitudes],
        kinds=["coherent"] * len(amplitudes),
        amplitudes=amplitudes,
    )


@dataclass
class Representation:
    """Signed affine decomposition of a target state over a probe set."""

    probe_set: ProbeSet
    coefficients: np.ndarray
    fidelity_achieved: float
    target_ref: DensityMatrix = None
    cutoff: int = None

    zeta_plus: float = field(init=False)
    zeta_minus: float = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if len(c) != len(self.probe_set):
            raise ValueError("one coefficient per probe required")
        self.coefficients = c
        self.zeta_plus = float(c[c > 0].sum())
        self.zeta_minus = float(-c[c < 0].sum())
        if self.cutoff is None:
            self.cutoff = self.probe_set.dim

    @property
    def zeta(self) -> float:
        return self.zeta_plus + self.zeta_minus

    def reconstruct(self) -> DensityMatrix:
        return reconstruct(self)

    def branch_states(self):
        """Normalized positive / negative branches (rho_plus, rho_minus).

        The negative branch is None when every coefficient is positive.
        """
        c = self.coefficients
        mats = [p.matrix for p in self.probe_set.probes]
        pos = sum(cj * m for cj, m in zip(c, mats) if cj > 0)
        rho_p = DensityMatrix(pos / self.zeta_plus, self.probe_set.dims)
        if self.zeta_minus <= 0:
            return rho_p, None
        neg = sum(-cj * m for cj, m in zip(c, mats) if cj < 0)
        rho_m = DensityMatrix(neg / self.zeta_minus, self.probe_set.dims)
        return rho_p, rho_m

    def to_dict(self) -> dict:
        probes = []
        for kind, amp, label in zip(self.probe_set.kinds,
                                    self.probe_set.amplitudes,
                                    self.probe_set.labels):
            entry = {"kind": kind, "label": label}
            if amp is not None:
                amp = complex(amp)
                entry["amplitude"] = amp.real if amp.imag == 0 else [amp.real, amp.imag]
            probes.append(entry)
        return {
            "schema": SCHEMA_VERSION,
            "probes": probes,
            "coefficients": [float(x) for x in self.coefficients],
            "zeta_plus": self.zeta_plus,
            "zeta_minus": self.zeta_minus,
            "fidelity": self.fidelity_achieved,
            "cutoff": self.cutoff,
        }


def representation_from_dict(data: dict) -> Representation:
    """Rebuild a Representation from its JSON dictionary."""
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema {data.get('schema')!r}")
    dim = int(data["cutoff"])
    probes, labels, kinds, amps = [], [], [], []
    for entry in data["probes"]:
        kind = entry["kind"]
        amp = entry.get("amplitude")
        if isinstance(amp, list):
            amp = complex(amp[0], amp[1])
        if kind == "phase_averaged":
            probes.append(fock.phase_averaged(float(amp.real if isinstance(amp, complex) else amp), dim))
        elif kind == "coherent":
            probes.append(fock.coherent_state(amp, dim))
        else:
            raise ValueError(f"cannot rebuild probe of kind {kind!r}")
        labels.append(entry["label"])
        kinds.append(kind)
        amps.append(amp)
    pset = ProbeSet(probes, labels, kinds, amps)
    return Representation(
        probe_set=pset,
        coefficients=np.asarray(data["coefficients"], dtype=float),
        fidelity_achieved=float(data["fidelity"]),
        cutoff=dim,
    )


def reconstruct(rep: Representation) -> DensityMatrix:
    """Sum c_j rho_j; flagged non-physical if the PSD tolerance is exceeded."""
    mats = np.stack([p.matrix for p in rep.probe_set.probes])
    m = np.tensordot(rep.coefficients, mats, axes=1)
    m = 0.5 * (m + m.conj().T)
    out = DensityMatrix(m, rep.probe_set.dims, physical=False)
    out.physical = out.min_eigenvalue() >= -1e-8 and abs(out.trace() - 1.0) <= 1e-8
    return out


def systematic_error_bound(fidelity_value: float, eigen_bound: float) -> float:
    """Worst-case expectation bias 2 M sqrt(1 - F) for any |lambda| <= M."""
    if not 0.0 <= fidelity_value <= 1.0 + 1e-12:
        raise ValueError(f"fidelity {fidelity_value} outside [0, 1]")
    if eigen_bound < 0:
        raise ValueError("eigen_bound must be nonnegative")
    return 2.0 * eigen_bound * np.sqrt(max(0.0, 1.0 - fidelity_value))


# ---------------------------------------------------------------------------
# solver


def _probe_gram_warn(mats):
    flat = np.stack([m.ravel() for m in mats])
    gram = (flat @ flat.conj().T).real
    rank = np.linalg.matrix_rank(gram, tol=1e-12)
    if rank < len(mats):
        warnings.warn("probes are linearly dependent as operators; "
                      "coefficients are not unique", stacklevel=3)


def solve_representation(target: DensityMatrix, probes: ProbeSet,
                         tol: float = 1e-10, max_iter: int = 20000,
                         zeta_cap: float = None) -> Representation:
    """Maximize F(target, sum_j c_j rho_j) subject to sum c_j = 1 and PSD.

    ``zeta_cap`` optionally bounds the coefficient one-norm, trading
    fidelity for sampling cost (only supported on the diagonal path).
    Deterministic given inputs, tolerance and probe order.
    """
    if target.dims != probes.dims:
        raise DimensionMismatchError("target and probes must share dims")
    target.validate()
    _probe_gram_warn([p.matrix for p in probes.probes])

    diagonal = target.is_diagonal() and all(p.is_diagonal() for p in probes.probes)
    if diagonal:
        c = _solve_diagonal(target.diagonal(), probes, tol, max_iter, zeta_cap)
    else:
        if zeta_cap is not None:
            raise NotImplementedError("zeta_cap requires diagonal probes")
        c = _solve_general(target, probes, tol, max_iter)

    rep = Representation(
        probe_set=probes,
        coefficients=c,
        fidelity_achieved=0.0,
        target_ref=target,
    )
    rep.fidelity_achieved = fock.fidelity(target, _psd_view(rep))
    return rep


def _psd_view(rep: Representation) -> DensityMatrix:
    """Reconstruction with solver-level negative noise clipped for fidelity."""
    recon = reconstruct(rep)
    if recon.physical:
        recon.physical = True
        return recon
    vals, vecs = np.linalg.eigh(recon.matrix)
    if vals[0] < -1e-7:
        raise InfeasibleRepresentationError(
            f"reconstruction eigenvalue {vals[0]:.2e}; no PSD combination found")
    vals = np.clip(vals, 0.0, None)
    m = (vecs * vals) @ vecs.conj().T
    m /= m.trace().real
    return DensityMatrix(m, rep.probe_set.dims)


def _solve_diagonal(t_diag, probes, tol, max_iter, zeta_cap):
    q = np.column_stack([p.diagonal() for p in probes.probes])  # (d, p)
    keep = q.max(axis=1) >= _NEGLIGIBLE_LEVEL
    q_act = q[keep]
    support = np.flatnonzero(t_diag > 1e-14)
    if len(support) == 1:
        return _solve_diagonal_linear(q, q_act, int(support[0]), zeta_cap)
    if zeta_cap is not None:
        raise NotImplementedError("zeta_cap is only supported for pure Fock targets")
    return _solve_diagonal_concave(t_diag, q, q_act, tol, max_iter)


def _solve_diagonal_linear(q, q_act, level, zeta_cap):
    """Pure Fock target: fidelity is linear in c, solve the LP exactly."""
    d_act, p = q_act.shape
    if zeta_cap is None:
        res = linprog(-q[level], A_ub=-q_act, b_ub=np.zeros(d_act),
                      A_eq=np.ones((1, p)), b_eq=[1.0],
                      bounds=[(None, None)] * p, method="highs")
    else:
        # split c = u - v with u, v >= 0 to express the one-norm bound
        obj = np.concatenate([-q[level], q[level]])
        a_ub = np.vstack([np.hstack([-q_act, q_act]), np.ones((1, 2 * p))])
        b_ub = np.concatenate([np.zeros(d_act), [float(zeta_cap)]])
        a_eq = np.concatenate([np.ones(p), -np.ones(p)])[None, :]
        res = linprog(obj, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                      bounds=[(0, None)] * (2 * p), method="highs")
    if res.status == 2:
        raise InfeasibleRepresentationError("no PSD affine combination exists")
    if not res.success:
        raise ConvergenceError(f"linear solve failed: {res.message}")
    c = res.x[:p] - res.x[p:] if zeta_cap is not None else res.x
    # tidy the affine constraint exactly (solver residual ~1e-12)
    c = c + (1.0 - c.sum()) / p
    return c


def _solve_diagonal_concave(t_diag, q, q_act, tol, max_iter):
    """Mixed diagonal target: projected gradient ascent on the
    Bhattacharyya objective over the probe-spanned simplex slice."""
    d, p = q.shape
    # affine parametrization x = q c with sum c = 1
    x0 = q.mean(axis=1)
    basis = q[:, 1:] - q[:, :1]
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    b = u[:, s > 1e-13 * s[0]] if s.size else u[:, :0]

    def project(x):
        # Dykstra between the affine slice and the nonnegative orthant
        y = x.copy()
        inc_a = np.zeros(d)
        inc_b = np.zeros(d)
        for _ in range(500):
            z = y + inc_a
            ya = x0 + b @ (b.T @ (z - x0))
            inc_a = z - ya
            z = ya + inc_b
            yb = np.clip(z, 0.0, None)
            inc_b = z - yb
            if np.abs(ya - yb).max() < 1e-13:
                return yb
            y = yb
        return yb

    def objective(x):
        return np.sqrt(np.clip(t_diag * x, 0.0, None)).sum() ** 2

    x = project(t_diag.copy())
    f = objective(x)
    step = 1.0
    for _ in range(max_iter):
        root = np.sqrt(np.clip(t_diag * x, 1e-300, None))
        grad = root.sum() * np.where(t_diag > 0, t_diag / root, 0.0)
        improved = False
        while step > 1e-14:
            x_new = project(x + step * grad)
            f_new = objective(x_new)
            if f_new > f + 1e-16:
                x, f = x_new, f_new
                improved = True
                step *= 1.3
                break
            step *= 0.5
        if not improved:
            break
    else:
        raise ConvergenceError("projected gradient did not converge")
    c, *_ = np.linalg.lstsq(np.vstack([q, np.ones(p)]),
                            np.concatenate([x, [1.0]]), rcond=None)
    return c + (1.0 - c.sum()) / p


def _solve_general(target, probes, tol, max_iter):
    """Non-diagonal case: alternating projected gradient on fidelity with
    PSD projection via eigenvalue clamping."""
    mats = np.stack([p.matrix for p in probes.probes])
    p = len(mats)
    flat = mats.reshape(p, -1)
    design = np.vstack([flat.T.real, flat.T.imag, np.ones((1, p))])

    def fit_coeffs(rho_mat):
        rhs = np.concatenate([rho_mat.ravel().real, rho_mat.ravel().imag, [1.0]])
        c, *_ = np.linalg.lstsq(design, rhs, rcond=None)
        return c + (1.0 - c.sum()) / p

    sqrt_t = fock.psd_sqrt(target.matrix)

    def fid_and_grad(c):
        rho = np.tensordot(c, mats, axes=1)
        inner = sqrt_t @ rho @ sqrt_t
        vals, vecs = np.linalg.eigh(inner)
        vals = np.clip(vals, 1e-300, None)
        f = np.sqrt(vals).sum() ** 2
        inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.conj().T
        grad_rho = np.sqrt(f) * (sqrt_t @ inv_sqrt @ sqrt_t)
        g = np.einsum("kij,ji->k", mats, grad_rho).real
        return float(f.real), g, rho

    def make_feasible(c):
        # alternate PSD clamping with refitting into the probe span until
        # the reconstruction is positive within tolerance
        for _ in range(500):
            rho = np.tensordot(c, mats, axes=1)
            vals, vecs = np.linalg.eigh(rho)
            if vals[0] >= -1e-9:
                return c
            clamped = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
            clamped /= clamped.trace().real
            c = fit_coeffs(clamped)
        raise InfeasibleRepresentationError(
            "could not reach a PSD combination of the probes")

    c = make_feasible(fit_coeffs(target.matrix))
    f, g, rho = fid_and_grad(c)
    step = 0.1
    for _ in range(max_iter):
        direction = g - g.mean()          # tangent to sum c = 1
        improved = False
        while step > 1e-13:
            c_new = c + step * direction
            rho_new = np.tensordot(c_new, mats, axes=1)
            if np.linalg.eigvalsh(rho_new)[0] < -1e-9:
                c_new = make_feasible(c_new)
            f_new, g_new, _ = fid_and_grad(c_new)
            if f_new > f + tol * 1e-3:
                c, f, g = c_new, f_new, g_new
                improved = True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
    return make_feasible(c)


# ---------------------------------------------------------------------------
# observable fitting / probe-placement diagnostics


def approximate_observable(target_obs: Observable, povm: list) -> np.ndarray:
    """Least-squares coefficients z with sum_m z_m Pi_m ~ target.

    All operators must be diagonal in the Fock basis and the POVM must
    resolve the identity within 1e-8.  Returns the minimum-norm solution
    when the design matrix is rank deficient (with a warning).
    """
    if not target_obs.is_diagonal():
        raise ValueError("target observable must be diagonal in the Fock basis")
    total = np.zeros(povm[0].matrix.shape[0])
    design = []
    for el in povm:
        if el.dims != povm[0].dims:
            raise DimensionMismatchError("POVM elements must share dims")
        if not el.is_diagonal():
            raise ValueError("POVM elements must be diagonal in the Fock basis")
        diag = el.diagonal()
        total = total + diag
        design.append(diag)
    if np.abs(total - 1.0).max() > 1e-8:
        raise ValueError("POVM does not resolve the identity within 1e-8")
    design = np.column_stack(design)
    if target_obs.dims != povm[0].dims:
        raise DimensionMismatchError("observable and POVM must share dims")
    rank = np.linalg.matrix_rank(design, tol=1e-12)
    if rank < design.shape[1]:
        warnings.warn("rank-deficient POVM design; returning minimum-norm fit",
                      stacklevel=2)
    z, *_ = np.linalg.lstsq(design, target_obs.diagonal(), rcond=None)
    return z


def fitted_observable(povm: list, z: np.ndarray) -> Observable:
    """The operator sum_m z_m Pi_m as a diagonal Observable."""
    diag = sum(zm * el.diagonal() for zm, el in zip(z, povm))
    return fock.diagonal_observable(diag)


def optimality_residual(rep: Representation) -> np.ndarray:
    """Amplitude-placement diagnostic <a_j|[a, rho - rho_true]|a_j> per probe.

    Zero residuals indicate the coherent probe amplitudes are stationary
    points of the squared reconstruction distance.  Requires pure
    coherent probes and a stored target.
    """
    if any(k != "coherent" for k in rep.probe_set.kinds):
        raise ValueError("optimality residual requires pure coherent probes")
    if rep.target_ref is None:
        raise ValueError("representation carries no target reference")
    delta = reconstruct(rep).matrix - rep.target_ref.matrix
    a_op = fock.annihilation_operator(rep.probe_set.dim)
    comm = a_op @ delta - delta @ a_op
    out = np.empty(len(rep.probe_set), dtype=complex)
    for j, alpha in enumerate(rep.probe_set.amplitudes):
        v = fock.coherent_amplitudes(alpha, rep.probe_set.dim)
        out[j] = v.conj() @ comm @ v
    return out
