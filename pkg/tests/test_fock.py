import numpy as np
import pytest

from cse_lab import fock, noon
from cse_lab.errors import (
    CutoffTooSmallError,
    DimensionMismatchError,
    NonPhysicalStateError,
)
from conftest import random_density_matrix


class TestCoherentState:
    def test_vacuum_amplitude(self):
        rho = fock.coherent_state(0.0, 10)
        expected = np.zeros((10, 10))
        expected[0, 0] = 1.0
        assert np.allclose(rho.matrix, expected, atol=1e-15)

    def test_single_photon_weight(self):
        # Poisson weight at n = 1 for |alpha| = 1 is e^-1
        rho = fock.coherent_state(1.0, 30)
        assert rho.diagonal()[1] == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_trace_exact_after_truncation(self):
        rho = fock.coherent_state(1.134, 30)
        assert rho.trace() == pytest.approx(1.0, abs=1e-10)
        assert rho.discarded_mass < 1e-10

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmallError):
            fock.coherent_state(1.0, 8)

    def test_complex_amplitude_rank_one(self):
        rho = fock.coherent_state(0.5 + 0.3j, 25)
        vals = np.linalg.eigvalsh(rho.matrix)
        assert vals[-1] == pytest.approx(1.0, abs=1e-12)
        assert abs(vals[:-1]).max() < 1e-12


class TestPhaseAveraged:
    def test_vacuum(self):
        rho = fock.phase_averaged(0.0, 10)
        assert rho.diagonal()[0] == pytest.approx(1.0)

    def test_ground_weight(self):
        rho = fock.phase_averaged(0.5, 20)
        assert rho.diagonal()[0] == pytest.approx(np.exp(-0.25), abs=1e-12)

    def test_no_coherences(self):
        rho = fock.phase_averaged(0.9, 25)
        off = rho.matrix - np.diag(rho.matrix.diagonal())
        assert np.abs(off).max() == 0.0

    def test_matches_phase_quadrature(self):
        # uniform average of coherent projectors over a 64-point phase grid
        d = 30
        for alpha in (0.3, 0.8, 1.2):
            acc = np.zeros((d, d), dtype=complex)
            for phi in np.linspace(0, 2 * np.pi, 64, endpoint=False):
                acc += fock.coherent_state(alpha * np.exp(1j * phi), d).matrix
            acc /= 64
            assert np.abs(acc - fock.phase_averaged(alpha, d).matrix).max() < 1e-9


class TestFidelity:
    def test_self_fidelity(self, rep1):
        rho = rep1.probe_set.probes[1]
        assert fock.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_pure_states(self):
        f = fock.fidelity(fock.fock_state(0, 10), fock.fock_state(1, 10))
        assert abs(f) < 1e-12

    def test_pure_vs_poissonian(self):
        f = fock.fidelity(fock.fock_state(1, 30), fock.phase_averaged(1.0, 30))
        assert f == pytest.approx(np.exp(-1.0), abs=1e-9)

    def test_symmetry_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a = random_density_matrix(rng, 6)
            b = random_density_matrix(rng, 6)
            assert fock.fidelity(a, b) == pytest.approx(
                fock.fidelity(b, a), abs=1e-8)

    def test_nonphysical_input_rejected(self):
        m = np.diag([1.5, -0.5]).astype(complex)
        bad = fock.DensityMatrix(m, (2,), physical=False)
        with pytest.raises(NonPhysicalStateError):
            fock.fidelity(bad, fock.fock_state(0, 2))

    def test_agrees_with_dense_route_on_diagonals(self):
        # the diagonal shortcut must equal the generic eigendecomposition
        a = fock.phase_averaged(0.7, 20)
        b = fock.phase_averaged(1.1, 20)
        direct = fock.fidelity(a, b)
        s = fock.psd_sqrt(a.matrix)
        vals = np.linalg.eigvalsh(s @ b.matrix @ s)
        generic = np.sqrt(np.clip(vals, 0, None)).sum() ** 2
        assert direct == pytest.approx(generic, abs=1e-12)


class TestExpectation:
    def test_identity(self):
        rho = fock.phase_averaged(0.8, 20)
        assert fock.expectation(fock.identity(20), rho) == pytest.approx(1.0)

    def test_poisson_mean(self):
        rho = fock.phase_averaged(1.0, 30)
        n_op = fock.number_operator(30)
        assert fock.expectation(n_op, rho) == pytest.approx(1.0, abs=1e-9)

    def test_witness_on_single_photon(self):
        from cse_lab.experiments import ideal_witness
        val = fock.expectation(ideal_witness(30), fock.fock_state(1, 30))
        assert val == pytest.approx(2.0, abs=1e-14)

    def test_linearity(self):
        rng = np.random.default_rng(11)
        d = 5
        rho1 = random_density_matrix(rng, d)
        rho2 = random_density_matrix(rng, d)
        h1 = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h1 = (h1 + h1.conj().T) / 2
        h2 = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h2 = (h2 + h2.conj().T) / 2
        a = fock.Observable(h1, (d,))
        b = fock.Observable(h2, (d,))
        combo = fock.Observable(0.3 * h1 + 1.7 * h2, (d,))
        lhs = fock.expectation(combo, rho1)
        rhs = 0.3 * fock.expectation(a, rho1) + 1.7 * fock.expectation(b, rho1)
        assert lhs == pytest.approx(rhs, abs=1e-10)
        mix = fock.DensityMatrix(0.25 * rho1.matrix + 0.75 * rho2.matrix, (d,))
        lhs = fock.expectation(a, mix)
        rhs = 0.25 * fock.expectation(a, rho1) + 0.75 * fock.expectation(a, rho2)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fock.expectation(fock.identity(10), fock.phase_averaged(0.5, 12))


class TestTensorProduct:
    def test_two_mode_vacuum(self):
        v = fock.vacuum(5)
        prod = fock.tensor_product(v, v)
        assert prod.dims == (5, 5)
        assert prod.matrix[0, 0] == pytest.approx(1.0)
        assert prod.trace() == pytest.approx(1.0)

    def test_output_dimension(self):
        prod = fock.tensor_product(fock.vacuum(4), fock.vacuum(7))
        assert prod.matrix.shape == (28, 28)

    def test_two_mode_rejected(self):
        two = fock.tensor_product(fock.vacuum(4), fock.vacuum(4))
        with pytest.raises(DimensionMismatchError):
            fock.tensor_product(two, fock.vacuum(4))

    def test_fock_pair_pulls_back_through_splitter(self):
        # |1><1| x |1><1| equals the inverse splitter applied to the
        # two-mode interference state
        d = 8
        theta = 0.7
        u = noon.beamsplitter_unitary(theta, d)
        bs = noon.beamsplitter_state(1, 1, theta, d)
        pulled = u.conj().T @ bs.matrix @ u
        direct = fock.tensor_product(fock.fock_state(1, d), fock.fock_state(1, d))
        assert np.abs(pulled - direct.matrix).max() < 1e-12


class TestStateValidation:
    def test_physical_requirements(self, rep1):
        for p in rep1.probe_set.probes:
            assert np.abs(p.matrix - p.matrix.conj().T).max() <= 1e-12
            assert p.trace() == pytest.approx(1.0, abs=1e-10)
            assert p.min_eigenvalue() >= -1e-10

    def test_trace_check(self):
        with pytest.raises(NonPhysicalStateError):
            fock.DensityMatrix(np.eye(3) * 0.5, (3,))

    def test_hermiticity_check(self):
        m = np.zeros((3, 3), dtype=complex)
        m[0, 1] = 1.0
        m[0, 0] = 1.0
        with pytest.raises(NonPhysicalStateError):
            fock.DensityMatrix(m, (3,))

    def test_min_dim(self):
        with pytest.raises(ValueError):
            fock.fock_state(0, 1)

    def test_default_cutoff_env(self, monkeypatch):
        monkeypatch.setenv("CSE_LAB_DEFAULT_CUTOFF", "17")
        assert fock.default_cutoff() == 17
        monkeypatch.delenv("CSE_LAB_DEFAULT_CUTOFF")
        assert fock.default_cutoff() == 30
