import json

import numpy as np
import pytest

from cse_lab import decompose, fock
from cse_lab.decompose import (
    ProbeSet,
    Representation,
    approximate_observable,
    coherent_probes,
    optimality_residual,
    phase_averaged_probes,
    reconstruct,
    representation_from_dict,
    solve_representation,
    systematic_error_bound,
)
from cse_lab.experiments import DetectorModel, four_detector_povm, ideal_witness
from cse_lab.presets import SINGLE_PHOTON_AMPLITUDES

# reference single-photon decomposition over the five standard probes,
# quoted to the published precision; exactly reproduced at 10 retained
# Fock levels (the tiny trailing coefficient vanishes for cutoffs >= 12)
REFERENCE_C1 = (-21.8, 25.6, -3.1, 0.33, -0.0028)
REFERENCE_ZETA1 = 50.8


def _poisson_probe_set(amplitudes, dim):
    """Hand-built diagonal Poisson probes at an arbitrary truncation
    (bypasses the public constructors' tail guard)."""
    probes = []
    for a in amplitudes:
        w = fock.poisson_weights(a, dim)
        probes.append(fock.DensityMatrix(np.diag(w.astype(complex)), (dim,)))
    return ProbeSet(probes, [f"{a:g}" for a in amplitudes],
                    kinds=["phase_averaged"] * len(amplitudes),
                    amplitudes=list(amplitudes))


class TestSolveSinglePhoton:
    def test_fidelity_and_zeta(self, rep1):
        # exact optimum of the constrained problem at the default cutoff
        assert rep1.fidelity_achieved == pytest.approx(0.9995622387, abs=1e-9)
        assert rep1.zeta == pytest.approx(50.697, abs=2e-3)

    def test_reference_coefficients_at_reference_truncation(self):
        # at 10 retained levels the solver reproduces the published
        # coefficients including the trailing -0.0028
        probes = _poisson_probe_set(SINGLE_PHOTON_AMPLITUDES, 10)
        rep = solve_representation(fock.fock_state(1, 10), probes)
        for got, want in zip(rep.coefficients, REFERENCE_C1):
            assert got == pytest.approx(want, rel=0.05)
        assert rep.zeta == pytest.approx(REFERENCE_ZETA1, abs=0.1)

    def test_dominant_coefficients_at_default_cutoff(self, rep1):
        for got, want in zip(rep1.coefficients[:3], REFERENCE_C1[:3]):
            assert got == pytest.approx(want, rel=0.05)

    def test_determinism(self, rep1):
        probes = phase_averaged_probes(SINGLE_PHOTON_AMPLITUDES, 30)
        again = solve_representation(fock.fock_state(1, 30), probes)
        assert np.array_equal(again.coefficients, rep1.coefficients)
        assert again.fidelity_achieved == rep1.fidelity_achieved

    def test_invariants(self, rep1):
        c = rep1.coefficients
        assert c.sum() == pytest.approx(1.0, abs=1e-9)
        assert rep1.zeta_plus - rep1.zeta_minus == pytest.approx(1.0, abs=1e-9)
        assert reconstruct(rep1).min_eigenvalue() >= -1e-8

    @pytest.mark.filterwarnings("ignore:probes are linearly dependent")
    def test_monotone_in_probe_set(self):
        # enlarging the amplitude grid never decreases the optimum
        # (the 9-point grid is numerically near-dependent, hence the filter)
        target = fock.fock_state(1, 30)
        fids = []
        for amps in ((0.0, 0.5, 1.0),
                     SINGLE_PHOTON_AMPLITUDES,
                     tuple(np.linspace(0, 1, 9))):
            rep = solve_representation(target, phase_averaged_probes(amps, 30))
            fids.append(rep.fidelity_achieved)
        assert fids[0] <= fids[1] + 1e-12
        assert fids[1] <= fids[2] + 1e-12

    def test_zeta_cap_trades_fidelity(self):
        target = fock.fock_state(1, 30)
        probes = phase_averaged_probes(SINGLE_PHOTON_AMPLITUDES, 30)
        free = solve_representation(target, probes)
        capped = solve_representation(target, probes, zeta_cap=20.0)
        assert capped.zeta <= 20.0 + 1e-9
        assert capped.fidelity_achieved <= free.fidelity_achieved + 1e-12

    def test_dependent_probes_warn(self):
        dim = 20
        probes = ProbeSet(
            [fock.phase_averaged(0.5, dim)] * 2, ["a", "b"],
            kinds=["phase_averaged"] * 2, amplitudes=[0.5, 0.5])
        with pytest.warns(UserWarning, match="linearly dependent"):
            solve_representation(fock.fock_state(1, dim), probes)


class TestSolveOtherTargets:
    def test_single_probe_identity(self):
        probes = phase_averaged_probes([0.7], 25)
        rep = solve_representation(probes.probes[0], probes)
        assert rep.coefficients == pytest.approx([1.0], abs=1e-9)
        assert rep.fidelity_achieved == pytest.approx(1.0, abs=1e-9)
        assert rep.zeta_minus == pytest.approx(0.0, abs=1e-9)

    def test_mixed_diagonal_target(self):
        # thermal-like diagonal target: concave path, near-exact recovery
        d = 25
        w = 0.6 * fock.poisson_weights(0.4, d) + 0.4 * fock.poisson_weights(0.9, d)
        target = fock.DensityMatrix(np.diag(w.astype(complex)), (d,))
        probes = phase_averaged_probes([0.0, 0.3, 0.6, 0.9, 1.2], d)
        rep = solve_representation(target, probes)
        assert rep.fidelity_achieved > 0.9999

    def test_general_nondiagonal_target(self):
        # mixture of coherent projectors is reachable exactly
        probes = coherent_probes([0.2, 0.8, 1.2 + 0.2j], 30)
        m = 0.3 * probes.probes[0].matrix + 0.7 * probes.probes[1].matrix
        target = fock.DensityMatrix(m, (30,))
        rep = solve_representation(target, probes, tol=1e-12)
        assert rep.fidelity_achieved > 0.999999

    def test_two_photon_reference_floor(self, rep2):
        assert rep2.fidelity_achieved >= 0.998


class TestReconstruct:
    def test_single_photon_occupancy(self, rep1):
        recon = reconstruct(rep1)
        assert recon.diagonal()[1] >= 0.999
        assert recon.physical

    def test_positive_mixture_is_physical(self):
        probes = phase_averaged_probes([0.2, 0.9], 25)
        rep = Representation(probes, np.array([0.4, 0.6]), 1.0)
        recon = reconstruct(rep)
        assert recon.physical
        assert rep.zeta_minus == 0.0


class TestSystematicErrorBound:
    def test_perfect_fidelity(self):
        assert systematic_error_bound(1.0, 5.0) == 0.0

    def test_inverts_to_epsilon(self):
        eps, m = 0.03, 2.0
        assert systematic_error_bound(1 - eps ** 2 / (4 * m ** 2), m) == \
            pytest.approx(eps, abs=1e-12)

    def test_reference_point(self):
        assert systematic_error_bound(0.9996, 1.0) == pytest.approx(0.04, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            systematic_error_bound(1.2, 1.0)


class TestApproximateObservable:
    def test_reproduces_povm_element(self, detector):
        povm = four_detector_povm(detector, 40)
        z = approximate_observable(
            fock.Observable(povm[0].matrix, (40,)), povm)
        assert z == pytest.approx([1, 0, 0, 0, 0], abs=1e-8)

    def test_povm_completeness_required(self, detector):
        povm = four_detector_povm(detector, 40)[:4]
        with pytest.raises(ValueError, match="identity"):
            approximate_observable(ideal_witness(40), povm)


class TestOptimalityResidual:
    def test_exact_representation_vanishes(self):
        probes = coherent_probes([0.3, 0.9], 30)
        m = 0.5 * (probes.probes[0].matrix + probes.probes[1].matrix)
        target = fock.DensityMatrix(m, (30,))
        rep = Representation(probes, np.array([0.5, 0.5]), 1.0, target_ref=target)
        assert np.abs(optimality_residual(rep)).max() < 1e-12

    def test_single_probe_self_target(self):
        probes = coherent_probes([0.8], 30)
        rep = Representation(probes, np.array([1.0]), 1.0,
                             target_ref=probes.probes[0])
        assert np.abs(optimality_residual(rep)).max() < 1e-12

    def test_requires_coherent_probes(self, rep1):
        with pytest.raises(ValueError, match="coherent"):
            optimality_residual(rep1)


class TestSerialization:
    def test_round_trip(self, rep1):
        blob = json.dumps(rep1.to_dict())
        back = representation_from_dict(json.loads(blob))
        assert np.array_equal(back.coefficients, rep1.coefficients)
        assert back.zeta == rep1.zeta
        assert [p.trace() for p in back.probe_set.probes] == \
            [p.trace() for p in rep1.probe_set.probes]

    def test_schema_tag(self, rep1):
        d = rep1.to_dict()
        assert d["schema"] == "cse-lab/1"
        assert set(d) >= {"probes", "coefficients", "zeta_plus",
                          "zeta_minus", "fidelity", "cutoff"}
