import numpy as np
import pytest

from cse_lab import fock
from cse_lab.decompose import Representation, coherent_probes, phase_averaged_probes
from cse_lab.errors import MixedProbeError
from cse_lab.experiments import ideal_witness
from cse_lab.kernels import derive_seed
from cse_lab.sampler import (
    MeasurementModel,
    SignedMixture,
    emulate_expectation,
    excess_variance,
    required_samples,
    sample_signed,
    sampling_mse,
)


@pytest.fixture(scope="module")
def witness_model(rep1):
    return MeasurementModel.from_diagonal_observable(
        ideal_witness(30), rep1.probe_set)


class TestSampleSigned:
    def test_single_probe(self):
        mix = SignedMixture.from_coefficients([1.0])
        rng = np.random.default_rng(0)
        for _ in range(10):
            assert sample_signed(mix, rng) == (0, 1)

    def test_all_positive_signs(self):
        mix = SignedMixture.from_coefficients([0.3, 0.7])
        rng = np.random.default_rng(1)
        assert all(sample_signed(mix, rng)[1] == 1 for _ in range(100))

    def test_frequencies_multinomial(self, rep1):
        mix = SignedMixture.from_representation(rep1).validate()
        rng = np.random.default_rng(42)
        n = 1_000_000
        draws = np.searchsorted(mix.cdf(), rng.random(n), side="right")
        counts = np.bincount(draws, minlength=len(mix.probabilities))
        for j, p in enumerate(mix.probabilities):
            sigma = np.sqrt(n * p * (1 - p))
            assert abs(counts[j] - n * p) <= 4 * max(sigma, 1.0)


class TestEmulateExpectation:
    def test_deterministic_measurement_exact(self):
        # constant outcome over an all-positive mixture: zero variance
        mix = SignedMixture.from_coefficients([0.25, 0.75])
        model = MeasurementModel(np.array([3.5]), np.ones((2, 1)))
        est = emulate_expectation(mix, model, 1000, seed=5)
        assert est.mean == pytest.approx(3.5, abs=1e-12)
        assert est.variance_empirical == pytest.approx(0.0, abs=1e-9)

    def test_witness_reference_mean(self, rep1, witness_model):
        mix = SignedMixture.from_representation(rep1)
        est = emulate_expectation(mix, witness_model, 100_000, seed=7)
        assert est.within(1.9992, 3.0)

    def test_empirical_variance_matches_prediction(self, rep1, witness_model):
        # 200 replicas at N = 1e4 against the closed-form variance
        mix = SignedMixture.from_representation(rep1)
        predicted = excess_variance(rep1, witness_model).delta_ab
        n, reps = 10_000, 200
        means = np.array([
            emulate_expectation(mix, witness_model, n, derive_seed(123, k)).mean
            for k in range(reps)])
        empirical = means.var() * n
        assert empirical == pytest.approx(predicted, rel=0.10)

    def test_seed_determinism(self, rep1, witness_model):
        mix = SignedMixture.from_representation(rep1)
        a = emulate_expectation(mix, witness_model, 50_000, seed=99)
        b = emulate_expectation(mix, witness_model, 50_000, seed=99)
        assert a.mean == b.mean and a.std_error == b.std_error

    def test_thread_count_does_not_change_result(self, rep1, witness_model):
        mix = SignedMixture.from_representation(rep1)
        a = emulate_expectation(mix, witness_model, 3_000_000, seed=4, threads=1)
        b = emulate_expectation(mix, witness_model, 3_000_000, seed=4, threads=4)
        assert a.mean == b.mean and a.variance_empirical == b.variance_empirical

    def test_unbiased_over_seeds(self, rep1, witness_model):
        mix = SignedMixture.from_representation(rep1)
        exact = float(rep1.coefficients @ witness_model.probe_mean())
        n, n_seeds = 2_000, 1000
        means = np.array([
            emulate_expectation(mix, witness_model, n, derive_seed(7, k)).mean
            for k in range(n_seeds)])
        sigma = np.sqrt(excess_variance(rep1, witness_model).delta_ab / (n * n_seeds))
        assert abs(means.mean() - exact) <= 4 * sigma


class TestExcessVariance:
    def test_all_positive_mixture(self):
        probes = phase_averaged_probes([0.2, 0.8], 25)
        rep = Representation(probes, np.array([0.5, 0.5]), 1.0)
        ev = excess_variance(rep, ideal_witness(25))
        assert ev.excess == pytest.approx(0.0, abs=1e-12)
        assert ev.delta_ab == pytest.approx(ev.delta_a, abs=1e-12)

    def test_witness_operator_square(self, rep1):
        # outcome-level single-trial variance of the photon-number witness
        ev = excess_variance(rep1, ideal_witness(30))
        assert ev.delta_ab == pytest.approx(2899.96, rel=1e-4)
        assert ev.excess >= 0.0
        assert ev.delta_ab - ev.delta_a == pytest.approx(ev.excess, rel=1e-12)

    def test_probe_sampling_only_variance(self, rep1):
        # expectation-valued protocol reproduces the reference 2.0e3
        diag = ideal_witness(30).diagonal()
        vals = [float(fock.poisson_weights(a, 30) @ diag)
                for a in rep1.probe_set.amplitudes]
        ev = excess_variance(rep1, MeasurementModel.expectation_valued(vals))
        assert ev.delta_ab == pytest.approx(2005.0, rel=1e-3)

    def test_nonnegative_excess_randomized(self):
        rng = np.random.default_rng(3)
        probes = phase_averaged_probes([0.0, 0.4, 0.8, 1.2], 25)
        mats = np.stack([p.matrix for p in probes.probes])
        for _ in range(50):
            c = rng.normal(size=4)
            c /= c.sum() if abs(c.sum()) > 0.2 else 1.0
            c += (1.0 - c.sum()) / 4
            rep = Representation(probes, c, 0.0)
            h = rng.normal(size=(25, 25))
            obs = fock.Observable((h + h.T) / 2, (25,))
            assert excess_variance(rep, obs).excess >= -1e-10


class TestRequiredSamples:
    def test_zero_variance(self):
        assert required_samples(0.0, 0.1) == 1

    def test_witness_scale(self):
        # 3 sigma against the classical gap needs ~2.2e4 trials
        n = required_samples(2.0e3, (2.0 - 0.206) / 2.0, 3.0)
        assert n == pytest.approx(22373, abs=5)
        assert 1e4 < n < 1e5

    def test_interference_scale(self):
        # coincidence-dip discrimination lands at order 1e6
        n = required_samples(1.5e4, 0.304, 3.0)
        assert 1e6 <= n < 2e6

    def test_validation(self):
        with pytest.raises(ValueError):
            required_samples(1.0, 0.0)


class TestSamplingMse:
    def test_classical_pure_probe_case(self):
        # positive-weight representation of a pure state: both noise terms
        # vanish
        probes = coherent_probes([0.6], 25)
        rep = Representation(probes, np.array([1.0]), 1.0)
        general, pure = sampling_mse(rep, 100)
        assert pure == pytest.approx(0.0, abs=1e-12)
        assert general == pytest.approx(0.0, abs=1e-12)

    def test_scales_inverse_in_ns(self, rep1):
        g1, _ = sampling_mse(rep1, 1_000)
        g2, _ = sampling_mse(rep1, 10_000)
        assert g1 / g2 == pytest.approx(10.0, rel=1e-12)

    def test_pure_form_requires_pure_probes(self, rep1):
        general, pure = sampling_mse(rep1, 100)
        assert pure is None and general > 0
        with pytest.raises(MixedProbeError):
            sampling_mse(rep1, 100, require_pure=True)

    def test_pure_form_matches_general(self):
        # for pure probes the two formulas agree identically
        probes = coherent_probes([0.2, 0.7, 1.1], 30)
        target = fock.fock_state(1, 30)
        from cse_lab.decompose import solve_representation
        rep = solve_representation(target, probes)
        general, pure = sampling_mse(rep, 500)
        assert general == pytest.approx(pure, rel=1e-9)
