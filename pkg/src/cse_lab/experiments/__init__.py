"""Benchmark experiments: nonclassicality witness, two-photon
interference, phase-scan coincidences, Clauser-Horne test, plus the
statistical self-check suite."""

from .detector import DetectorModel, click_count_probability, four_detector_povm
from .witness import (
    WitnessReport,
    classical_limit,
    decomposed_witness,
    ideal_witness,
    witness_experiment,
    witness_seed_suite,
    witness_value,
)
from .hom import (
    HomReport,
    hom_emulation,
    hom_experiment,
    hom_probe_p12,
    hom_rep_p12,
    hom_true_p12,
)
from .phase_scan import (
    G2Point,
    g2_closed_form,
    g2_probe_value,
    g2_scan,
    ideal_both_photons_probability,
    ideal_coincidence_probability,
)
from .bell import (
    BellConfig,
    BellOptimum,
    BellReport,
    bell_emulation,
    bell_experiment,
    bell_j0_exact,
    bell_optimize,
    bell_rep_j0,
)
from .appendix import (
    AppendixReport,
    convergence_slope,
    multinomial_mse_suite,
    residual_fd_check,
    systematic_bound_suite,
)

__all__ = [name for name in dir() if not name.startswith("_")]
