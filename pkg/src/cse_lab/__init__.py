"""cse_lab: emulation of quantum measurements with signed mixtures of
phase-averaged coherent states.

Nonclassical few-photon states are decomposed into affine combinations
of classical probe states; measurements are then reproduced by sampling
probes with an ancilla sign label and reweighting outcomes.  The
package provides the decomposition solvers, the signed Monte Carlo
machinery with full variance accounting, the two-mode entangled-state
pipeline, and four benchmark experiments.
"""

__version__ = "0.1.0"

from . import decompose, experiments, fock, kernels, noon, presets, sampler
from .decompose import (
    ProbeSet,
    Representation,
    coherent_probes,
    phase_averaged_probes,
    solve_representation,
    systematic_error_bound,
)
from .fock import (
    DensityMatrix,
    Observable,
    coherent_state,
    expectation,
    fidelity,
    fock_state,
    phase_averaged,
    tensor_product,
)
from .noon import (
    ComposedRepresentation,
    NoonDecomposition,
    beamsplitter_state,
    compose_with_fock_representations,
    noon_decomposition,
    r_coefficient,
    sample_two_mode_probe,
)
from .sampler import (
    EmulationEstimate,
    MeasurementModel,
    SignedMixture,
    emulate_expectation,
    excess_variance,
    required_samples,
    sample_signed,
    sampling_mse,
)
