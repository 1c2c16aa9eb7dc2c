import numpy as np
import pytest

from cse_lab import fock, presets
from cse_lab.experiments import DetectorModel

CUTOFF = 30


@pytest.fixture(scope="session")
def rep1():
    return presets.single_photon_representation(CUTOFF)


@pytest.fixture(scope="session")
def rep2():
    return presets.fock_representation(2, CUTOFF)


@pytest.fixture(scope="session")
def rep2_capped():
    return presets.fock_representation(
        2, CUTOFF, amplitudes=presets.NOON_TWO_PHOTON_AMPLITUDES,
        zeta_cap=presets.NOON_TWO_PHOTON_ZETA_CAP)


@pytest.fixture(scope="session")
def noon_reps(rep1, rep2_capped):
    return {0: presets.fock_representation(0, CUTOFF),
            1: rep1, 2: rep2_capped}


@pytest.fixture(scope="session")
def detector():
    return DetectorModel(eta=0.8, epsilon=0.001)


def random_density_matrix(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return fock.DensityMatrix(m / m.trace().real, (dim,))
