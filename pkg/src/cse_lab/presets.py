"""Reference probe grids and ready-made representations.

The single-photon grid is the standard five-amplitude set.  For the
two-photon state two grids are provided: ``TWO_PHOTON_AMPLITUDES``
maximizes fidelity alone (seven equally spaced amplitudes on [0, 1.5]),
while the entangled-state pipeline uses ``NOON_TWO_PHOTON_AMPLITUDES``
with a one-norm cap, calibrated so composed resource counts stay near
the reference values at the default cutoff (a capped solve trades a few
1e-3 of fidelity for a ~3x smaller coefficient one-norm).
"""

from __future__ import annotations

import numpy as np

from . import fock
from .decompose import Representation, phase_averaged_probes, solve_representation

SINGLE_PHOTON_AMPLITUDES = (0.0, 0.25, 0.5, 0.75, 1.0)

TWO_PHOTON_AMPLITUDES = tuple(np.linspace(0.0, 1.5, 7))

NOON_TWO_PHOTON_AMPLITUDES = (0.0, 0.34, 0.68, 1.0, 1.3, 1.56, 1.74)
NOON_TWO_PHOTON_ZETA_CAP = 350.0

TWO_PHOTON_FIDELITY_FLOOR = 0.998


def fock_representation(n: int, cutoff: int = None, amplitudes=None,
                        zeta_cap: float = None) -> Representation:
    """Signed phase-averaged-probe representation of |n><n|."""
    if cutoff is None:
        cutoff = fock.default_cutoff()
    if amplitudes is None:
        if n == 0:
            amplitudes = (0.0,)
        elif n == 1:
            amplitudes = SINGLE_PHOTON_AMPLITUDES
        elif n == 2:
            amplitudes = TWO_PHOTON_AMPLITUDES
        else:
            raise ValueError(f"no default probe grid for n = {n}; pass amplitudes")
    probes = phase_averaged_probes(amplitudes, cutoff)
    target = fock.fock_state(n, cutoff)
    rep = solve_representation(target, probes, zeta_cap=zeta_cap)
    if n == 2 and zeta_cap is None and \
            rep.fidelity_achieved < TWO_PHOTON_FIDELITY_FLOOR:
        rep = _refine_two_photon(target, list(amplitudes), cutoff, rep)
    return rep


def _refine_two_photon(target, amplitudes, cutoff, best_rep):
    """1-D coordinate search over probe amplitudes when the default grid
    misses the fidelity floor."""
    amps = list(amplitudes)
    for _ in range(2):
        for i in range(1, len(amps)):
            lo = amps[i - 1] + 1e-3
            hi = amps[i + 1] - 1e-3 if i + 1 < len(amps) else amps[i] + 0.5
            for cand in np.linspace(lo, hi, 9):
                trial = list(amps)
                trial[i] = float(cand)
                rep = solve_representation(
                    target, phase_averaged_probes(trial, cutoff))
                if rep.fidelity_achieved > best_rep.fidelity_achieved:
                    best_rep, amps = rep, trial
    return best_rep


def single_photon_representation(cutoff: int = None) -> Representation:
    return fock_representation(1, cutoff)


def noon_fock_representations(numbers, cutoff: int = None) -> dict:
    """Representations keyed by photon number for composing entangled
    states; n = 2 uses the resource-capped grid."""
    reps = {}
    for n in sorted(set(numbers)):
        if n == 2:
            reps[n] = fock_representation(
                2, cutoff, amplitudes=NOON_TWO_PHOTON_AMPLITUDES,
                zeta_cap=NOON_TWO_PHOTON_ZETA_CAP)
        else:
            reps[n] = fock_representation(n, cutoff)
    return reps
