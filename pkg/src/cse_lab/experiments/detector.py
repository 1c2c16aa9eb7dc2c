"""Click-detector model shared by all measurement setups."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from ..fock import Observable


@dataclass(frozen=True)
class DetectorModel:
    """Single-photon detector: quantum efficiency and dark-count probability."""

    eta: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")


def click_count_probability(m: int, n: int, det: DetectorModel) -> float:
    """p(m|n): probability that m of the 4 detectors fire on Fock input n.

    The photon is split evenly over four detectors with efficiency eta
    and per-detector dark-count probability epsilon.
    """
    eta, eps = det.eta, det.epsilon
    acc = 0.0
    for k in range(m + 1):
        coef = (factorial(4) * (-1.0) ** (m - k) * (1.0 - eps) ** (4 - k)
                / (factorial(4 - m) * factorial(k) * factorial(m - k)))
        acc += coef * (1.0 - (4 - k) / 4.0 * eta) ** n
    return acc


def four_detector_povm(det: DetectorModel, dim: int) -> list:
    """Five-outcome POVM {Pi_0..Pi_4}, diagonal in the Fock basis."""
    n = np.arange(dim)
    elements = []
    for m in range(5):
        diag = np.zeros(dim)
        for k in range(m + 1):
            coef = (factorial(4) * (-1.0) ** (m - k) * (1.0 - det.epsilon) ** (4 - k)
                    / (factorial(4 - m) * factorial(k) * factorial(m - k)))
            diag += coef * (1.0 - (4 - k) / 4.0 * det.eta) ** n
        elements.append(Observable(np.diag(diag.astype(complex)), (dim,),
                                   eigen_bound=float(np.abs(diag).max())))
    total = sum(el.diagonal() for el in elements)
    assert np.abs(total - 1.0).max() < 1e-10, "POVM completeness violated"
    return elements
