"""Quality measures between photon distributions and moment physicality."""

import math
from dataclasses import dataclass

import numpy as np

from errors import DomainError
from photon.states import PhotonDistribution


@dataclass(frozen=True)
class FidelityScore:
    """Bhattacharyya overlap of two photon distributions, in [0, 1]."""

    value: float

    def __post_init__(self):
        # Rounding can push identical distributions a few ulps above 1.
        object.__setattr__(self, "value", min(1.0, max(0.0, float(self.value))))

    def __float__(self) -> float:
        return self.value


def fidelity(p: PhotonDistribution, q: PhotonDistribution) -> FidelityScore:
    """F = sum_n sqrt(p_n q_n); the shorter distribution is zero-padded."""
    cutoff = max(p.cutoff, q.cutoff)
    overlap = np.sqrt(p.padded(cutoff) * q.padded(cutoff)).sum()
    return FidelityScore(float(overlap))


def physicality(n1: float, n2: float) -> bool:
    """True iff N2 >= N1^2, i.e. Mandel Q >= -1."""
    if not math.isfinite(n1) or n1 <= 0:
        raise DomainError(f"Mean photon number must be > 0, got {n1}")
    return n2 >= n1 * n1


def entropy(dist: PhotonDistribution) -> float:
    """Shannon entropy -sum_n p_n log p_n in nats."""
    p = dist.probs[dist.probs > 0]
    return float(-(p * np.log(p)).sum())
