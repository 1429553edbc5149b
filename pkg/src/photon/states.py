"""Closed-form photon-number distributions and the on/off POVM."""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import poisson

from errors import DomainError, UndefinedValueError

DEFAULT_TAIL_TOL = 1e-12

# Slack for floating-point summation when checking normalization.
_SUM_SLACK = 1e-9


@dataclass(frozen=True)
class Efficiency:
    """Quantum efficiency of an on/off detector channel.

    Attributes:
        eta: Probability that a single photon fires the detector, in (0, 1)
    """

    eta: float

    def __post_init__(self):
        eta = float(self.eta)
        if not math.isfinite(eta) or not 0.0 < eta < 1.0:
            raise DomainError(f"Efficiency must lie in the open interval (0, 1), got {eta}")
        object.__setattr__(self, "eta", eta)

    def __float__(self) -> float:
        return self.eta


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """Diagonal of a density matrix in a truncated Fock basis.

    Attributes:
        probs: Probabilities rho_n for n = 0..cutoff (read-only array)
        tail_mass_bound: Upper bound on the probability discarded above cutoff
    """

    probs: np.ndarray
    tail_mass_bound: float = 0.0
    _photons: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError("Photon distribution needs a non-empty 1-D probability vector")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0.0):
            raise DomainError("Photon probabilities must be finite and non-negative")
        tail = float(self.tail_mass_bound)
        if not 0.0 <= tail < 1.0:
            raise DomainError(f"tail_mass_bound must lie in [0, 1), got {tail}")
        total = float(probs.sum())
        if total > 1.0 + _SUM_SLACK or total < 1.0 - tail - _SUM_SLACK:
            raise DomainError(
                f"Probabilities sum to {total!r}, outside [1 - {tail:g}, 1]"
            )
        probs.setflags(write=False)
        photons = np.arange(probs.size, dtype=float)
        photons.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass_bound", tail)
        object.__setattr__(self, "_photons", photons)

    @property
    def cutoff(self) -> int:
        """Highest Fock index retained."""
        return self.probs.size - 1

    @property
    def photons(self) -> np.ndarray:
        """Photon numbers 0..cutoff as floats."""
        return self._photons

    def padded(self, cutoff: int) -> np.ndarray:
        """Return the probabilities zero-padded to ``cutoff``.

        Args:
            cutoff: Target cutoff, not smaller than this distribution's

        Returns:
            New array with cutoff + 1 entries
        """
        if cutoff < self.cutoff:
            raise DomainError(f"Cannot pad cutoff {self.cutoff} down to {cutoff}")
        out = np.zeros(cutoff + 1)
        out[: self.probs.size] = self.probs
        return out

    def to_dict(self) -> dict:
        """Convert to dictionary representation.

        Returns:
            Dictionary with probabilities, cutoff and tail bound
        """
        return {
            "cutoff": self.cutoff,
            "tail_mass_bound": self.tail_mass_bound,
            "probs": [float(p) for p in self.probs],
        }

    @staticmethod
    def from_dict(data: dict) -> "PhotonDistribution":
        return PhotonDistribution(
            probs=np.asarray(data["probs"], dtype=float),
            tail_mass_bound=data.get("tail_mass_bound", 0.0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check_tail_tol(tail_tol: float) -> None:
    if not 0.0 < tail_tol < 1.0:
        raise DomainError(f"tail_tol must lie in (0, 1), got {tail_tol}")


def coherent_distribution(
    mean_photons: float, tail_tol: float = DEFAULT_TAIL_TOL
) -> PhotonDistribution:
    """Poisson photon statistics of a coherent state with |alpha|^2 = mean_photons.

    The cutoff is the smallest M whose exact Poisson tail P(n > M) is at most
    ``tail_tol``.

    Args:
        mean_photons: Mean photon number, >= 0
        tail_tol: Largest probability mass allowed above the cutoff

    Returns:
        Truncated Poisson distribution
    """
    if not math.isfinite(mean_photons) or mean_photons < 0:
        raise DomainError(f"Mean photon number must be >= 0, got {mean_photons}")
    _check_tail_tol(tail_tol)
    if mean_photons == 0:
        return fock_distribution(0)

    cutoff = int(mean_photons)
    while poisson.sf(cutoff, mean_photons) > tail_tol:
        cutoff += 1
    probs = poisson.pmf(np.arange(cutoff + 1), mean_photons)
    tail = float(poisson.sf(cutoff, mean_photons))
    return PhotonDistribution(probs=probs, tail_mass_bound=tail)


def fock_distribution(m: int) -> PhotonDistribution:
    """Point mass at photon number ``m`` (number state |m>)."""
    if int(m) != m or m < 0:
        raise DomainError(f"Fock index must be a non-negative integer, got {m}")
    probs = np.zeros(int(m) + 1)
    probs[-1] = 1.0
    return PhotonDistribution(probs=probs, tail_mass_bound=0.0)


def thermal_distribution(
    mean_photons: float, tail_tol: float = DEFAULT_TAIL_TOL
) -> PhotonDistribution:
    """Geometric (Bose-Einstein) law rho_n = mu^n / (1 + mu)^(n + 1).

    Args:
        mean_photons: Mean photon number mu, >= 0
        tail_tol: Largest probability mass allowed above the cutoff

    Returns:
        Truncated thermal distribution
    """
    if not math.isfinite(mean_photons) or mean_photons < 0:
        raise DomainError(f"Mean photon number must be >= 0, got {mean_photons}")
    _check_tail_tol(tail_tol)
    if mean_photons == 0:
        return fock_distribution(0)

    ratio = mean_photons / (1.0 + mean_photons)
    # P(n > M) = ratio ** (M + 1)
    cutoff = max(0, math.ceil(math.log(tail_tol) / math.log(ratio)) - 1)
    while ratio ** (cutoff + 1) > tail_tol:
        cutoff += 1
    photons = np.arange(cutoff + 1, dtype=float)
    probs = np.exp(photons * math.log(ratio)) / (1.0 + mean_photons)
    return PhotonDistribution(probs=probs, tail_mass_bound=ratio ** (cutoff + 1))


def from_probabilities(probs, tail_mass_bound: float = 0.0) -> PhotonDistribution:
    """Build a distribution from an explicit probability list."""
    return PhotonDistribution(
        probs=np.asarray(probs, dtype=float), tail_mass_bound=tail_mass_bound
    )


def moment(dist: PhotonDistribution, k: int) -> float:
    """k-th moment N_k = sum_n n^k rho_n over the truncated basis."""
    if int(k) != k or k < 1:
        raise DomainError(f"Moment order must be an integer >= 1, got {k}")
    return float(np.dot(dist.photons ** int(k), dist.probs))


def povm_off_weights(eff: Efficiency, cutoff: int) -> np.ndarray:
    """Diagonal of the off-outcome POVM element, (1 - eta)^n for n = 0..cutoff."""
    return np.power(1.0 - eff.eta, np.arange(cutoff + 1, dtype=float))


def off_probability_exact(dist: PhotonDistribution, eff: Efficiency) -> float:
    """Probability of the off event, p = sum_n (1 - eta)^n rho_n."""
    return float(np.dot(povm_off_weights(eff, dist.cutoff), dist.probs))


def on_probability_exact(dist: PhotonDistribution, eff: Efficiency) -> float:
    """Probability of the on event; the on element is the identity minus the off one."""
    return 1.0 - off_probability_exact(dist, eff)


def mandel_q_from_moments(n1: float, n2: float) -> float:
    """Mandel parameter Q = -1 + (N2 - N1^2) / N1 from a moment pair."""
    if n1 == 0:
        raise UndefinedValueError("Mandel Q is undefined for zero mean photon number")
    return -1.0 + (n2 - n1 * n1) / n1


def mandel_q(dist: PhotonDistribution) -> float:
    """Mandel parameter of a distribution; undefined for the vacuum."""
    return mandel_q_from_moments(moment(dist, 1), moment(dist, 2))
