"""Seeded Monte Carlo simulation of on/off detector records."""

from dataclasses import dataclass

import numpy as np

from errors import DomainError
from photon.states import Efficiency, PhotonDistribution, off_probability_exact

RNG_ALGORITHM = "numpy.random.PCG64 (SeedSequence spawn_key=(channel,))"

# Shot count used to encode noiseless frequencies as exact integer ratios.
NOISELESS_SHOTS = 2**52


@dataclass(frozen=True)
class OnOffRecord:
    """Outcome of one detector channel.

    Attributes:
        eta: Quantum efficiency of the channel
        shots: Number of repeated preparations measured
        off_count: Number of off (no click) events
    """

    eta: Efficiency
    shots: int
    off_count: int

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise DomainError(f"shots must be an integer >= 1, got {self.shots}")
        if int(self.off_count) != self.off_count or not 0 <= self.off_count <= self.shots:
            raise DomainError(
                f"off_count must be an integer in [0, {self.shots}], got {self.off_count}"
            )
        object.__setattr__(self, "shots", int(self.shots))
        object.__setattr__(self, "off_count", int(self.off_count))

    @property
    def frequency(self) -> float:
        """Observed off frequency f = off_count / shots."""
        return self.off_count / self.shots

    def to_dict(self) -> dict:
        return {
            "eta": self.eta.eta,
            "shots": self.shots,
            "off_count": self.off_count,
            "frequency": self.frequency,
        }

    @staticmethod
    def from_dict(data: dict) -> "OnOffRecord":
        return OnOffRecord(
            eta=Efficiency(data["eta"]),
            shots=data["shots"],
            off_count=data["off_count"],
        )


@dataclass(frozen=True)
class ExperimentDesign:
    """Set of efficiencies probed, shots per channel, and the master seed.

    Attributes:
        efficiencies: Channel efficiencies, strictly increasing
        shots_per_channel: Preparations measured at each efficiency
        seed: Master seed from which per-channel streams are derived
    """

    efficiencies: tuple[Efficiency, ...]
    shots_per_channel: int
    seed: int

    def __post_init__(self):
        effs = tuple(e if isinstance(e, Efficiency) else Efficiency(e) for e in self.efficiencies)
        if not effs:
            raise DomainError("An experiment design needs at least one efficiency")
        etas = [e.eta for e in effs]
        if any(b <= a for a, b in zip(etas, etas[1:])):
            raise DomainError(f"Efficiencies must be strictly increasing, got {etas}")
        if int(self.shots_per_channel) != self.shots_per_channel or self.shots_per_channel < 1:
            raise DomainError(
                f"shots_per_channel must be an integer >= 1, got {self.shots_per_channel}"
            )
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "efficiencies", effs)
        object.__setattr__(self, "shots_per_channel", int(self.shots_per_channel))
        object.__setattr__(self, "seed", int(self.seed))

    def channel_stream(self, index: int) -> np.random.Generator:
        """Independent random stream of channel ``index``.

        The stream depends only on (seed, index), never on evaluation order.
        """
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(index,))
        return np.random.Generator(np.random.PCG64(seq))

    def to_dict(self) -> dict:
        return {
            "efficiencies": [e.eta for e in self.efficiencies],
            "shots_per_channel": self.shots_per_channel,
            "seed": self.seed,
        }


def simulate_channel(
    dist: PhotonDistribution,
    eff: Efficiency,
    shots: int,
    stream: np.random.Generator,
) -> OnOffRecord:
    """Draw the off count of one channel from Binomial(shots, p_off).

    Args:
        dist: True photon distribution
        eff: Channel efficiency
        shots: Number of preparations
        stream: Random stream; the draw is deterministic given its state

    Returns:
        Simulated record
    """
    if int(shots) != shots or shots < 1:
        raise DomainError(f"shots must be an integer >= 1, got {shots}")
    p_off = min(1.0, off_probability_exact(dist, eff))
    off_count = int(stream.binomial(int(shots), p_off))
    return OnOffRecord(eta=eff, shots=int(shots), off_count=off_count)


def simulate_experiment(
    dist: PhotonDistribution, design: ExperimentDesign
) -> list[OnOffRecord]:
    """Simulate every channel of ``design``, one record per efficiency in order."""
    return [
        simulate_channel(dist, eff, design.shots_per_channel, design.channel_stream(i))
        for i, eff in enumerate(design.efficiencies)
    ]


def noiseless_records(
    n1: float, n2: float, design: ExperimentDesign
) -> list[OnOffRecord]:
    """Records whose frequencies equal the second-order model probabilities.

    Frequencies are represented as off_count / 2**52, i.e. exact to 2**-52.
    """
    # Imported here: estimation depends on photon, not the other way round.
    from estimation.maxlik import model_off_probability

    records = []
    for eff in design.efficiencies:
        p_model = model_off_probability(n1, n2, eff)
        records.append(
            OnOffRecord(
                eta=eff,
                shots=NOISELESS_SHOTS,
                off_count=round(p_model * NOISELESS_SHOTS),
            )
        )
    return records
