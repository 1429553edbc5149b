"""Photon-number distributions and simulated on/off detection."""

from photon.simulator import (
    ExperimentDesign,
    OnOffRecord,
    noiseless_records,
    simulate_channel,
    simulate_experiment,
)
from photon.states import (
    Efficiency,
    PhotonDistribution,
    coherent_distribution,
    fock_distribution,
    from_probabilities,
    mandel_q,
    moment,
    off_probability_exact,
    on_probability_exact,
    thermal_distribution,
)

__all__ = [
    "Efficiency",
    "PhotonDistribution",
    "coherent_distribution",
    "fock_distribution",
    "thermal_distribution",
    "from_probabilities",
    "moment",
    "off_probability_exact",
    "on_probability_exact",
    "mandel_q",
    "OnOffRecord",
    "ExperimentDesign",
    "simulate_channel",
    "simulate_experiment",
    "noiseless_records",
]
