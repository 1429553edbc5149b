import math

import pytest

from errors import DomainError
from estimation.maxlik import model_off_probability
from photon.simulator import (
    NOISELESS_SHOTS,
    ExperimentDesign,
    OnOffRecord,
    noiseless_records,
    simulate_channel,
    simulate_experiment,
)
from photon.states import Efficiency, coherent_distribution, off_probability_exact


def test_same_seed_gives_same_records(design):
    dist = coherent_distribution(1.0)
    assert simulate_experiment(dist, design) == simulate_experiment(dist, design)


def test_different_seeds_give_different_records(design):
    dist = coherent_distribution(1.0)
    other = ExperimentDesign(design.efficiencies, design.shots_per_channel, design.seed + 1)
    assert simulate_experiment(dist, design) != simulate_experiment(dist, other)


def test_channel_stream_independent_of_evaluation_order(design):
    dist = coherent_distribution(1.0)
    records = simulate_experiment(dist, design)
    last = len(design.efficiencies) - 1
    alone = simulate_channel(
        dist, design.efficiencies[last], design.shots_per_channel, design.channel_stream(last)
    )
    assert alone == records[last]


def test_frequencies_within_five_sigma(design):
    dist = coherent_distribution(1.0)
    for record in simulate_experiment(dist, design):
        p = off_probability_exact(dist, record.eta)
        sigma = math.sqrt(p * (1.0 - p) / record.shots)
        assert abs(record.frequency - p) <= 5.0 * sigma


def test_noiseless_records_match_model(design):
    for record in noiseless_records(1.0, 2.0, design):
        assert record.shots == NOISELESS_SHOTS
        p = model_off_probability(1.0, 2.0, record.eta)
        assert abs(record.frequency - p) <= 2.0**-52


def test_mean_frequency_over_many_seeds_is_unbiased():
    dist = coherent_distribution(1.0)
    etas = (0.01, 0.02, 0.03, 0.04, 0.05)
    repeats, shots = 200, 100_000
    runs = [
        simulate_experiment(dist, ExperimentDesign(etas, shots, seed)) for seed in range(repeats)
    ]
    for channel, eta in enumerate(etas):
        p = off_probability_exact(dist, Efficiency(eta))
        sigma = math.sqrt(p * (1.0 - p) / shots)
        mean = sum(run[channel].frequency for run in runs) / repeats
        # A fair generator breaks the 4 sigma bound with probability about 6e-5.
        assert abs(mean - p) <= 4.0 * sigma / math.sqrt(repeats)


@pytest.mark.parametrize(
    "efficiencies, shots, seed",
    [
        ((0.02, 0.01), 10, 0),
        ((0.01, 0.01), 10, 0),
        ((0.01, 1.5), 10, 0),
        ((0.01, 0.02), 0, 0),
        ((0.01, 0.02), 10, -1),
        ((0.01, 0.02), 10, 2**64),
    ],
)
def test_invalid_design(efficiencies, shots, seed):
    with pytest.raises(DomainError):
        ExperimentDesign(efficiencies, shots, seed)


@pytest.mark.parametrize("shots, off_count", [(0, 0), (10, 11), (10, -1), (10, 2.5)])
def test_invalid_record(shots, off_count):
    with pytest.raises(DomainError):
        OnOffRecord(eta=Efficiency(0.01), shots=shots, off_count=off_count)


def test_record_dict_round_trip():
    record = OnOffRecord(eta=Efficiency(0.03), shots=1000, off_count=970)
    assert record.frequency == 0.97
    assert OnOffRecord.from_dict(record.to_dict()) == record
