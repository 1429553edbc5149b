import math

import pytest

from errors import DomainError
from metrics import FidelityScore, entropy, fidelity, physicality
from photon.states import (
    coherent_distribution,
    fock_distribution,
    from_probabilities,
    thermal_distribution,
)


def test_fidelity_of_identical_distributions_is_one():
    dist = coherent_distribution(2.0)
    assert fidelity(dist, dist).value == pytest.approx(1.0, abs=1e-12)


def test_fidelity_of_disjoint_supports_is_zero():
    assert fidelity(fock_distribution(1), fock_distribution(3)).value == 0.0


def test_fidelity_pads_shorter_distribution():
    p = from_probabilities([0.5, 0.5])
    q = from_probabilities([0.5, 0.0, 0.5])
    assert fidelity(p, q).value == pytest.approx(0.5)
    assert fidelity(q, p).value == fidelity(p, q).value


def test_fidelity_between_coherent_states():
    # Overlap of two Poisson laws: exp(-(sqrt(a) - sqrt(b))^2 / 2).
    score = fidelity(coherent_distribution(1.0), coherent_distribution(2.0))
    assert score.value == pytest.approx(math.exp(-((1.0 - math.sqrt(2.0)) ** 2) / 2), rel=1e-10)


def test_fidelity_score_is_clamped():
    assert FidelityScore(1.0 + 1e-15).value == 1.0
    assert float(FidelityScore(0.25)) == 0.25


@pytest.mark.parametrize(
    "n1, n2, expected",
    [(1.0, 2.0, True), (2.0, 4.0, True), (2.0, 3.99, False), (3.15, 11.4, True)],
)
def test_physicality(n1, n2, expected):
    assert physicality(n1, n2) is expected


@pytest.mark.parametrize("n1", [0.0, -1.0, float("nan")])
def test_physicality_requires_positive_mean(n1):
    with pytest.raises(DomainError):
        physicality(n1, 1.0)


def test_entropy_of_number_state_is_zero():
    assert entropy(fock_distribution(4)) == 0.0


@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_entropy_of_thermal_state(mu):
    expected = (1.0 + mu) * math.log1p(mu) - mu * math.log(mu)
    assert entropy(thermal_distribution(mu)) == pytest.approx(expected, rel=1e-9)
