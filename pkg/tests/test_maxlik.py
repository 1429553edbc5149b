import math

import numpy as np
import pytest

from errors import (
    DomainError,
    InfeasibleError,
    ModelOutOfRangeError,
    SingularityError,
    UnderdeterminedError,
)
from estimation.gradcheck import central_difference
from estimation.maxlik import (
    MomentEstimate,
    estimate_moments,
    likelihood_gradient,
    likelihood_hessian,
    model_bias,
    model_off_probability,
    normalized_log_likelihood,
    third_order_term,
)
from photon.simulator import ExperimentDesign, OnOffRecord, noiseless_records, simulate_experiment
from photon.states import (
    Efficiency,
    coherent_distribution,
    fock_distribution,
    from_probabilities,
    thermal_distribution,
)

rng = np.random.default_rng(137)
FEASIBLE_POINTS = [
    (n1, n1 + n1 * n1 * s) for n1, s in zip(rng.uniform(1.5, 3.0, 20), rng.uniform(0.5, 2.0, 20))
]


def test_model_off_probability_formula():
    eff = Efficiency(0.05)
    expected = 1.0 - 1.0 * (0.05 + 0.05**2 / 2) + 2.0 * 0.05**2 / 2
    assert model_off_probability(1.0, 2.0, eff) == pytest.approx(expected, rel=1e-15)


def test_model_off_probability_vacuum_limit():
    assert model_off_probability(0.0, 0.0, Efficiency(0.3)) == 1.0


def test_model_off_probability_errors():
    with pytest.raises(DomainError):
        model_off_probability(-1.0, 2.0, Efficiency(0.01))
    with pytest.raises(ModelOutOfRangeError):
        model_off_probability(50.0, 50.0, Efficiency(0.5))


@pytest.mark.parametrize("eta", [0.01, 0.1, 0.19])
def test_model_exact_up_to_two_photons(eta):
    eff = Efficiency(eta)
    for probs in ([0.2, 0.5, 0.3], [0.0, 0.0, 1.0], [0.7, 0.3]):
        dist = from_probabilities(probs)
        assert model_bias(dist, eff) <= 1e-12
        assert third_order_term(dist, eff) == pytest.approx(0.0, abs=1e-15)


def test_model_bias_led_by_third_order_term():
    eff = Efficiency(0.01)
    dist = coherent_distribution(1.0)
    assert model_bias(dist, eff) == pytest.approx(abs(third_order_term(dist, eff)), rel=1e-2)


@pytest.mark.parametrize("n1, n2", FEASIBLE_POINTS)
def test_likelihood_gradient_matches_finite_differences(design, n1, n2):
    records = noiseless_records(1.0, 2.0, design)
    analytic = np.array(likelihood_gradient(records, n1, n2))
    numeric = central_difference(
        lambda x: normalized_log_likelihood(records, x[0], x[1]), [n1, n2]
    )
    np.testing.assert_allclose(numeric, analytic, rtol=1e-6, atol=1e-6 * np.abs(analytic).max())


def test_likelihood_hessian_matches_gradient_differences(design):
    records = noiseless_records(1.0, 2.0, design)
    hess = likelihood_hessian(records, 2.0, 6.0)
    numeric = central_difference(
        lambda x: np.array(likelihood_gradient(records, x[0], x[1])), [2.0, 6.0]
    )
    np.testing.assert_allclose(numeric, hess, rtol=1e-5)
    assert np.all(np.linalg.eigvalsh(hess) <= 0.0)


def test_gradient_singular_when_model_leaves_interval():
    records = [
        OnOffRecord(eta=Efficiency(0.4), shots=10, off_count=5),
        OnOffRecord(eta=Efficiency(0.5), shots=10, off_count=5),
    ]
    with pytest.raises(SingularityError):
        likelihood_gradient(records, 10.0, 10.0)


@pytest.mark.parametrize("n1, n2", [(1.0, 2.0), (1.0, 3.0), (2.0, 4.0), (3.0, 12.0)])
def test_noiseless_round_trip(design, n1, n2):
    estimate = estimate_moments(noiseless_records(n1, n2, design))
    assert estimate.converged
    assert estimate.n1 == pytest.approx(n1, abs=1e-6)
    assert estimate.n2 == pytest.approx(n2, abs=1e-6)


def test_number_state_estimate_is_on_boundary(design):
    estimate = estimate_moments(noiseless_records(2.0, 4.0, design))
    assert estimate.mandel_q == pytest.approx(-1.0, abs=1e-6)


def test_large_shot_estimate_close_to_truth():
    design = ExperimentDesign((0.01, 0.02, 0.03, 0.04, 0.05), 10_000_000_000, seed=1)
    estimate = estimate_moments(simulate_experiment(coherent_distribution(1.0), design))
    # N2 carries the third-order bias of the model, about -0.02 here.
    assert estimate.n1 == pytest.approx(1.0, abs=5e-3)
    assert estimate.n2 == pytest.approx(2.0, abs=0.05)


def test_thermal_estimate_is_super_poissonian():
    design = ExperimentDesign((0.01, 0.02, 0.03, 0.04, 0.05), 10_000_000_000, seed=2)
    estimate = estimate_moments(simulate_experiment(thermal_distribution(1.0), design))
    assert estimate.mandel_q > 0.5


def test_single_efficiency_is_underdetermined():
    records = [
        OnOffRecord(eta=Efficiency(0.01), shots=100, off_count=99),
        OnOffRecord(eta=Efficiency(0.01), shots=100, off_count=98),
    ]
    with pytest.raises(UnderdeterminedError):
        estimate_moments(records)


def test_estimate_dict_round_trip(design):
    estimate = estimate_moments(noiseless_records(1.0, 2.0, design))
    data = estimate.to_dict()
    assert data["physical"] is True
    assert MomentEstimate.from_dict(data) == estimate


def test_fock_two_has_no_model_bias():
    assert model_bias(fock_distribution(2), Efficiency(0.05)) <= 1e-15


def test_log_likelihood_of_matching_frequency():
    # eta = 0.1 and (N1, N2) = (1, 1) give p = 0.9.
    record = OnOffRecord(eta=Efficiency(0.1), shots=10, off_count=9)
    expected = 0.9 * math.log(0.9) + 0.1 * math.log(0.1)
    assert normalized_log_likelihood([record], 1.0, 1.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(-0.325083, abs=1e-6)


def test_log_likelihood_is_maximal_at_matching_frequencies(design):
    records = noiseless_records(1.0, 2.0, design)
    best = normalized_log_likelihood(records, 1.0, 2.0)
    for n1, n2 in [(1.01, 2.0), (1.0, 2.1), (0.95, 1.9)]:
        assert normalized_log_likelihood(records, n1, n2) < best


@pytest.mark.parametrize("off_count", [0, 10])
def test_log_likelihood_drops_zero_weight_terms(off_count):
    eff = Efficiency(0.05)
    record = OnOffRecord(eta=eff, shots=10, off_count=off_count)
    p = model_off_probability(1.0, 2.0, eff)
    expected = math.log(p) if off_count == 10 else math.log(1.0 - p)
    assert normalized_log_likelihood([record], 1.0, 2.0) == pytest.approx(expected, rel=1e-14)


def test_log_likelihood_rejects_out_of_range_model():
    record = OnOffRecord(eta=Efficiency(0.5), shots=10, off_count=5)
    with pytest.raises(ModelOutOfRangeError):
        normalized_log_likelihood([record], 50.0, 50.0)


def test_gradient_of_single_all_off_record():
    record = OnOffRecord(eta=Efficiency(0.05), shots=10, off_count=10)
    d_n1, d_n2 = likelihood_gradient([record], 1.0, 2.0)
    assert d_n1 == pytest.approx(-0.05125 / 0.95125, rel=1e-12)
    assert d_n1 == pytest.approx(-0.0538765, abs=1e-7)
    assert d_n2 == pytest.approx(0.00125 / 0.95125, rel=1e-12)


def test_gradient_vanishes_at_matching_frequencies(design):
    records = noiseless_records(1.5, 4.0, design)
    np.testing.assert_allclose(likelihood_gradient(records, 1.5, 4.0), [0.0, 0.0], atol=1e-12)


def test_no_feasible_starting_point():
    # The near-zero efficiency drives the linear N1 fit to ~1e299.
    records = [
        OnOffRecord(eta=Efficiency(1e-300), shots=10, off_count=5),
        OnOffRecord(eta=Efficiency(0.5), shots=10, off_count=5),
    ]
    with pytest.raises(InfeasibleError):
        estimate_moments(records)


def test_maximizer_on_lower_boundary_converges(design):
    # The unconstrained optimum (1.0, 0.9) has N2 < N1.
    estimate = estimate_moments(noiseless_records(1.0, 0.9, design))
    assert estimate.converged
    assert estimate.iterations < 200
    assert estimate.gradient_norm <= 1e-9
    assert estimate.n2 >= estimate.n1
    assert estimate.n2 == pytest.approx(estimate.n1, rel=1e-6)
