"""Closed-form oracle checks of the solvers, run by ``main.py selfcheck``."""

from typing import Callable

import numpy as np

from estimation.gradcheck import central_difference
from estimation.maxent import (
    MaxEntState,
    ObservationLevel,
    constraint_jacobian,
    constraint_values,
    maxent_distribution,
    solve_moments,
    solve_povm,
)
from estimation.maxlik import (
    estimate_moments,
    likelihood_gradient,
    model_off_probability,
    normalized_log_likelihood,
)
from photon.simulator import ExperimentDesign, noiseless_records
from photon.states import (
    Efficiency,
    coherent_distribution,
    from_probabilities,
    off_probability_exact,
)

CheckResult = tuple[bool, str]

LOW_EFFICIENCIES = (0.01, 0.02, 0.03, 0.04, 0.05)


def _design() -> ExperimentDesign:
    return ExperimentDesign(LOW_EFFICIENCIES, shots_per_channel=1, seed=0)


def check_thermal_oracle() -> CheckResult:
    worst = 0.0
    for mu in (0.5, 1.0, 3.0):
        q = maxent_distribution(solve_moments(mu)).probs
        n = np.arange(q.size)
        expected = mu**n / (1.0 + mu) ** (n + 1)
        worst = max(worst, float(np.max(np.abs(q - expected))))
    return worst <= 1e-8, f"max |q_n - thermal_n| = {worst:.2e}"


def check_likelihood_gradient(seed: int = 0) -> CheckResult:
    records = noiseless_records(1.0, 2.0, _design())
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        n1 = rng.uniform(1.5, 3.0)
        n2 = n1 + n1 * n1 * rng.uniform(0.5, 2.0)
        analytic = np.array(likelihood_gradient(records, n1, n2))
        numeric = central_difference(
            lambda x: normalized_log_likelihood(records, x[0], x[1]), [n1, n2]
        )
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic)))
    return worst <= 1e-6, f"max relative error = {worst:.2e} over 20 points"


def check_constraint_jacobian() -> CheckResult:
    worst = 0.0
    for n1, n2 in ((1.0, 2.0), (2.0, 5.0), (3.0, 12.0), (2.0, 10.0)):
        state = solve_moments(n1, n2)

        def values(lam, cutoff=state.cutoff):
            probe = MaxEntState.from_lambdas(lam, ObservationLevel.MOMENTS, cutoff)
            return constraint_values(probe)

        analytic = constraint_jacobian(state)
        numeric = central_difference(values, state.lambdas)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic)))
    return worst <= 1e-6, f"max relative error = {worst:.2e}"


def check_noiseless_moments() -> CheckResult:
    estimate = estimate_moments(noiseless_records(1.0, 2.0, _design()))
    error = max(abs(estimate.n1 - 1.0), abs(estimate.n2 - 2.0))
    return error <= 1e-6, f"(N1, N2) = ({estimate.n1:.9f}, {estimate.n2:.9f})"


def check_noiseless_povm() -> CheckResult:
    truth = coherent_distribution(1.0)
    probs = [
        (Efficiency(eta), off_probability_exact(truth, Efficiency(eta)))
        for eta in LOW_EFFICIENCIES
    ]
    state = solve_povm(probs)
    return state.max_residual <= 1e-8, f"max |residual| = {state.max_residual:.2e}"


def check_model_exactness(seed: int = 0) -> CheckResult:
    """The second-order model is exact for light with at most two photons."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        dist = from_probabilities(rng.dirichlet(np.ones(3)))
        n1 = float(dist.probs[1] + 2.0 * dist.probs[2])
        n2 = float(dist.probs[1] + 4.0 * dist.probs[2])
        for eta in rng.uniform(1e-3, 0.2, size=5):
            eff = Efficiency(float(eta))
            gap = abs(off_probability_exact(dist, eff) - model_off_probability(n1, n2, eff))
            worst = max(worst, gap)
    return worst <= 1e-12, f"max |p_exact - p_model| = {worst:.2e}"


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "thermal oracle": check_thermal_oracle,
    "likelihood gradient": check_likelihood_gradient,
    "constraint jacobian": check_constraint_jacobian,
    "noiseless moments": check_noiseless_moments,
    "noiseless povm": check_noiseless_povm,
    "model exactness": check_model_exactness,
}


def selfcheck() -> bool:
    """Run every oracle check, printing one status line each.

    Returns:
        True when every check passes
    """
    print("--- Running self-checks ---")
    passed = 0
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as e:
            ok, detail = False, f"raised {type(e).__name__}: {e}"
        marker = "✅" if ok else "❌"
        print(f"{marker} {name}: {detail}")
        passed += ok

    total = len(CHECKS)
    print(f"--- {passed}/{total} checks passed ---")
    return passed == total
