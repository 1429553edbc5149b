"""Maximum-likelihood estimation of the first two photon-number moments.

At low efficiency the off probability is expanded to second order,

    p(eta) = 1 - N1 * (eta + eta^2 / 2) + N2 * eta^2 / 2,

and (N1, N2) maximize the normalized binomial log-likelihood of the observed
off frequencies.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from errors import (
    DomainError,
    InfeasibleError,
    ModelOutOfRangeError,
    SingularityError,
    UnderdeterminedError,
)
from photon.simulator import OnOffRecord
from photon.states import (
    Efficiency,
    PhotonDistribution,
    mandel_q_from_moments,
    moment,
    off_probability_exact,
)

logger = logging.getLogger(__name__)

# n2 is parametrized as n2 = BOUNDARY_SHRINK * n1 + exp(v).
BOUNDARY_SHRINK = 1.0 - 1e-9
# Iterates with n2 - n1 below this fraction of n1 sit on the n2 = n1 face.
FACE_BAND = 1e-6
_FACE_NORMAL = np.array([1.0, -1.0]) / math.sqrt(2.0)


@dataclass(frozen=True)
class MaxLikOptions:
    """Solver settings for ``estimate_moments``.

    Attributes:
        tol: Convergence threshold on the projected gradient norm in (N1, N2)
            coordinates
        max_iter: Newton iteration budget
        step_tol: Relative step size below which iterations stop
    """

    tol: float = 1e-9
    max_iter: int = 200
    step_tol: float = 1e-12


@dataclass(frozen=True)
class MomentEstimate:
    """Maximum-likelihood moment pair with solver diagnostics."""

    n1: float
    n2: float
    loglik: float
    converged: bool
    iterations: int
    gradient_norm: float

    @property
    def physical(self) -> bool:
        """True when N2 >= N1^2, i.e. Mandel Q >= -1."""
        return self.n2 >= self.n1 * self.n1

    @property
    def mandel_q(self) -> float:
        return mandel_q_from_moments(self.n1, self.n2)

    def to_dict(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "loglik": self.loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
            "physical": self.physical,
            "mandel_q": self.mandel_q,
        }

    @staticmethod
    def from_dict(data: dict) -> "MomentEstimate":
        return MomentEstimate(
            n1=data["n1"],
            n2=data["n2"],
            loglik=data["loglik"],
            converged=data["converged"],
            iterations=data["iterations"],
            gradient_norm=data["gradient_norm"],
        )


def model_slopes(eff: Efficiency) -> tuple[float, float]:
    """Derivatives (dp/dN1, dp/dN2) of the second-order model; constant in N."""
    eta = eff.eta
    return -(eta + 0.5 * eta * eta), 0.5 * eta * eta


def _model_raw(n1: float, n2: float, eff: Efficiency) -> float:
    d1, d2 = model_slopes(eff)
    return 1.0 + n1 * d1 + n2 * d2


def model_off_probability(n1: float, n2: float, eff: Efficiency) -> float:
    """Second-order low-efficiency off probability.

    Raises:
        DomainError: If a moment is negative
        ModelOutOfRangeError: If the result leaves (0, 1); the (0, 0) vacuum
            limit, which gives exactly 1, is allowed
    """
    if n1 < 0 or n2 < 0:
        raise DomainError(f"Moments must be non-negative, got ({n1}, {n2})")
    p = _model_raw(n1, n2, eff)
    if n1 == 0 and n2 == 0:
        return p
    if not 0.0 < p < 1.0:
        raise ModelOutOfRangeError(
            f"Model off probability {p!r} at eta={eff.eta} is outside (0, 1) "
            f"for moments ({n1}, {n2})"
        )
    return p


def third_order_term(dist: PhotonDistribution, eff: Efficiency) -> float:
    """Third-order term -eta^3 (N3 - 3 N2 + 2 N1) / 6 of the expansion."""
    n1, n2, n3 = (moment(dist, k) for k in (1, 2, 3))
    return -(eff.eta**3) * (n3 - 3.0 * n2 + 2.0 * n1) / 6.0


def model_bias(dist: PhotonDistribution, eff: Efficiency) -> float:
    """|p_exact - p_model(N1, N2)|: truncation error of the second-order model."""
    p_model = _model_raw(moment(dist, 1), moment(dist, 2), eff)
    return abs(off_probability_exact(dist, eff) - p_model)


def _xlogy(x: float, y: float) -> float:
    # Weight-zero terms are dropped (x log x -> 0).
    return 0.0 if x == 0.0 else x * math.log(y)


def normalized_log_likelihood(
    records: Sequence[OnOffRecord], n1: float, n2: float
) -> float:
    """L / N = sum_nu [f log p + (1 - f) log(1 - p)]; larger is better."""
    total = 0.0
    for record in records:
        p = model_off_probability(n1, n2, record.eta)
        f = record.frequency
        total += _xlogy(f, p) + _xlogy(1.0 - f, 1.0 - p)
    return total


def _score_terms(records: Sequence[OnOffRecord], n1: float, n2: float):
    """Per-channel (f/p - (1-f)/(1-p), curvature weight, slope vector)."""
    for record in records:
        p = _model_raw(n1, n2, record.eta)
        if not 0.0 < p < 1.0:
            raise SingularityError(
                f"Model off probability {p!r} at eta={record.eta.eta} makes the "
                "likelihood gradient singular"
            )
        f = record.frequency
        score = f / p - (1.0 - f) / (1.0 - p)
        curvature = f / (p * p) + (1.0 - f) / ((1.0 - p) * (1.0 - p))
        yield score, curvature, np.array(model_slopes(record.eta))


def likelihood_gradient(
    records: Sequence[OnOffRecord], n1: float, n2: float
) -> tuple[float, float]:
    """Partial derivatives of L / N with respect to (N1, N2).

    Raises:
        SingularityError: If a channel's model probability is 0 or 1
    """
    grad = np.zeros(2)
    for score, _, slopes in _score_terms(records, n1, n2):
        grad += score * slopes
    return float(grad[0]), float(grad[1])


def likelihood_hessian(
    records: Sequence[OnOffRecord], n1: float, n2: float
) -> np.ndarray:
    """Hessian of L / N in (N1, N2); a sum of negative rank-one terms."""
    hess = np.zeros((2, 2))
    for _, curvature, slopes in _score_terms(records, n1, n2):
        hess -= curvature * np.outer(slopes, slopes)
    return hess


def _initial_guess(records: Sequence[OnOffRecord]) -> tuple[float, float]:
    n1 = float(np.mean([(1.0 - r.frequency) / r.eta.eta for r in records]))
    n1 = max(n1, 1e-6)
    for _ in range(60):
        n2 = n1 * (n1 + 1.0)
        if all(0.0 < _model_raw(n1, n2, r.eta) < 1.0 for r in records):
            return n1, n2
        n1 *= 0.5
    raise InfeasibleError("No feasible starting point: every trial moment pair leaves (0, 1)")


def _to_moments(x: np.ndarray) -> tuple[float, float]:
    n1 = math.exp(x[0])
    return n1, BOUNDARY_SHRINK * n1 + math.exp(x[1])


def _feasible(records: Sequence[OnOffRecord], n1: float, n2: float) -> bool:
    return all(0.0 < _model_raw(n1, n2, r.eta) < 1.0 for r in records)


def _on_face(n1: float, n2: float) -> bool:
    return n2 - n1 <= FACE_BAND * n1


def _projected_gradient_norm(g: np.ndarray, n1: float, n2: float) -> float:
    """Gradient norm without the part pushing out through the n2 = n1 face."""
    if _on_face(n1, n2):
        outward = float(g @ _FACE_NORMAL)
        if outward > 0.0:
            g = g - outward * _FACE_NORMAL
    return float(np.linalg.norm(g))


def estimate_moments(
    records: Sequence[OnOffRecord], options: MaxLikOptions | None = None
) -> MomentEstimate:
    """Maximize the normalized log-likelihood over {n1 > 0, n2 >= n1, p in (0, 1)}.

    Damped Newton in the coordinates (log n1, log(n2 - n1 (1 - 1e-9))), which
    keep iterates feasible; a backtracking gradient step replaces Newton when
    the transformed Hessian is not negative definite. A maximizer on the
    n2 = n1 face is converged once the gradient, minus its outward part, is
    below ``tol``.

    Args:
        records: On/off records, at least two distinct efficiencies
        options: Solver settings

    Returns:
        The moment estimate with convergence diagnostics

    Raises:
        UnderdeterminedError: If fewer than two distinct efficiencies are given
        InfeasibleError: If no feasible interior starting point exists
    """
    options = options or MaxLikOptions()
    if len({r.eta.eta for r in records}) < 2:
        raise UnderdeterminedError(
            "Estimating (N1, N2) needs records at two or more distinct efficiencies"
        )

    n1, n2 = _initial_guess(records)
    x = np.array([math.log(n1), math.log(n2 - BOUNDARY_SHRINK * n1)])
    value = normalized_log_likelihood(records, n1, n2)
    grad_norm = math.inf
    iterations = 0

    for iterations in range(1, options.max_iter + 1):
        n1, n2 = _to_moments(x)
        g = np.array(likelihood_gradient(records, n1, n2))
        grad_norm = _projected_gradient_norm(g, n1, n2)
        if grad_norm <= options.tol and _on_face(n1, n2):
            # Further steps only push log(n2 - n1) towards -inf.
            break
        h = likelihood_hessian(records, n1, n2)

        # Chain rule through n1 = e^u, n2 = c e^u + e^v.
        jac = np.array([[n1, 0.0], [BOUNDARY_SHRINK * n1, n2 - BOUNDARY_SHRINK * n1]])
        grad_x = jac.T @ g
        hess_x = jac.T @ h @ jac + np.diag(grad_x)

        try:
            np.linalg.cholesky(-hess_x)
            direction = np.linalg.solve(-hess_x, grad_x)
        except np.linalg.LinAlgError:
            logger.debug("Transformed Hessian not negative definite; gradient step")
            direction = grad_x / max(1.0, float(np.linalg.norm(grad_x)))

        slope = float(grad_x @ direction)
        step = 1.0
        accepted = False
        for _ in range(60):
            trial = x + step * direction
            t1, t2 = _to_moments(trial)
            if _feasible(records, t1, t2):
                trial_value = normalized_log_likelihood(records, t1, t2)
                if trial_value >= value + 1e-4 * step * slope or (
                    trial_value >= value and grad_norm <= options.tol
                ):
                    accepted = True
                    break
            step *= 0.5

        if not accepted:
            logger.debug("Line search stalled at iteration %d", iterations)
            break

        moved = step * float(np.max(np.abs(direction)))
        x = trial
        value = trial_value
        if grad_norm <= options.tol and moved <= options.step_tol:
            break

    n1, n2 = _to_moments(x)
    # Boundary tie-break: the parametrization allows n2 a hair below n1.
    n2 = max(n2, n1)
    grad_norm = _projected_gradient_norm(
        np.array(likelihood_gradient(records, n1, n2)), n1, n2
    )
    converged = grad_norm <= options.tol
    if not converged:
        logger.warning(
            "Moment estimation did not converge after %d iterations "
            "(gradient norm %.3e)",
            iterations,
            grad_norm,
        )

    return MomentEstimate(
        n1=n1,
        n2=n2,
        loglik=normalized_log_likelihood(records, n1, n2),
        converged=converged,
        iterations=iterations,
        gradient_norm=grad_norm,
    )
