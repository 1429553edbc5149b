"""Maximum-entropy photon distributions.

All observables involved are diagonal in the Fock basis, so the ME state
reduces to the exponential family

    q_n = exp(-sum_k lambda_k g_k(n)) / Z

over a truncated basis n = 0..cutoff, with g_k(n) = n^k at the moments
observation level and g_k(n) = (1 - eta_k)^n at the POVM level. The
multipliers solve <g_k>_q = t_k by Newton iteration on the dual objective
log Z(lambda) + lambda . t, whose Hessian is Cov_q(g).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from errors import DomainError, NearDegenerateError, UnphysicalMomentsError
from photon.states import Efficiency, PhotonDistribution, fock_distribution

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100
BOUNDARY_TOL = 1e-6
INTEGER_TOL = 1e-3
TAIL_TOL = 1e-12
MIN_CUTOFF = 20
MAX_CUTOFF = 4096
DEFAULT_POVM_CUTOFF = 40


class ObservationLevel(Enum):
    MOMENTS = "moments"
    POVM = "povm"


@dataclass(frozen=True, eq=False)
class MaxEntState:
    """Lagrange multipliers of a maximum-entropy photon distribution.

    Attributes:
        lambdas: Multipliers, one per constraint
        observation_level: Which observables the constraints refer to
        cutoff: Highest Fock index of the truncated basis
        log_partition: log Z over the truncated basis
        residuals: <g_k>_q - t_k for each constraint
        converged: True when max |residual| <= tol; point masses are judged
            against the boundary band instead
        etas: Channel efficiencies (POVM level only)
        targets: Constraint targets t_k
        point_mass: Photon number of a degenerate (Q = -1) solution, else None
        tail_mass: Mass the multipliers would place above the cutoff (0 when
            lambda_2 < 0 and the state lives in the truncated basis only)
        iterations: Newton iterations spent
    """

    lambdas: tuple[float, ...]
    observation_level: ObservationLevel
    cutoff: int
    log_partition: float = 0.0
    residuals: tuple[float, ...] = ()
    converged: bool = False
    etas: tuple[float, ...] = ()
    targets: tuple[float, ...] = ()
    point_mass: int | None = None
    tail_mass: float = 0.0
    iterations: int = 0
    _features: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "etas", tuple(float(v) for v in self.etas))
        if self.cutoff < 0:
            raise DomainError(f"cutoff must be >= 0, got {self.cutoff}")
        if self.point_mass is None:
            features = feature_matrix(
                self.observation_level, len(self.lambdas), self.cutoff, self.etas
            )
        else:
            features = feature_matrix(ObservationLevel.MOMENTS, 2, self.cutoff, ())
        object.__setattr__(self, "_features", features)

    @staticmethod
    def from_lambdas(
        lambdas: Sequence[float],
        observation_level: ObservationLevel,
        cutoff: int,
        etas: Sequence[float] = (),
        targets: Sequence[float] = (),
        tol: float | None = None,
        tail_mass: float = 0.0,
        iterations: int = 0,
    ) -> "MaxEntState":
        """Build a state for given multipliers, filling in log Z and residuals.

        Args:
            lambdas: Multipliers
            observation_level: Observation level of the constraints
            cutoff: Truncation of the Fock basis
            etas: Channel efficiencies (POVM level)
            targets: Constraint targets; residuals are empty without them
            tol: Residual tolerance deciding ``converged``
            tail_mass: Mass the multipliers place above the cutoff
            iterations: Solver iterations spent

        Returns:
            New MaxEntState
        """
        lam = np.asarray(lambdas, dtype=float)
        features = feature_matrix(observation_level, lam.size, cutoff, etas)
        log_z, q = _log_weights_normalized(features, lam)
        residuals = ()
        if len(targets):
            residuals = tuple(
                float(v) for v in features.T @ q - np.asarray(targets, dtype=float)
            )
        worst = max((abs(r) for r in residuals), default=0.0)
        converged = tol is not None and worst <= tol
        return MaxEntState(
            lambdas=tuple(lam),
            observation_level=observation_level,
            cutoff=cutoff,
            log_partition=float(log_z),
            residuals=residuals,
            converged=converged,
            etas=tuple(etas),
            targets=tuple(float(t) for t in targets),
            tail_mass=tail_mass,
            iterations=iterations,
        )

    @property
    def features(self) -> np.ndarray:
        """Matrix g_k(n), shape (cutoff + 1, constraints)."""
        return self._features

    @property
    def negative_quadratic(self) -> bool:
        """True when lambda_2 < 0: the n^2 series only converges once truncated."""
        return (
            self.observation_level is ObservationLevel.MOMENTS
            and len(self.lambdas) == 2
            and self.lambdas[1] < 0.0
        )

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)

    def to_dict(self) -> dict:
        return {
            "observation_level": self.observation_level.value,
            "lambdas": list(self.lambdas),
            "etas": list(self.etas),
            "targets": list(self.targets),
            "cutoff": self.cutoff,
            "log_partition": self.log_partition,
            "residuals": list(self.residuals),
            "converged": self.converged,
            "point_mass": self.point_mass,
            "tail_mass": self.tail_mass,
            "negative_quadratic": self.negative_quadratic,
            "iterations": self.iterations,
        }

    @staticmethod
    def from_dict(data: dict) -> "MaxEntState":
        return MaxEntState(
            lambdas=tuple(data["lambdas"]),
            observation_level=ObservationLevel(data["observation_level"]),
            cutoff=data["cutoff"],
            log_partition=data["log_partition"],
            residuals=tuple(data["residuals"]),
            converged=data["converged"],
            etas=tuple(data.get("etas", ())),
            targets=tuple(data.get("targets", ())),
            point_mass=data.get("point_mass"),
            tail_mass=data.get("tail_mass", 0.0),
            iterations=data.get("iterations", 0),
        )


def feature_matrix(
    level: ObservationLevel, count: int, cutoff: int, etas: Sequence[float] = ()
) -> np.ndarray:
    """Diagonal observables g_k(n) as a (cutoff + 1, count) matrix."""
    photons = np.arange(cutoff + 1, dtype=float)
    if level is ObservationLevel.MOMENTS:
        if count == 0:
            return np.zeros((cutoff + 1, 0))
        return np.column_stack([photons ** (k + 1) for k in range(count)])
    if len(etas) != count:
        raise DomainError(
            f"POVM level needs one efficiency per multiplier, got {len(etas)} for {count}"
        )
    return np.column_stack([np.power(1.0 - eta, photons) for eta in etas])


def _log_weights_normalized(features: np.ndarray, lambdas: np.ndarray):
    log_w = -(features @ lambdas) if lambdas.size else np.zeros(features.shape[0])
    log_z = logsumexp(log_w)
    return log_z, np.exp(log_w - log_z)


def maxent_distribution(state: MaxEntState) -> PhotonDistribution:
    """Normalized distribution q_n = exp(-sum_k lambda_k g_k(n)) / Z, n = 0..cutoff."""
    if state.point_mass is not None:
        return fock_distribution(state.point_mass)
    _, q = _log_weights_normalized(state.features, np.asarray(state.lambdas))
    return PhotonDistribution(probs=q, tail_mass_bound=min(state.tail_mass, 0.5))


def constraint_values(state: MaxEntState) -> np.ndarray:
    """Expectations <g_k>_q: (<n>, <n^2>) or (p_1 .. p_N) for the current lambdas."""
    return state.features.T @ maxent_distribution(state).probs


def constraint_jacobian(state: MaxEntState) -> np.ndarray:
    """d<g_k>/d lambda_j = -Cov_q(g_k, g_j)."""
    if state.point_mass is not None:
        return np.zeros((2, 2))
    _, q = _log_weights_normalized(state.features, np.asarray(state.lambdas))
    centered = state.features - q @ state.features
    return -(centered.T * q) @ centered


def _newton_solve(
    features: np.ndarray,
    targets: np.ndarray,
    lambdas: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Newton iteration on the dual log Z + lambda . t; returns (lambdas, residuals, iterations)."""

    def evaluate(lam):
        log_z, q = _log_weights_normalized(features, lam)
        mean = q @ features
        return log_z + float(lam @ targets), q, mean - targets

    dual, q, residuals = evaluate(lambdas)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if np.max(np.abs(residuals)) <= tol:
            return lambdas, residuals, iterations - 1

        centered = features - q @ features
        cov = (centered.T * q) @ centered
        step = np.linalg.lstsq(cov, residuals, rcond=None)[0]
        # Directional derivative of the dual along +step is -residuals . step.
        slope = -float(residuals @ step)

        alpha = 1.0
        current = float(np.max(np.abs(residuals)))
        for _ in range(50):
            trial = lambdas + alpha * step
            trial_dual, trial_q, trial_res = evaluate(trial)
            if np.all(np.isfinite(trial_res)) and (
                trial_dual <= dual + 1e-4 * alpha * slope
                or float(np.max(np.abs(trial_res))) < current
            ):
                break
            alpha *= 0.5
        else:
            logger.debug("MaxEnt line search stalled at iteration %d", iterations)
            return lambdas, residuals, iterations

        lambdas, dual, q, residuals = trial, trial_dual, trial_q, trial_res

    return lambdas, residuals, iterations


def _tail_mass(features_fn, lambdas: np.ndarray, cutoff: int) -> float:
    """Mass the multipliers put on (cutoff, 2 cutoff + 1] when the basis doubles."""
    extended = features_fn(2 * cutoff + 1)
    log_w = -(extended @ lambdas)
    log_z = logsumexp(log_w)
    return float(np.exp(logsumexp(log_w[cutoff + 1 :]) - log_z))


def default_moment_cutoff(n1: float, n2: float | None) -> int:
    """Starting cutoff max(20, ceil(n1 + 10 sqrt(var + n1))); thermal variance without n2."""
    variance = n1 * n1 + n1 if n2 is None else max(n2 - n1 * n1, 0.0)
    return max(MIN_CUTOFF, math.ceil(n1 + 10.0 * math.sqrt(variance + n1)))


def solve_moments(
    n1: float,
    n2: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    boundary_tol: float = BOUNDARY_TOL,
) -> MaxEntState:
    """ME state reproducing <n> = n1 and, unless ``n2`` is None, <n^2> = n2.

    With ``n2=None`` only the mean is constrained and the solution is thermal.
    The cutoff starts at ``default_moment_cutoff`` and doubles until the mass
    above it is below 1e-12. Super-thermal targets give lambda_2 < 0; such a
    solution exists only in the truncated basis, so the cutoff is kept as is,
    ``negative_quadratic`` is set and ``tail_mass`` is reported as 0.

    On the Q = -1 boundary with integer n1 = m the state is the point mass at
    m. It counts as converged as soon as the moments lie inside the
    ``boundary_tol`` band, so its residuals may exceed ``tol``.

    Raises:
        DomainError: If n1 <= 0 or n2 < n1
        UnphysicalMomentsError: If n2 < n1^2 beyond ``boundary_tol``
        NearDegenerateError: If n2 is on the n1^2 boundary but n1 is not an integer
    """
    if not math.isfinite(n1) or n1 <= 0:
        raise DomainError(f"Mean photon number must be > 0, got {n1}")
    if n2 is not None:
        if not math.isfinite(n2) or n2 < n1 * (1.0 - 1e-12):
            raise DomainError(f"Second moment must satisfy N2 >= N1, got ({n1}, {n2})")
        excess = n2 - n1 * n1
        if excess < -boundary_tol * n1:
            raise UnphysicalMomentsError(n1, n2)
        if excess <= boundary_tol * n1:
            m = round(n1)
            if abs(n1 - m) <= INTEGER_TOL and m >= 1:
                logger.info("Moments (%g, %g) on the Q = -1 boundary: number state |%d>", n1, n2, m)
                return MaxEntState(
                    lambdas=(),
                    observation_level=ObservationLevel.MOMENTS,
                    cutoff=m,
                    residuals=(m - n1, m * m - n2),
                    converged=True,
                    targets=(n1, n2),
                    point_mass=m,
                )
            raise NearDegenerateError(n1, n2)

    count = 1 if n2 is None else 2
    targets = np.array([n1] if n2 is None else [n1, n2])
    lambdas = np.zeros(count)
    lambdas[0] = math.log1p(1.0 / n1)

    def features_fn(cutoff):
        return feature_matrix(ObservationLevel.MOMENTS, count, cutoff)

    cutoff = default_moment_cutoff(n1, n2)
    total_iterations = 0
    while True:
        lambdas, residuals, iterations = _newton_solve(
            features_fn(cutoff), targets, lambdas, tol, max_iter
        )
        total_iterations += iterations
        if count == 2 and lambdas[1] < 0.0:
            # exp(|lambda_2| n^2) outgrows any cutoff: keep the truncated solution.
            tail = 0.0
            break
        tail = _tail_mass(features_fn, lambdas, cutoff)
        if tail < TAIL_TOL:
            break
        if 2 * cutoff > MAX_CUTOFF:
            logger.warning("Cutoff limit %d reached with tail mass %.3e", cutoff, tail)
            break
        cutoff *= 2

    state = MaxEntState.from_lambdas(
        lambdas,
        ObservationLevel.MOMENTS,
        cutoff,
        targets=tuple(targets),
        tol=tol,
        tail_mass=tail,
        iterations=total_iterations,
    )
    if state.negative_quadratic:
        logger.warning(
            "lambda_2 = %.3e < 0 for moments (%g, %g): solution exists only in the truncated basis",
            state.lambdas[1],
            n1,
            n2,
        )
    if not state.converged:
        logger.warning(
            "MaxEnt moments solve did not converge (max residual %.3e)", state.max_residual
        )
    return state


def solve_povm(
    probs: Sequence[tuple[Efficiency, float]],
    tol: float = DEFAULT_TOL,
    cutoff: int = DEFAULT_POVM_CUTOFF,
    max_iter: int = DEFAULT_MAX_ITER,
) -> MaxEntState:
    """ME state whose off probabilities at each efficiency match ``probs``.

    Args:
        probs: (efficiency, off probability) pairs, efficiencies distinct
        tol: Residual tolerance on the off probabilities
        cutoff: Truncation of the Fock basis; the POVM family needs one
        max_iter: Newton iteration budget

    Raises:
        DomainError: If a probability is outside (0, 1) or efficiencies repeat
    """
    etas = [eff.eta for eff, _ in probs]
    if not etas:
        raise DomainError("solve_povm needs at least one (efficiency, probability) pair")
    if len(set(etas)) != len(etas):
        raise DomainError(f"Efficiencies must be distinct, got {etas}")
    targets = np.array([float(p) for _, p in probs])
    if np.any(targets <= 0.0) or np.any(targets >= 1.0):
        raise DomainError(f"Off probabilities must lie in (0, 1), got {targets.tolist()}")
    if cutoff < 1:
        raise DomainError(f"POVM cutoff must be >= 1, got {cutoff}")

    features = feature_matrix(ObservationLevel.POVM, len(etas), cutoff, etas)
    lambdas, _, iterations = _newton_solve(features, targets, np.zeros(len(etas)), tol, max_iter)

    state = MaxEntState.from_lambdas(
        lambdas,
        ObservationLevel.POVM,
        cutoff,
        etas=etas,
        targets=tuple(targets),
        tol=tol,
        iterations=iterations,
    )
    if not state.converged:
        logger.warning("MaxEnt POVM solve did not converge (max residual %.3e)", state.max_residual)
    return state
