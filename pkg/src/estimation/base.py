"""Abstract base class for photon-distribution estimators."""

from abc import ABC, abstractmethod
from contextlib import AbstractContextManager
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

from errors import ReconstructionError
from estimation.maxent import DEFAULT_POVM_CUTOFF, MaxEntState
from estimation.maxlik import MaxLikOptions, MomentEstimate
from photon.simulator import OnOffRecord
from photon.states import DEFAULT_TAIL_TOL, PhotonDistribution

StageTimer = Callable[[str], AbstractContextManager]


@dataclass(frozen=True)
class SolverOptions:
    """Numerical settings shared by every estimator.

    Attributes:
        tail_tol: Tail mass allowed when truncating closed-form distributions
        maxlik_tol: Gradient-norm threshold of the moment estimation
        maxlik_max_iter: Iteration budget of the moment estimation
        maxent_tol: Residual threshold of the MaxEnt solves
        maxent_max_iter: Newton iteration budget of the MaxEnt solves
        povm_cutoff: Fock-basis truncation of the POVM observation level
        boundary_tol: Relative width of the Q = -1 boundary band
    """

    tail_tol: float = DEFAULT_TAIL_TOL
    maxlik_tol: float = 1e-9
    maxlik_max_iter: int = 200
    maxent_tol: float = 1e-8
    maxent_max_iter: int = 100
    povm_cutoff: int = DEFAULT_POVM_CUTOFF
    boundary_tol: float = 1e-6

    def maxlik_options(self) -> MaxLikOptions:
        return MaxLikOptions(tol=self.maxlik_tol, max_iter=self.maxlik_max_iter)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EstimationResult:
    """Output of an estimator.

    Attributes:
        moments: Moment estimate of step one, None for single-step estimators
        state: Solved maximum-entropy state
        distribution: Inferred photon distribution q_n
        error: Why inference stopped before a distribution was produced
    """

    moments: MomentEstimate | None
    state: MaxEntState | None
    distribution: PhotonDistribution | None
    error: ReconstructionError | None = None

    @property
    def converged(self) -> bool:
        moments_ok = self.moments is None or self.moments.converged
        return moments_ok and self.state is not None and self.state.converged


class DistributionEstimator(ABC):
    """Base class for strategies that turn on/off records into a distribution."""

    name: str

    @abstractmethod
    def infer(
        self,
        records: Sequence[OnOffRecord],
        options: SolverOptions,
        stage: StageTimer,
    ) -> EstimationResult:
        """
        Infer the photon distribution from on/off records.

        Args:
            records: One record per efficiency
            options: Solver settings
            stage: Factory of timing context managers, called with a stage name

        Returns:
            Estimation result with solver diagnostics
        """
        pass
