"""Estimators: MaxLik moments, MaxEnt distributions, and their combinations."""

from estimation.base import DistributionEstimator, EstimationResult, SolverOptions
from estimation.full_povm import FullPovmEstimator
from estimation.two_step import TwoStepMomentsEstimator

ESTIMATORS: dict[str, type[DistributionEstimator]] = {
    TwoStepMomentsEstimator.name: TwoStepMomentsEstimator,
    FullPovmEstimator.name: FullPovmEstimator,
}

__all__ = [
    "DistributionEstimator",
    "EstimationResult",
    "SolverOptions",
    "TwoStepMomentsEstimator",
    "FullPovmEstimator",
    "ESTIMATORS",
]
