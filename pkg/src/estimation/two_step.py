from typing import Sequence

from errors import NearDegenerateError, UnphysicalMomentsError
from estimation.base import (
    DistributionEstimator,
    EstimationResult,
    SolverOptions,
    StageTimer,
)
from estimation.maxent import maxent_distribution, solve_moments
from estimation.maxlik import estimate_moments
from photon.simulator import OnOffRecord


class TwoStepMomentsEstimator(DistributionEstimator):
    """MaxLik estimate of (N1, N2), then the two-moment MaxEnt distribution."""

    name = "two_step_moments"

    def infer(
        self,
        records: Sequence[OnOffRecord],
        options: SolverOptions,
        stage: StageTimer,
    ) -> EstimationResult:
        with stage("maxlik"):
            moments = estimate_moments(records, options.maxlik_options())

        with stage("maxent"):
            try:
                state = solve_moments(
                    moments.n1,
                    moments.n2,
                    tol=options.maxent_tol,
                    max_iter=options.maxent_max_iter,
                    boundary_tol=options.boundary_tol,
                )
            except (UnphysicalMomentsError, NearDegenerateError) as e:
                # Keep the step-one estimate for the report.
                return EstimationResult(moments=moments, state=None, distribution=None, error=e)
            distribution = maxent_distribution(state)

        return EstimationResult(moments=moments, state=state, distribution=distribution)
