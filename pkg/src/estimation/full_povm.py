from typing import Sequence

from estimation.base import (
    DistributionEstimator,
    EstimationResult,
    SolverOptions,
    StageTimer,
)
from estimation.maxent import maxent_distribution, solve_povm
from photon.simulator import OnOffRecord


class FullPovmEstimator(DistributionEstimator):
    """MaxEnt on the off-POVM elements themselves, fed the measured frequencies."""

    name = "full_povm"

    def infer(
        self,
        records: Sequence[OnOffRecord],
        options: SolverOptions,
        stage: StageTimer,
    ) -> EstimationResult:
        with stage("maxent"):
            state = solve_povm(
                [(record.eta, record.frequency) for record in records],
                tol=options.maxent_tol,
                cutoff=options.povm_cutoff,
                max_iter=options.maxent_max_iter,
            )
            distribution = maxent_distribution(state)

        return EstimationResult(moments=None, state=state, distribution=distribution)
