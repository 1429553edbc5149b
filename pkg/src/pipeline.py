"""End-to-end reconstruction pipeline: simulate, estimate, infer, score."""

import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

from config import ExperimentConfig
from errors import UnphysicalMomentsError
from estimation import ESTIMATORS
from estimation.maxlik import model_bias
from logger.models import ChannelDiagnostics, ExperimentReport, StageTiming
from metrics import fidelity
from photon.simulator import (
    RNG_ALGORITHM,
    noiseless_records,
    simulate_experiment,
)
from photon.states import moment, off_probability_exact

logger = logging.getLogger(__name__)


class StageClock:
    """Collects a StageTiming for every ``with clock(name):`` block."""

    def __init__(self):
        self.timings: list[StageTiming] = []

    @contextmanager
    def __call__(self, stage: str):
        timing = StageTiming(stage)
        try:
            yield timing
        finally:
            timing.complete()
            self.timings.append(timing)


def run_pipeline(config: ExperimentConfig) -> ExperimentReport:
    """Run simulate -> estimate -> MaxEnt -> fidelity for one config.

    Unphysical or near-degenerate moment estimates end the run early with the
    matching status; solver non-convergence still yields a distribution.

    Args:
        config: Experiment config (seed included)

    Returns:
        The report; writing it is left to a ReportLogger
    """
    clock = StageClock()
    truth = config.state.build(config.solver.tail_tol)
    design = config.design

    with clock("simulate"):
        if config.noiseless:
            records = noiseless_records(moment(truth, 1), moment(truth, 2), design)
        else:
            records = simulate_experiment(truth, design)

    diagnostics = [
        ChannelDiagnostics(
            eta=eff.eta,
            p_exact=off_probability_exact(truth, eff),
            model_bias=model_bias(truth, eff),
        )
        for eff in design.efficiencies
    ]

    estimator = ESTIMATORS[config.estimator]()
    result = estimator.infer(records, config.solver, clock)

    report = ExperimentReport(
        config=config.to_dict(),
        seed=design.seed,
        rng_algorithm=RNG_ALGORITHM,
        status="success",
        records=records,
        diagnostics=diagnostics,
        true_distribution=truth,
        moments=result.moments,
        state=result.state,
        inferred_distribution=result.distribution,
        timings=clock.timings,
    )

    if result.error is not None:
        unphysical = isinstance(result.error, UnphysicalMomentsError)
        report.status = "unphysical" if unphysical else "near_degenerate"
        report.error_message = str(result.error)
        logger.info("Run %s aborted: %s", config.name, result.error)
        return report

    with clock("fidelity"):
        report.fidelity = fidelity(truth, result.distribution).value

    if not result.converged:
        report.status = "not_converged"
    return report


@dataclass
class EnsembleSummary:
    """Outcome of running one config over a range of seeds.

    Attributes:
        name: Experiment name
        threshold: Fidelity a run must exceed to pass
        seeds: Seeds in run order
        fidelities: Fidelity per seed (None when the run aborted)
        statuses: Report status per seed
    """

    name: str
    threshold: float
    seeds: list[int]
    fidelities: list[float | None] = field(default_factory=list)
    statuses: list[str] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(1 for f in self.fidelities if f is not None and f > self.threshold)

    @property
    def pass_fraction(self) -> float:
        return self.passed / len(self.seeds) if self.seeds else 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "threshold": self.threshold,
            "runs": len(self.seeds),
            "passed": self.passed,
            "pass_fraction": self.pass_fraction,
            "seeds": self.seeds,
            "fidelities": self.fidelities,
            "statuses": self.statuses,
        }


def run_ensemble(
    config: ExperimentConfig,
    seeds: list[int],
    threshold: float,
    workers: int = 1,
) -> EnsembleSummary:
    """Run the pipeline once per seed and count runs with fidelity above ``threshold``.

    Results are assembled in seed order whatever the number of workers.
    """

    def one(seed: int) -> ExperimentReport:
        return run_pipeline(config.with_overrides(seed=seed))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, seeds))
    else:
        reports = [one(seed) for seed in seeds]

    return EnsembleSummary(
        name=config.name,
        threshold=threshold,
        seeds=list(seeds),
        fidelities=[r.fidelity for r in reports],
        statuses=[r.status for r in reports],
    )

