"""Data models for experiment reports and run sessions."""

import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime
from typing import Literal

from estimation.maxent import MaxEntState
from estimation.maxlik import MomentEstimate
from photon.simulator import OnOffRecord
from photon.states import PhotonDistribution

ReportStatus = Literal["success", "unphysical", "near_degenerate", "not_converged"]


@dataclass
class StageTiming:
    """Wall-clock timing of one pipeline stage.

    Attributes:
        stage: Stage name (simulate, maxlik, maxent, fidelity, ...)
        started_at: Timestamp when the stage started
        completed_at: Timestamp when the stage completed
        duration_ms: Stage duration in milliseconds
    """

    stage: str
    started_at: datetime = field(default_factory=datetime.now)
    completed_at: datetime | None = None
    duration_ms: float = 0.0

    def complete(self) -> None:
        """Mark the stage as completed and calculate duration."""
        self.completed_at = datetime.now()
        delta = self.completed_at - self.started_at
        self.duration_ms = delta.total_seconds() * 1000

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "started_at": self.started_at.isoformat(),
            "completed_at": (
                self.completed_at.isoformat() if self.completed_at else None
            ),
            "duration_ms": self.duration_ms,
        }


@dataclass
class ChannelDiagnostics:
    """Exact off probability and second-order model bias of one channel."""

    eta: float
    p_exact: float
    model_bias: float

    def to_dict(self) -> dict:
        return {"eta": self.eta, "p_exact": self.p_exact, "model_bias": self.model_bias}


@dataclass
class ExperimentReport:
    """Full provenance of one pipeline run.

    Attributes:
        config: Effective config echo (after CLI overrides)
        seed: Master seed of the simulated design
        rng_algorithm: Name of the random generator and stream derivation
        status: Outcome of the run
        records: Per-channel on/off records
        diagnostics: Per-channel exact probabilities and model bias
        true_distribution: Ground-truth photon distribution
        moments: Step-one moment estimate, if the estimator has one
        state: Solved MaxEnt state, absent when the run aborted before it
        inferred_distribution: Inferred photon distribution
        fidelity: Fidelity between true and inferred distributions
        error_message: Reason for an aborted run
        timings: Per-stage wall-clock timings (not part of the report document)
    """

    config: dict
    seed: int
    rng_algorithm: str
    status: ReportStatus
    records: list[OnOffRecord]
    diagnostics: list[ChannelDiagnostics]
    true_distribution: PhotonDistribution
    moments: MomentEstimate | None = None
    state: MaxEntState | None = None
    inferred_distribution: PhotonDistribution | None = None
    fidelity: float | None = None
    error_message: str | None = None
    timings: list[StageTiming] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        moments_ok = self.moments is None or self.moments.converged
        return moments_ok and self.state is not None and self.state.converged

    def to_dict(self) -> dict:
        """Convert to the deterministic report document.

        Timings are left out so that identical configs give identical bytes.
        """
        return {
            "config": self.config,
            "seed": self.seed,
            "rng_algorithm": self.rng_algorithm,
            "status": self.status,
            "error_message": self.error_message,
            "records": [r.to_dict() for r in self.records],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "moments": self.moments.to_dict() if self.moments else None,
            "maxent": self.state.to_dict() if self.state else None,
            "converged": self.converged,
            "true_distribution": self.true_distribution.to_dict(),
            "inferred_distribution": (
                self.inferred_distribution.to_dict()
                if self.inferred_distribution
                else None
            ),
            "fidelity": self.fidelity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @staticmethod
    def from_dict(data: dict) -> "ExperimentReport":
        """Rebuild a report from its document (timings are not restored)."""
        return ExperimentReport(
            config=data["config"],
            seed=data["seed"],
            rng_algorithm=data["rng_algorithm"],
            status=data["status"],
            records=[OnOffRecord.from_dict(r) for r in data["records"]],
            diagnostics=[ChannelDiagnostics(**d) for d in data.get("diagnostics", [])],
            true_distribution=PhotonDistribution.from_dict(data["true_distribution"]),
            moments=(
                MomentEstimate.from_dict(data["moments"]) if data.get("moments") else None
            ),
            state=MaxEntState.from_dict(data["maxent"]) if data.get("maxent") else None,
            inferred_distribution=(
                PhotonDistribution.from_dict(data["inferred_distribution"])
                if data.get("inferred_distribution")
                else None
            ),
            fidelity=data.get("fidelity"),
            error_message=data.get("error_message"),
        )


@dataclass
class RunSession:
    """One CLI invocation and the stage timings collected during it.

    Attributes:
        session_id: Unique identifier for this session
        subcommand: CLI subcommand that opened the session
        started_at: Timestamp when the session started
        stages: Stage timings in completion order
        status: Final status, set when the session ends
        ended_at: Timestamp when the session ended (None if still active)
        files: Files written during the session
    """

    session_id: str
    subcommand: str
    started_at: datetime
    stages: list[StageTiming] = field(default_factory=list)
    status: str = "running"
    ended_at: datetime | None = None
    files: list[str] = field(default_factory=list)

    @staticmethod
    def create(subcommand: str) -> "RunSession":
        return RunSession(
            session_id=str(uuid.uuid4()),
            subcommand=subcommand,
            started_at=datetime.now(),
        )

    def end_session(self, status: str) -> None:
        """Mark the session as ended."""
        self.status = status
        self.ended_at = datetime.now()

    @property
    def total_ms(self) -> float:
        return sum(stage.duration_ms for stage in self.stages)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "subcommand": self.subcommand,
            "status": self.status,
            "started_at": self.started_at.isoformat(),
            "ended_at": self.ended_at.isoformat() if self.ended_at else None,
            "total_ms": self.total_ms,
            "stages": [stage.to_dict() for stage in self.stages],
            "files": list(self.files),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)
