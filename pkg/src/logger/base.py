"""Abstract base class for run loggers."""

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

from logger.models import ExperimentReport, RunSession, StageTiming

if TYPE_CHECKING:
    from sweep import RobustnessGrid


class ReportLogger(ABC):
    """Abstract base class for recording runs and their reports.

    This class defines the interface that all logger implementations must follow.
    """

    current_session_id: str | None = None

    @abstractmethod
    async def start_session(self, subcommand: str) -> str:
        """Start a new run session.

        Args:
            subcommand: CLI subcommand being run

        Returns:
            Session ID for the new session
        """
        pass

    @abstractmethod
    async def log_stages(self, stages: list[StageTiming]) -> None:
        """Append stage timings to the current session.

        Args:
            stages: Completed stage timings
        """
        pass

    @abstractmethod
    async def write_report(self, report: ExperimentReport) -> list[str]:
        """Persist a pipeline report and its figure data.

        Args:
            report: Completed report

        Returns:
            Names of the files written
        """
        pass

    @abstractmethod
    async def write_grid(self, grid: "RobustnessGrid") -> list[str]:
        """Persist a robustness grid document and its matrix data.

        Args:
            grid: Completed robustness grid

        Returns:
            Names of the files written
        """
        pass

    @abstractmethod
    async def write_document(self, name: str, payload: dict) -> str:
        """Persist an arbitrary JSON document (grid, ensemble summary, ...).

        Args:
            name: File name inside the output directory
            payload: JSON-serializable document

        Returns:
            Name of the file written
        """
        pass

    @abstractmethod
    async def end_session(self, session_id: str, status: str) -> None:
        """End a run session.

        Args:
            session_id: ID of the session to end
            status: Final status of the run
        """
        pass

    @abstractmethod
    async def get_session(self, session_id: str) -> RunSession | None:
        """Get a session by ID.

        Args:
            session_id: ID of the session to retrieve

        Returns:
            RunSession object or None if not found
        """
        pass
