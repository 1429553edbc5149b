"""File system based run logger."""

import asyncio
import json
from pathlib import Path

from logger.base import ReportLogger
from logger.formatters import emit_figure_data
from logger.models import ExperimentReport, RunSession, StageTiming

REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"
MANIFEST_FILE = "manifest.json"
GRID_FILE = "grid.json"


class FileSystemLogger(ReportLogger):
    """Logger that writes reports, figure data and timings to an output directory.

    Each session appends its stage timings to ``timings.json`` and an entry to
    ``manifest.json``. Writes to the same path are serialized.

    Attributes:
        output_dir: Directory where files are stored
        sessions: In-memory cache of sessions
    """

    def __init__(self, output_dir: str | Path = "runs/latest"):
        """Initialize the file system logger.

        Args:
            output_dir: Directory path for storing run files
        """
        super().__init__()
        self.output_dir = Path(output_dir)
        self.sessions: dict[str, RunSession] = {}
        self.current_session_id: str | None = None
        self._locks: dict[Path, asyncio.Lock] = {}
        self._ensure_output_directory()

    def _ensure_output_directory(self) -> None:
        """Create the output directory if it doesn't exist."""
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _lock_for(self, path: Path) -> asyncio.Lock:
        if path not in self._locks:
            self._locks[path] = asyncio.Lock()
        return self._locks[path]

    async def _write_json(self, name: str, payload) -> None:
        """Write a JSON file in a worker thread, serialized per path."""
        path = self.output_dir / name

        def _write():
            with open(path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2)
                f.write("\n")

        async with self._lock_for(path):
            await asyncio.to_thread(_write)

    async def _read_json(self, name: str, default):
        path = self.output_dir / name
        if not path.exists():
            return default

        def _read():
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)

        return await asyncio.to_thread(_read)

    async def _update_manifest(self, session: RunSession) -> None:
        """Add or replace the session's entry in the manifest."""
        path = self.output_dir / MANIFEST_FILE
        async with self._lock_for(path.with_suffix(".update")):
            manifest = await self._read_json(MANIFEST_FILE, {"sessions": []})
            session_info = {
                "session_id": session.session_id,
                "subcommand": session.subcommand,
                "status": session.status,
                "started_at": session.started_at.isoformat(),
                "ended_at": session.ended_at.isoformat() if session.ended_at else None,
                "files": list(session.files),
            }

            sessions = manifest.get("sessions", [])
            existing_index = next(
                (
                    i
                    for i, s in enumerate(sessions)
                    if s["session_id"] == session.session_id
                ),
                None,
            )
            if existing_index is not None:
                sessions[existing_index] = session_info
            else:
                sessions.append(session_info)

            manifest["sessions"] = sessions
            await self._write_json(MANIFEST_FILE, manifest)

    def _current(self) -> RunSession:
        if not self.current_session_id:
            raise ValueError("No active session. Call start_session() first.")
        session = self.sessions.get(self.current_session_id)
        if not session:
            raise ValueError(f"Session {self.current_session_id} not found.")
        return session

    async def start_session(self, subcommand: str) -> str:
        session = RunSession.create(subcommand)
        self.current_session_id = session.session_id
        self.sessions[session.session_id] = session
        await self._update_manifest(session)
        return session.session_id

    async def log_stages(self, stages: list[StageTiming]) -> None:
        self._current().stages.extend(stages)

    async def write_report(self, report: ExperimentReport) -> list[str]:
        session = self._current()
        await self._write_json(REPORT_FILE, report.to_dict())
        figure_files = await asyncio.to_thread(emit_figure_data, report, self.output_dir)
        await self.log_stages(report.timings)
        files = [REPORT_FILE, *figure_files]
        session.files.extend(files)
        return files

    async def write_grid(self, grid) -> list[str]:
        session = self._current()
        await self._write_json(GRID_FILE, grid.to_dict())
        matrix_files = await asyncio.to_thread(emit_figure_data, grid, self.output_dir)
        files = [GRID_FILE, *matrix_files]
        session.files.extend(files)
        return files

    async def write_document(self, name: str, payload: dict) -> str:
        await self._write_json(name, payload)
        self._current().files.append(name)
        return name

    async def end_session(self, session_id: str, status: str) -> None:
        session = self.sessions.get(session_id)
        if not session:
            return

        session.end_session(status)
        timings = await self._read_json(TIMINGS_FILE, {"sessions": []})
        timings["sessions"].append(session.to_dict())
        await self._write_json(TIMINGS_FILE, timings)
        await self._update_manifest(session)

    async def get_session(self, session_id: str) -> RunSession | None:
        # Only sessions opened by this logger are reconstructed.
        return self.sessions.get(session_id)


def load_report(path: str | Path) -> ExperimentReport:
    """Read a stored report document.

    Args:
        path: Report file, or a directory containing report.json

    Returns:
        Deserialized ExperimentReport
    """
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_FILE
    with open(path, "r", encoding="utf-8") as f:
        return ExperimentReport.from_dict(json.load(f))
