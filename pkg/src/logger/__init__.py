"""Run records: reports, stage timings, and their file-system persistence."""

from logger.base import ReportLogger
from logger.file_logger import FileSystemLogger, load_report
from logger.models import ChannelDiagnostics, ExperimentReport, RunSession, StageTiming

__all__ = [
    "ReportLogger",
    "FileSystemLogger",
    "load_report",
    "ChannelDiagnostics",
    "ExperimentReport",
    "RunSession",
    "StageTiming",
]
