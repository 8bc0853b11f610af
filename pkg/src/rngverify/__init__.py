"""Verification and monitoring of raw physical-RNG output with ranked-amplitude statistics."""

from .config import AnalysisConfig
from .pipeline import analyze, ingest, monitor
from .report import FullReport, emit_report, load_report, parse_report

__all__ = [
    "AnalysisConfig",
    "FullReport",
    "analyze",
    "emit_report",
    "ingest",
    "load_report",
    "monitor",
    "parse_report",
]
__version__ = "0.1.0"
