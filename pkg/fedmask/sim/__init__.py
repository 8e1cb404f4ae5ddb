"""
Simulated network: scheduler, transcripts, latency matrices and reports.
"""

from .simnet import (
    HEADER_BYTES,
    LatencyMatrix,
    Message,
    NodeCounters,
    RoundTag,
    RoutingError,
    SimNet,
    Transcript,
    write_transcripts_jsonl,
)
from .latency_presets import PRESETS, preset, resolve_latency
from .latency_report import LatencyReport, closed_form_latency, latency_report

__all__ = [
    "HEADER_BYTES",
    "LatencyMatrix",
    "Message",
    "NodeCounters",
    "RoundTag",
    "RoutingError",
    "SimNet",
    "Transcript",
    "write_transcripts_jsonl",
    "PRESETS",
    "preset",
    "resolve_latency",
    "LatencyReport",
    "closed_form_latency",
    "latency_report",
]
