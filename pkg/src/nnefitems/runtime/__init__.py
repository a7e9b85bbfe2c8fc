"""Concurrent item execution with synchronised shared variables."""

from ..trace import Trace, TraceEvent, dumps_trace, parse_trace, read_trace, wellformedness_issues, write_trace
from .noise import NoiseConfig, NoisePoint, load_noise, noise_from_json
from .runner import BarrierPlan, RunResult, plan_barriers, run_barrier_schedule, run_items
from .store import SharedStore, Slot

__all__ = [
    "BarrierPlan",
    "NoiseConfig",
    "NoisePoint",
    "RunResult",
    "SharedStore",
    "Slot",
    "Trace",
    "TraceEvent",
    "dumps_trace",
    "load_noise",
    "noise_from_json",
    "parse_trace",
    "plan_barriers",
    "read_trace",
    "run_barrier_schedule",
    "run_items",
    "wellformedness_issues",
    "write_trace",
]
