"""Behavioural semantics: Petri nets, coloured nets, equivalence and replay."""

from .coloured import erase_colours, is_sync_name, sync_name, translate_multi
from .dot import export_dot
from .equivalence import EquivalenceResult, check_equivalence
from .net import (
    DEFAULT_MARKING_CAP,
    DEFAULT_PATH_CAP,
    Arc,
    ColouredPetriNet,
    Marking,
    MarkingGraph,
    PathStats,
    PetriNet,
    Transition,
    count_paths,
    enumerate_paths,
    fire,
    fire_sequence,
    fireable,
    marking_graph,
    translate,
)
from .replay import TraceVerdict, validate_trace

__all__ = [
    "DEFAULT_MARKING_CAP",
    "DEFAULT_PATH_CAP",
    "Arc",
    "ColouredPetriNet",
    "EquivalenceResult",
    "Marking",
    "MarkingGraph",
    "PathStats",
    "PetriNet",
    "TraceVerdict",
    "Transition",
    "check_equivalence",
    "count_paths",
    "enumerate_paths",
    "erase_colours",
    "export_dot",
    "fire",
    "fire_sequence",
    "fireable",
    "is_sync_name",
    "marking_graph",
    "sync_name",
    "translate",
    "translate_multi",
    "validate_trace",
]
