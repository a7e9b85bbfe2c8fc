"""Execution traces: timestamped start/end events, stored as JSON lines."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .errors import MalformedEvent

KINDS = ("start", "end")


@dataclass(frozen=True)
class TraceEvent:
    item: str
    transition: str
    kind: str
    t_ns: int

    def to_json(self) -> dict:
        return {"item": self.item, "transition": self.transition, "kind": self.kind, "t_ns": self.t_ns}


@dataclass
class Trace:
    events: list[TraceEvent] = field(default_factory=list)
    # Barrier rendezvous (name, t_ns) recorded by barrier runs; not serialized.
    rendezvous: list[tuple[str, int]] = field(default_factory=list, compare=False)

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def starts(self) -> list[TraceEvent]:
        return [e for e in self.events if e.kind == "start"]

    def for_item(self, item: str) -> list[TraceEvent]:
        return [e for e in self.events if e.item == item]

    def interval(self, item: str, transition: str) -> tuple[int, int]:
        start = end = None
        for e in self.events:
            if e.item == item and e.transition == transition:
                if e.kind == "start":
                    start = e.t_ns
                else:
                    end = e.t_ns
        if start is None or end is None:
            raise KeyError(f"no complete interval for {item}/{transition}")
        return start, end

    def schedule(self) -> tuple[str, ...]:
        """Transition names ordered by start time."""
        return tuple(e.transition for e in sorted(self.starts(), key=lambda e: e.t_ns))


def wellformedness_issues(trace: Trace) -> list[str]:
    """Per (item, transition) one start then one end; no overlap inside an item."""
    issues: list[str] = []
    opened: dict[str, tuple[str, int]] = {}
    seen: dict[tuple[str, str], list[str]] = {}
    for event in sorted(trace.events, key=lambda e: e.t_ns):
        key = (event.item, event.transition)
        kinds = seen.setdefault(key, [])
        kinds.append(event.kind)
        if event.kind == "start":
            if kinds.count("start") > 1:
                issues.append(f"{event.item}/{event.transition}: started twice")
            if event.item in opened:
                other = opened[event.item][0]
                issues.append(f"{event.item}: {event.transition} starts while {other} is running")
            opened[event.item] = (event.transition, event.t_ns)
        else:
            if "start" not in kinds[:-1]:
                issues.append(f"{event.item}/{event.transition}: end without start")
            elif kinds.count("end") > 1:
                issues.append(f"{event.item}/{event.transition}: ended twice")
            if opened.get(event.item, ("",))[0] == event.transition:
                del opened[event.item]
    for item, (transition, _) in opened.items():
        issues.append(f"{item}/{transition}: start without end")
    return issues


def write_trace(trace: Trace, sink: str | Path | IO[str]) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as fh:
            write_trace(trace, fh)
        return
    for event in trace.events:
        sink.write(json.dumps(event.to_json()) + "\n")


def dumps_trace(trace: Trace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def _event(obj, line: int) -> TraceEvent:
    if not isinstance(obj, dict):
        raise MalformedEvent("event must be a JSON object", line)
    for key, kind in (("item", str), ("transition", str), ("kind", str), ("t_ns", int)):
        if key not in obj:
            raise MalformedEvent(f"missing field {key!r}", line)
        value = obj[key]
        if not isinstance(value, kind) or isinstance(value, bool):
            raise MalformedEvent(f"field {key!r} must be {kind.__name__}", line)
    if obj["kind"] not in KINDS:
        raise MalformedEvent(f"kind must be 'start' or 'end', got {obj['kind']!r}", line)
    return TraceEvent(obj["item"], obj["transition"], obj["kind"], obj["t_ns"])


def parse_trace(lines: Iterable[str]) -> Trace:
    events = []
    for number, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedEvent(f"invalid JSON: {exc.msg}", number) from None
        events.append(_event(obj, number))
    return Trace(events)


def read_trace(source: str | Path | IO[str]) -> Trace:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return parse_trace(fh)
    return parse_trace(source)
