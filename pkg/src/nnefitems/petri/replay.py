"""Trace conformance: is an observed firing order a prefix of a valid path?"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import groupby

from ..trace import Trace, TraceEvent, wellformedness_issues
from .net import DEFAULT_MARKING_CAP, PetriNet, marking_graph


@dataclass(frozen=True)
class TraceVerdict:
    accepted: bool
    final: bool
    fired: tuple[str, ...] = ()
    violation: TraceEvent | None = None
    message: str = ""
    issues: tuple[str, ...] = field(default=())

    @property
    def verdict(self) -> str:
        if not self.accepted:
            return "REJECT"
        return "ACCEPT" if self.final else "ACCEPT (NOT-FINAL)"


def validate_trace(net: PetriNet, trace: Trace, cap: int = DEFAULT_MARKING_CAP) -> TraceVerdict:
    """Replay start events, earliest first, as firings of ``net``.

    Every firing must leave the final marking reachable.  Events sharing a
    timestamp are tried in every order.  Well-formedness problems (such as a
    start without an end, or overlapping events within an item) reject too.
    """
    starts = [e for e in trace.events if e.kind == "start"]
    for event in starts:
        t = net.transition(event.transition)
        if t.colour is not None and t.colour != event.item:
            return TraceVerdict(
                False, False, (), event, f"{event.transition} belongs to {t.colour}, logged by {event.item}"
            )
    issues = tuple(wellformedness_issues(trace))

    graph = marking_graph(net, cap)
    live = graph.coaccessible
    step = {i: dict(succ) for i, succ in enumerate(graph.successors)}
    fired: list[str] = []
    if 0 not in live:
        first = starts[0] if starts else None
        return TraceVerdict(False, False, (), first, "the final marking is unreachable from the initial marking", issues)

    node = 0
    ordered = sorted(starts, key=lambda e: e.t_ns)
    for _, group_iter in groupby(ordered, key=lambda e: e.t_ns):
        group = list(group_iter)
        order, failed_at = _order_group(step, live, node, group)
        if order is None:
            bad = group[failed_at]
            return TraceVerdict(
                False,
                False,
                tuple(fired),
                bad,
                f"{bad.transition} ({bad.item}) cannot fire after {' '.join(fired) or '<nothing>'}",
                issues,
            )
        for event in order:
            node = step[node][event.transition]
            fired.append(event.transition)
    final = node == graph.final_index
    if issues:
        return TraceVerdict(False, final, tuple(fired), None, issues[0], issues)
    return TraceVerdict(True, final, tuple(fired), None, "" if final else "trace stops before the final marking")


def _order_group(step, live, node, group):
    """Find an ordering of ``group`` that stays on valid paths.

    Returns (ordering, None) or (None, index of the event that blocks the
    longest feasible prefix).
    """
    best = [0, 0]

    def search(node, remaining, depth):
        if not remaining:
            return []
        for k, event in enumerate(remaining):
            nxt = step[node].get(event.transition)
            if nxt is None or nxt not in live:
                continue
            rest = search(nxt, remaining[:k] + remaining[k + 1 :], depth + 1)
            if rest is not None:
                return [event, *rest]
        if depth >= best[0]:
            best[0] = depth
            best[1] = group.index(remaining[0])
        return None

    result = search(node, list(group), 0)
    return (result, None) if result is not None else (None, best[1])
