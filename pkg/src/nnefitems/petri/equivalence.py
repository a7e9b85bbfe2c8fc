"""Language equality between a coloured multi-item net and the original net.

Both marking graphs are finite and acyclic.  Sync transitions are silent,
so the coloured side is determinised with a subset construction over the
silent closure.  The product with the (already deterministic) original
graph is explored breadth-first, which yields a shortest word accepted by
exactly one side whenever the languages differ.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..errors import CapExceeded
from .net import DEFAULT_MARKING_CAP, MarkingGraph, PetriNet, marking_graph


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    counterexample: tuple[str, ...] | None = None
    accepted_by: str | None = None
    product_states: int = 0

    @property
    def verdict(self) -> str:
        return "EQUIVALENT" if self.equivalent else "NOT-EQUIVALENT"

    def explain(self) -> str:
        if self.equivalent:
            return self.verdict
        side = "original" if self.accepted_by == "original" else "multi-item"
        other = "multi-item" if side == "original" else "original"
        seq = " ".join(self.counterexample or ()) or "<empty>"
        return f"{self.verdict}: valid path of the {side} net rejected by the {other} net: {seq}"


def _closure(graph: MarkingGraph, nodes, silent: frozenset[str]) -> frozenset[int]:
    live = graph.coaccessible
    seen = {n for n in nodes if n in live}
    stack = list(seen)
    while stack:
        for label, child in graph.successors[stack.pop()]:
            if label in silent and child in live and child not in seen:
                seen.add(child)
                stack.append(child)
    return frozenset(seen)


def check_equivalence(
    coloured: PetriNet,
    original: PetriNet,
    cap: int = DEFAULT_MARKING_CAP,
) -> EquivalenceResult:
    silent = frozenset(t.name for t in coloured.transitions if t.sync)
    left = marking_graph(coloured, cap)
    right = marking_graph(original, cap)
    left_final = left.final_index
    right_final = right.final_index
    right_live = right.coaccessible
    dead = -1

    start_left = _closure(left, [0], silent)
    start_right = 0 if 0 in right_live else dead
    start = (start_left, start_right)
    parent: dict[tuple, tuple[tuple, str] | None] = {start: None}
    queue = deque([start])

    def word(state) -> tuple[str, ...]:
        labels: list[str] = []
        while parent[state] is not None:
            state, label = parent[state]
            labels.append(label)
        return tuple(reversed(labels))

    while queue:
        state = queue.popleft()
        subset, r = state
        accept_left = left_final is not None and left_final in subset
        accept_right = r != dead and r == right_final
        if accept_left != accept_right:
            return EquivalenceResult(
                False,
                word(state),
                "multi-item" if accept_left else "original",
                len(parent),
            )
        moves: dict[str, set[int]] = {}
        for node in subset:
            for label, child in left.successors[node]:
                if label not in silent:
                    moves.setdefault(label, set()).add(child)
        right_moves: dict[str, int] = {}
        if r != dead:
            right_moves = {label: child for label, child in right.successors[r] if child in right_live}
        for label in sorted(set(moves) | set(right_moves)):
            nxt_left = _closure(left, moves.get(label, ()), silent)
            nxt_right = right_moves.get(label, dead)
            if not nxt_left and nxt_right == dead:
                continue
            nxt = (nxt_left, nxt_right)
            if nxt not in parent:
                if len(parent) >= cap:
                    raise CapExceeded(f"more than {cap} product states", len(parent))
                parent[nxt] = (state, label)
                queue.append(nxt)
    return EquivalenceResult(True, None, None, len(parent))
