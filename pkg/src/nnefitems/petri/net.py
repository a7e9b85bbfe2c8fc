"""Place/transition nets for NNEF programs, with optional token colours.

A plain net is a coloured net whose only colour is ``None``.  Markings map
``(place, colour)`` pairs to positive token counts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from ..errors import CapExceeded, NotFireable, UnknownTransition
from ..frontend.program import NnefProgram

Colour = str | None

DEFAULT_PATH_CAP = 100_000
DEFAULT_MARKING_CAP = 1_000_000


def _key(entry: tuple[str, Colour]) -> tuple[str, str]:
    place, colour = entry
    return place, "" if colour is None else colour


@dataclass(frozen=True)
class Marking:
    """Immutable, hashable token assignment."""

    entries: tuple[tuple[str, Colour, int], ...] = ()

    @classmethod
    def of(cls, counts: Mapping[tuple[str, Colour], int]) -> Marking:
        for (place, _), n in counts.items():
            if n < 0:
                raise ValueError(f"negative token count in {place}")
        items = sorted(((k, n) for k, n in counts.items() if n > 0), key=lambda kv: _key(kv[0]))
        return cls(tuple((place, colour, n) for (place, colour), n in items))

    def counts(self) -> dict[tuple[str, Colour], int]:
        return {(place, colour): n for place, colour, n in self.entries}

    def tokens(self, place: str) -> int:
        """All tokens in ``place``, whatever their colour."""
        return sum(n for p, _, n in self.entries if p == place)

    def count(self, place: str, colour: Colour = None) -> int:
        for p, c, n in self.entries:
            if p == place and c == colour:
                return n
        return 0

    def colours(self, place: str) -> dict[Colour, int]:
        return {c: n for p, c, n in self.entries if p == place}

    def total(self) -> int:
        return sum(n for _, _, n in self.entries)

    def places(self) -> list[str]:
        return sorted({p for p, _, _ in self.entries})

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        parts = []
        for place, colour, n in self.entries:
            tag = place if colour is None else f"{place}[{colour}]"
            parts.append(tag if n == 1 else f"{tag}x{n}")
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class Arc:
    place: str
    weight: int = 1
    colour: Colour = None


@dataclass(frozen=True)
class Transition:
    name: str
    inputs: tuple[Arc, ...]
    outputs: tuple[Arc, ...]
    colour: Colour = None
    sync: bool = False
    op: str = ""

    @property
    def output_weight(self) -> int:
        return sum(a.weight for a in self.outputs)


@dataclass(frozen=True)
class PetriNet:
    name: str
    places: tuple[str, ...]
    transitions: tuple[Transition, ...]
    initial: Marking
    final: Marking

    @cached_property
    def _by_name(self) -> dict[str, Transition]:
        return {t.name: t for t in self.transitions}

    def transition(self, name: str) -> Transition:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownTransition(f"net {self.name} has no transition {name!r}") from None

    def has_transition(self, name: str) -> bool:
        return name in self._by_name

    @property
    def final_places(self) -> tuple[str, ...]:
        return tuple(self.final.places())

    @property
    def colours(self) -> tuple[Colour, ...]:
        seen: list[Colour] = []
        for t in self.transitions:
            for arc in (*t.inputs, *t.outputs):
                if arc.colour not in seen:
                    seen.append(arc.colour)
        for _, colour, _ in self.initial.entries:
            if colour not in seen:
                seen.append(colour)
        return tuple(seen)

    def arcs(self) -> Iterator[tuple[str, str, int, Colour]]:
        """Every arc as (source node, target node, weight, colour)."""
        for t in self.transitions:
            for arc in t.inputs:
                yield arc.place, t.name, arc.weight, arc.colour
            for arc in t.outputs:
                yield t.name, arc.place, arc.weight, arc.colour


@dataclass(frozen=True)
class ColouredPetriNet(PetriNet):
    item_colours: tuple[str, ...] = field(default=())

    @property
    def sync_transitions(self) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.sync)


def translate(program: NnefProgram) -> PetriNet:
    """One place per variable, one transition per compute instruction.

    A produced variable's output arc carries one token per consuming
    instruction, plus one if it is a declared output (that token stays in
    the final marking).  Declarations start with one token per consumer.
    """
    usage: Counter[str] = Counter()
    for inst in program.instructions:
        usage.update(inst.inputs())
    outputs = set(program.outputs)
    places: list[str] = []
    transitions: list[Transition] = []
    initial: dict[tuple[str, Colour], int] = {}
    for inst in program.instructions:
        if inst.result not in places:
            places.append(inst.result)
        weight = usage[inst.result] + (1 if inst.result in outputs else 0)
        if inst.is_declaration:
            if weight:
                initial[(inst.result, None)] = weight
            continue
        transitions.append(
            Transition(
                name=inst.result,
                inputs=tuple(Arc(v) for v in inst.inputs()),
                outputs=(Arc(inst.result, weight),) if weight else (),
                op=inst.op,
            )
        )
    final = Marking.of({(name, None): 1 for name in program.outputs})
    return PetriNet(program.graph_name, tuple(places), tuple(transitions), Marking.of(initial), final)


def is_enabled(transition: Transition, marking: Marking) -> bool:
    counts = marking.counts()
    return all(counts.get((a.place, a.colour), 0) >= a.weight for a in transition.inputs)


def fireable(net: PetriNet, marking: Marking) -> set[str]:
    """Names of the transitions enabled in ``marking``."""
    return {t.name for t in enabled_transitions(net, marking)}


def enabled_transitions(net: PetriNet, marking: Marking) -> list[Transition]:
    counts = marking.counts()
    return [
        t
        for t in net.transitions
        if all(counts.get((a.place, a.colour), 0) >= a.weight for a in t.inputs)
    ]


def fire(net: PetriNet, marking: Marking, name: str) -> Marking:
    t = net.transition(name)
    counts = marking.counts()
    for arc in t.inputs:
        have = counts.get((arc.place, arc.colour), 0)
        if have < arc.weight:
            raise NotFireable(f"{name} needs {arc.weight} token(s) in {arc.place}, marking has {have}")
        counts[(arc.place, arc.colour)] = have - arc.weight
    for arc in t.outputs:
        counts[(arc.place, arc.colour)] = counts.get((arc.place, arc.colour), 0) + arc.weight
    return Marking.of(counts)


def fire_sequence(net: PetriNet, names: Iterable[str], marking: Marking | None = None) -> Marking:
    marking = net.initial if marking is None else marking
    for name in names:
        marking = fire(net, marking, name)
    return marking


@dataclass
class MarkingGraph:
    """Reachable markings (node 0 is the initial one) and labelled edges."""

    net: PetriNet
    nodes: list[Marking]
    edges: list[tuple[int, str, int]]
    index: dict[Marking, int]

    @cached_property
    def successors(self) -> list[list[tuple[str, int]]]:
        out: list[list[tuple[str, int]]] = [[] for _ in self.nodes]
        for src, label, dst in self.edges:
            out[src].append((label, dst))
        return out

    @property
    def dead(self) -> list[int]:
        """Markings with nothing left to fire."""
        return [i for i, succ in enumerate(self.successors) if not succ]

    @property
    def final_index(self) -> int | None:
        return self.index.get(self.net.final)

    @cached_property
    def coaccessible(self) -> frozenset[int]:
        """Markings from which the final marking is still reachable."""
        target = self.final_index
        if target is None:
            return frozenset()
        preds: list[list[int]] = [[] for _ in self.nodes]
        for src, _, dst in self.edges:
            preds[dst].append(src)
        seen = {target}
        stack = [target]
        while stack:
            for p in preds[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return frozenset(seen)

    def to_json(self) -> dict:
        def render(m: Marking) -> dict:
            out: dict = {}
            for place, colour, n in m.entries:
                if colour is None:
                    out[place] = n
                else:
                    out.setdefault(place, {})[colour] = n
            return out

        return {
            "net": self.net.name,
            "initial": 0,
            "final": self.final_index,
            "nodes": [{"id": i, "marking": render(m)} for i, m in enumerate(self.nodes)],
            "edges": [{"from": s, "to": d, "transition": t} for s, t, d in self.edges],
        }


def marking_graph(net: PetriNet, cap: int = DEFAULT_MARKING_CAP) -> MarkingGraph:
    nodes = [net.initial]
    index = {net.initial: 0}
    edges: list[tuple[int, str, int]] = []
    frontier = [0]
    while frontier:
        nxt: list[int] = []
        for i in frontier:
            for t in enabled_transitions(net, nodes[i]):
                m = fire(net, nodes[i], t.name)
                j = index.get(m)
                if j is None:
                    if len(nodes) >= cap:
                        raise CapExceeded(f"more than {cap} reachable markings", len(nodes))
                    j = len(nodes)
                    nodes.append(m)
                    index[m] = j
                    nxt.append(j)
                edges.append((i, t.name, j))
        frontier = nxt
    return MarkingGraph(net, nodes, edges, index)


@dataclass(frozen=True)
class PathStats:
    path_count: int
    marking_count: int
    dead_markings: int
    unique_final: bool
    reaches_final: bool
    paths: tuple[tuple[str, ...], ...]

    def summary(self) -> dict:
        return {
            "paths": self.path_count,
            "markings": self.marking_count,
            "dead_markings": self.dead_markings,
            "unique_final": self.unique_final,
            "reaches_final": self.reaches_final,
        }


def _topological(graph: MarkingGraph) -> list[int]:
    """Nodes in reverse topological order (sinks first)."""
    succ = graph.successors
    order: list[int] = []
    state = [0] * len(graph.nodes)
    for root in range(len(graph.nodes)):
        if state[root]:
            continue
        stack = [(root, 0)]
        state[root] = 1
        while stack:
            node, k = stack.pop()
            if k < len(succ[node]):
                stack.append((node, k + 1))
                child = succ[node][k][1]
                if state[child] == 1:
                    raise ValueError("marking graph has a cycle")
                if state[child] == 0:
                    state[child] = 1
                    stack.append((child, 0))
            else:
                state[node] = 2
                order.append(node)
    return order


def count_paths(graph: MarkingGraph) -> list[int]:
    """Per node, the number of firing sequences leading to the final marking."""
    target = graph.final_index
    counts = [0] * len(graph.nodes)
    for node in _topological(graph):
        if node == target:
            counts[node] = 1
        else:
            counts[node] = sum(counts[j] for _, j in graph.successors[node])
    return counts


def enumerate_paths(
    net: PetriNet,
    cap: int = DEFAULT_PATH_CAP,
    marking_cap: int = DEFAULT_MARKING_CAP,
) -> PathStats:
    """Every valid path from the initial to the final marking.

    Raises CapExceeded when there are more than ``cap`` paths; the error
    carries the exact count.
    """
    graph = marking_graph(net, marking_cap)
    counts = count_paths(graph)
    total = counts[0]
    if total > cap:
        raise CapExceeded(f"{total} valid paths exceed the cap of {cap}", total)
    paths: list[tuple[str, ...]] = []
    stack: list[tuple[int, tuple[str, ...]]] = [(0, ())]
    target = graph.final_index
    while stack:
        node, prefix = stack.pop()
        if node == target:
            paths.append(prefix)
            continue
        for label, child in reversed(graph.successors[node]):
            if counts[child]:
                stack.append((child, prefix + (label,)))
    dead = graph.dead
    return PathStats(
        path_count=total,
        marking_count=len(graph.nodes),
        dead_markings=len(dead),
        unique_final=target is not None and dead == [target],
        reaches_final=target is not None,
        paths=tuple(paths),
    )
