"""Coloured nets for multi-item deployments.

Each item contributes its own transitions in its own colour.  Declaration
places with the same name are merged, so a parameter replicated on two
items becomes one place holding tokens of both colours.  A ``send_var``
becomes a sync transition that takes one writer-coloured token out of the
shared data place and puts reader-coloured tokens back into it.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from ..errors import UnknownSourceItem, UnresolvedVarsync
from ..frontend.program import ItemProgram
from .net import Arc, Colour, ColouredPetriNet, Marking, PetriNet, Transition

SYNC_PREFIX = "sync:"


def sync_name(variablesync: str) -> str:
    return SYNC_PREFIX + variablesync


def is_sync_name(name: str) -> bool:
    return name.startswith(SYNC_PREFIX)


def translate_multi(items: Sequence[ItemProgram], name: str | None = None) -> ColouredPetriNet:
    items = list(items)
    by_id = {item.item_id: item for item in items}

    # Data variable published through each variablesync, keyed by writer.
    published: dict[tuple[str, str], str] = {}
    for item in items:
        for inst in item.sends():
            published[(item.item_id, inst.result)] = inst.arg("data").name

    # Local get_var results resolve to the writer's data place.
    aliases: dict[str, dict[str, str]] = {}
    for item in items:
        local: dict[str, str] = {}
        for inst in item.gets():
            source = inst.arg("source").name
            sync = inst.arg("data").name
            if source not in by_id:
                raise UnknownSourceItem(f"{item.item_id}: get_var {inst.result} reads from unknown item {source}")
            if sync not in by_id[source].syncs_declared():
                raise UnresolvedVarsync(f"{item.item_id}: item {source} declares no variablesync {sync}")
            # Without a matching send_var the place stays empty forever.
            local[inst.result] = published.get((source, sync), sync)
        aliases[item.item_id] = local

    def place_of(item_id: str, var: str) -> str:
        return aliases[item_id].get(var, var)

    graph_outputs: set[str] = set()
    for item in items:
        graph_outputs.update(item.graph_outputs)

    places: list[str] = []
    transitions: list[Transition] = []
    initial: Counter[tuple[str, Colour]] = Counter()
    final: dict[tuple[str, Colour], int] = {}

    def add_place(p: str) -> None:
        if p not in places:
            places.append(p)

    usage = {}
    for item in items:
        counter: Counter[str] = Counter()
        for inst in item.instructions:
            counter.update(inst.inputs())
        usage[item.item_id] = counter

    for item in items:
        colour = item.item_id
        used = usage[colour]
        for inst in item.instructions:
            if inst.op in ("variablesync", "get_var"):
                continue
            if inst.op == "send_var":
                data = inst.arg("data").name
                place = place_of(colour, data)
                outputs = []
                for dest in inst.arg("dest"):
                    reader = by_id.get(dest.name)
                    if reader is None:
                        continue
                    weight = sum(
                        usage[reader.item_id][g.result]
                        for g in reader.gets()
                        if g.arg("source").name == colour and g.arg("data").name == inst.result
                    )
                    if weight:
                        outputs.append(Arc(place, weight, reader.item_id))
                transitions.append(
                    Transition(
                        name=sync_name(inst.result),
                        inputs=(Arc(place, 1, colour),),
                        outputs=tuple(outputs),
                        colour=colour,
                        sync=True,
                        op="send_var",
                    )
                )
                continue
            add_place(inst.result)
            is_output = inst.result in graph_outputs
            weight = used[inst.result] + (1 if is_output else 0)
            if is_output:
                final[(inst.result, colour)] = 1
            if inst.is_declaration:
                if weight:
                    initial[(inst.result, colour)] += weight
                continue
            transitions.append(
                Transition(
                    name=inst.result,
                    inputs=tuple(Arc(place_of(colour, v), 1, colour) for v in inst.inputs()),
                    outputs=(Arc(inst.result, weight, colour),) if weight else (),
                    colour=colour,
                    op=inst.op,
                )
            )
    for item in items:
        for inst in item.gets():
            add_place(place_of(item.item_id, inst.result))

    if name is None:
        name = items[0].node_name if items else "empty"
    return ColouredPetriNet(
        name,
        tuple(places),
        tuple(transitions),
        Marking.of(initial),
        Marking.of(final),
        item_colours=tuple(item.item_id for item in items),
    )


def erase_colours(net: PetriNet) -> PetriNet:
    """Forget token colours and drop sync transitions."""

    def plain(arcs: tuple[Arc, ...]) -> tuple[Arc, ...]:
        merged: dict[str, int] = {}
        for arc in arcs:
            merged[arc.place] = merged.get(arc.place, 0) + arc.weight
        return tuple(Arc(p, w) for p, w in merged.items())

    def flatten(m: Marking) -> Marking:
        counts: Counter[tuple[str, Colour]] = Counter()
        for place, _, n in m.entries:
            counts[(place, None)] += n
        return Marking.of(counts)

    transitions = tuple(
        Transition(t.name, plain(t.inputs), plain(t.outputs), op=t.op) for t in net.transitions if not t.sync
    )
    return PetriNet(net.name, net.places, transitions, flatten(net.initial), flatten(net.final))
