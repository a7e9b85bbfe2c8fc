"""Graphviz rendering: places as circles, transitions as bars."""

from __future__ import annotations

from .net import Colour, PetriNet

PALETTE = ("red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan4")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def colour_map(net: PetriNet) -> dict[Colour, str]:
    colours = [c for c in net.colours if c is not None]
    return {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(colours)}


def export_dot(net: PetriNet) -> str:
    palette = colour_map(net)
    lines = [f"digraph {_quote(net.name)} {{", "    rankdir=TB;"]
    for place in net.places:
        held = net.initial.colours(place)
        if not held:
            label = place
        elif list(held) == [None]:
            label = f"{place}\\n{held[None]}"
        else:
            label = place + "\\n" + " ".join(f"{c}:{n}" for c, n in held.items())
        attrs = ["shape=circle", f"label={_quote(label)}"]
        if place in net.final_places:
            attrs.append("peripheries=2")
        lines.append(f"    {_quote('p:' + place)} [{', '.join(attrs)}];")
    for t in net.transitions:
        attrs = [
            "shape=box",
            "style=filled",
            f"fillcolor={palette.get(t.colour, 'black')}",
            "height=0.08",
            "width=0.9",
            'label=""',
            f"xlabel={_quote(t.name)}",
        ]
        lines.append(f"    {_quote('t:' + t.name)} [{', '.join(attrs)}];")
    for t in net.transitions:
        for arc in t.inputs:
            lines.append(_edge("p:" + arc.place, "t:" + t.name, arc.weight, palette.get(arc.colour)))
        for arc in t.outputs:
            lines.append(_edge("t:" + t.name, "p:" + arc.place, arc.weight, palette.get(arc.colour)))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _edge(src: str, dst: str, weight: int, colour: str | None) -> str:
    attrs = []
    if weight != 1:
        attrs.append(f'label="{weight}"')
    if colour is not None:
        attrs.append(f"color={colour}")
    suffix = f" [{', '.join(attrs)}]" if attrs else ""
    return f"    {_quote(src)} -> {_quote(dst)}{suffix};"
