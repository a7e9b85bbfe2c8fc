from __future__ import annotations

from typing import Any

from .program import POSITIONAL_KINDS, SIGNATURES, Instruction, ItemProgram, Kind, NnefProgram


def _format_value(kind: Kind, value: Any) -> str:
    if kind in (Kind.VAR, Kind.ITEM, Kind.SYNC):
        return value.name
    if kind in (Kind.VARS, Kind.ITEMS):
        return "[" + ", ".join(ref.name for ref in value) + "]"
    if kind is Kind.INT:
        return str(value)
    if kind is Kind.INTS:
        return "[" + ", ".join(str(v) for v in value) + "]"
    if kind is Kind.PADS:
        return "[" + ", ".join(f"({a}, {b})" for a, b in value) + "]"
    if kind is Kind.STR:
        return f"'{value}'"
    raise AssertionError(kind)


def format_instruction(inst: Instruction) -> str:
    kinds = dict(SIGNATURES[inst.op])
    parts = []
    named = False
    for name, value in inst.args:
        text = _format_value(kinds[name], value)
        # Positional form only until the first named argument.
        named = named or kinds[name] not in POSITIONAL_KINDS
        parts.append(f"{name} = {text}" if named else text)
    return f"{inst.result} = {inst.op}({', '.join(parts)});"


def _idlist(names: tuple[str, ...]) -> str:
    return "( " + ", ".join(names) + " )" if names else "( )"


def serialize(program: NnefProgram) -> str:
    """Render ``program`` as canonical text that parses back to an equal program."""
    if isinstance(program, ItemProgram):
        lines = [
            f"graph {program.graph_name} {_idlist(program.graph_inputs)} -> {_idlist(program.graph_outputs)}",
            f"graphitem {program.item_id} {program.node_name} "
            f"{_idlist(program.inputs)} -> {_idlist(program.outputs)}",
        ]
    else:
        lines = [f"graph {program.graph_name} {_idlist(program.inputs)} -> {_idlist(program.outputs)}"]
    lines.append("{")
    lines.extend("    " + format_instruction(inst) for inst in program.instructions)
    lines.append("}")
    return "\n".join(lines) + "\n"
