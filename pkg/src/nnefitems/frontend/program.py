"""Program model: instructions, whole-model programs and per-item programs.

Arguments are stored already normalized to the canonical parameter order
of their operation, so two programs that differ only in argument style
(positional vs ``name = value``) compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator


@dataclass(frozen=True)
class VarRef:
    """Reference to a tensor variable."""

    name: str


@dataclass(frozen=True)
class ItemRef:
    """Reference to a graph item (hardware or software unit)."""

    name: str


@dataclass(frozen=True)
class SyncRef:
    """Reference to a shared ``variablesync`` declared by another item."""

    name: str


class Kind(Enum):
    VAR = "variable"
    VARS = "variable-list"
    INT = "integer"
    INTS = "integer-list"
    PADS = "tuple-list"
    STR = "string"
    ITEM = "graphitem"
    ITEMS = "graphitem-list"
    SYNC = "variablesync"


DECLARATION_OPS = frozenset({"external", "variable"})
SYNC_OPS = frozenset({"variablesync", "get_var", "send_var"})

# Canonical parameter order per operation; every parameter is mandatory.
SIGNATURES: dict[str, tuple[tuple[str, Kind], ...]] = {
    "external": (("shape", Kind.INTS),),
    "variable": (("shape", Kind.INTS), ("label", Kind.STR)),
    "conv": (
        ("input", Kind.VAR),
        ("filter", Kind.VAR),
        ("bias", Kind.VAR),
        ("stride", Kind.INTS),
        ("dilation", Kind.INTS),
        ("padding", Kind.PADS),
        ("groups", Kind.INT),
    ),
    "relu": (("x", Kind.VAR),),
    "max_pool": (
        ("input", Kind.VAR),
        ("size", Kind.INTS),
        ("stride", Kind.INTS),
        ("dilation", Kind.INTS),
        ("padding", Kind.PADS),
        ("border", Kind.STR),
    ),
    "reshape": (("input", Kind.VAR), ("shape", Kind.INTS)),
    "linear": (("input", Kind.VAR), ("filter", Kind.VAR), ("bias", Kind.VAR)),
    "softmax": (("x", Kind.VAR), ("axis", Kind.INT)),
    "concat": (("values", Kind.VARS), ("axis", Kind.INT)),
    "split": (("value", Kind.VAR), ("axis", Kind.INT), ("ranges", Kind.PADS)),
    "variablesync": (("shape", Kind.INTS),),
    "get_var": (("source", Kind.ITEM), ("data", Kind.SYNC)),
    "send_var": (("dest", Kind.ITEMS), ("data", Kind.VAR)),
}

# Parameters shown positionally by the serializer; the rest use ``name = value``.
POSITIONAL_KINDS = frozenset({Kind.VAR, Kind.VARS})


@dataclass(frozen=True)
class Instruction:
    result: str
    op: str
    args: tuple[tuple[str, Any], ...]

    def arg(self, name: str) -> Any:
        for key, value in self.args:
            if key == name:
                return value
        raise KeyError(f"{self.op} has no parameter {name!r}")

    @property
    def is_declaration(self) -> bool:
        return self.op in DECLARATION_OPS

    @property
    def is_sync(self) -> bool:
        return self.op in SYNC_OPS

    @property
    def is_compute(self) -> bool:
        return not self.is_declaration and not self.is_sync

    def inputs(self) -> list[str]:
        """Variables read by this instruction, in argument order, deduplicated."""
        seen: list[str] = []
        for _, value in self.args:
            refs: tuple = ()
            if isinstance(value, VarRef):
                refs = (value,)
            elif isinstance(value, tuple) and value and isinstance(value[0], VarRef):
                refs = value
            for ref in refs:
                if ref.name not in seen:
                    seen.append(ref.name)
        return seen


@dataclass(frozen=True)
class NnefProgram:
    graph_name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    instructions: tuple[Instruction, ...] = field(default=())

    def declarations(self) -> Iterator[Instruction]:
        return (i for i in self.instructions if i.is_declaration)

    def computations(self) -> Iterator[Instruction]:
        return (i for i in self.instructions if i.is_compute)

    def producer(self, name: str) -> Instruction | None:
        for inst in self.instructions:
            if inst.result == name and inst.op != "send_var":
                return inst
        return None

    def consumers(self, name: str) -> list[Instruction]:
        return [i for i in self.instructions if name in i.inputs()]


@dataclass(frozen=True)
class ItemProgram(NnefProgram):
    """One item's share of a model.

    ``inputs``/``outputs`` are the item's own interface from the
    ``graphitem`` header; ``graph_inputs``/``graph_outputs`` repeat the
    enclosing model's declaration.
    """

    item_id: str = ""
    node_name: str = ""
    graph_inputs: tuple[str, ...] = ()
    graph_outputs: tuple[str, ...] = ()

    def sends(self) -> list[Instruction]:
        return [i for i in self.instructions if i.op == "send_var"]

    def gets(self) -> list[Instruction]:
        return [i for i in self.instructions if i.op == "get_var"]

    def syncs_declared(self) -> list[str]:
        return [i.result for i in self.instructions if i.op == "variablesync"]
