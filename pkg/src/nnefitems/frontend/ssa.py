"""Static checks: single assignment, definition before use, and the
multi-item sharing rules (one writer per shared variable)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .program import ItemProgram, NnefProgram


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int | None
    variable: str
    message: str

    def __str__(self) -> str:
        where = f"instruction {self.index}" if self.index is not None else "program"
        return f"{self.kind} at {where}: {self.message}"


def validate_ssa(program: NnefProgram) -> list[Violation]:
    """Return every SSA violation in ``program``; an empty list means valid.

    A ``send_var`` whose result names a ``variablesync`` declared earlier in
    the same item is a write to that shared variable, not a reassignment.
    """
    report: list[Violation] = []
    assigned: dict[str, int] = {}
    syncs: set[str] = set()
    sent: set[str] = set()
    for index, inst in enumerate(program.instructions):
        for name in inst.inputs():
            if name not in assigned:
                report.append(
                    Violation("UseBeforeDef", index, name, f"{inst.result} uses {name} before it is assigned")
                )
        if inst.op == "send_var":
            if inst.result not in syncs:
                report.append(
                    Violation("UndeclaredSync", index, inst.result, f"send_var targets undeclared variablesync {inst.result}")
                )
            elif inst.result in sent:
                report.append(
                    Violation("DuplicateWriter", index, inst.result, f"variablesync {inst.result} sent twice")
                )
            sent.add(inst.result)
            continue
        if inst.result in assigned:
            report.append(
                Violation(
                    "DoubleAssign",
                    index,
                    inst.result,
                    f"{inst.result} already assigned by instruction {assigned[inst.result]}",
                )
            )
        else:
            assigned[inst.result] = index
        if inst.op == "variablesync":
            syncs.add(inst.result)
    for name in program.outputs:
        if name not in assigned:
            report.append(Violation("UndefinedOutput", None, name, f"output {name} is never assigned"))
    return report


def validate_item_set(items: Iterable[ItemProgram]) -> list[Violation]:
    """Cross-item checks: unique writers, resolvable readers, known items."""
    items = list(items)
    report: list[Violation] = []
    by_id = {item.item_id: item for item in items}
    ids = Counter(item.item_id for item in items)
    for item_id, count in ids.items():
        if count > 1:
            report.append(Violation("DuplicateItem", None, item_id, f"item {item_id} defined {count} times"))

    writers: dict[str, list[str]] = {}
    readers: Counter[str] = Counter()
    for item in items:
        for sync in item.syncs_declared():
            writers.setdefault(sync, [])
        received = {g.result for g in item.gets()}
        for index, inst in enumerate(item.instructions):
            if inst.op == "send_var":
                writers.setdefault(inst.result, []).append(item.item_id)
                for dest in inst.arg("dest"):
                    if dest.name not in by_id:
                        report.append(
                            Violation("UnknownDestItem", index, inst.result, f"{item.item_id} sends to unknown item {dest.name}")
                        )
                if inst.arg("data").name in received:
                    report.append(
                        Violation("Relay", index, inst.result, f"{item.item_id} re-sends received variable {inst.arg('data').name}")
                    )
            elif inst.op == "get_var":
                source = inst.arg("source").name
                data = inst.arg("data").name
                readers[data] += 1
                if source not in by_id:
                    report.append(
                        Violation("UnknownSourceItem", index, inst.result, f"{item.item_id} reads from unknown item {source}")
                    )
                elif data not in by_id[source].syncs_declared():
                    report.append(
                        Violation("UnresolvedVarsync", index, data, f"{source} declares no variablesync {data}")
                    )
    for sync, who in writers.items():
        if len(who) == 0:
            report.append(Violation("MissingWriter", None, sync, f"variablesync {sync} is never sent"))
        elif len(who) > 1:
            report.append(Violation("DuplicateWriter", None, sync, f"variablesync {sync} written by {', '.join(who)}"))
        if readers[sync] == 0:
            report.append(Violation("UnreadSync", None, sync, f"variablesync {sync} has no reader"))
    return report
