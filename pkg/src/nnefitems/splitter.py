"""Partition a model across items and put it back together.

Compute instructions are assigned to items; declarations are replicated on
every item that consumes them.  A variable produced on one item and read on
another is published once through a ``variablesync`` named ``<var>_sync``,
written by a single ``send_var`` that lists every reader item, and received
by one ``get_var`` per reader that keeps the original variable name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConflictingDeclarations, EmptyItem, InvalidAssignment, UnresolvedSync
from .frontend.program import Instruction, ItemProgram, ItemRef, NnefProgram, SyncRef, VarRef
from .frontend.serialize import serialize
from .tensor.shapes import infer_shapes


@dataclass(frozen=True)
class Assignment:
    items: tuple[str, ...]
    mapping: Mapping[str, str] = field(hash=False)
    strategy: str = ""

    def item_of(self, var: str) -> str:
        return self.mapping[var]

    def to_json(self) -> dict:
        return {"items": list(self.items), "assignment": dict(self.mapping)}

    @classmethod
    def from_json(cls, obj) -> Assignment:
        if not isinstance(obj, dict) or "assignment" not in obj:
            raise InvalidAssignment("assignment file needs an 'assignment' object")
        mapping = obj["assignment"]
        if not isinstance(mapping, dict) or not all(isinstance(v, str) for v in mapping.values()):
            raise InvalidAssignment("'assignment' must map variable names to item ids")
        items = obj.get("items")
        if items is None:
            items = list(dict.fromkeys(mapping.values()))
        if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
            raise InvalidAssignment("'items' must be a list of item ids")
        return cls(tuple(items), dict(mapping), obj.get("strategy", ""))


def load_assignment(path: str | Path) -> Assignment:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidAssignment(f"{path}: invalid JSON ({exc.msg})") from None
    return Assignment.from_json(obj)


def save_assignment(assignment: Assignment, path: str | Path) -> None:
    Path(path).write_text(json.dumps(assignment.to_json(), indent=2) + "\n", encoding="utf-8")


def check_assignment(program: NnefProgram, assignment: Assignment) -> None:
    computed = [i.result for i in program.computations()]
    declared = {i.result for i in program.declarations()}
    if len(set(assignment.items)) != len(assignment.items):
        raise InvalidAssignment("item list has duplicates")
    for var, item in assignment.mapping.items():
        if var in declared:
            raise InvalidAssignment(f"{var} is a declaration; declarations are replicated, not assigned")
        if var not in computed:
            raise InvalidAssignment(f"{var} is not computed by {program.graph_name}")
        if item not in assignment.items:
            raise InvalidAssignment(f"{var} assigned to unlisted item {item}")
    missing = [v for v in computed if v not in assignment.mapping]
    if missing:
        raise InvalidAssignment(f"unassigned instructions: {', '.join(missing)}")
    used = set(assignment.mapping.values())
    for item in assignment.items:
        if item not in used:
            raise EmptyItem(f"item {item} receives no instruction")


def sync_variable(var: str, taken: set[str]) -> str:
    name = f"{var}_sync"
    k = 2
    while name in taken:
        name = f"{var}_sync{k}"
        k += 1
    return name


def split(program: NnefProgram, assignment: Assignment) -> list[ItemProgram]:
    check_assignment(program, assignment)
    where = dict(assignment.mapping)
    declarations = {i.result: i for i in program.declarations()}
    shapes = infer_shapes(program)
    taken = {i.result for i in program.instructions}

    readers: dict[str, list[str]] = {}
    for inst in program.computations():
        here = where[inst.result]
        for v in inst.inputs():
            if v in where and where[v] != here and here not in readers.setdefault(v, []):
                readers[v].append(here)
    order = {item: k for k, item in enumerate(assignment.items)}
    syncs: dict[str, str] = {}
    for var in (i.result for i in program.computations()):
        if var in readers:
            readers[var].sort(key=order.__getitem__)
            syncs[var] = sync_variable(var, taken)
            taken.add(syncs[var])

    result = []
    for item in assignment.items:
        mine = [i for i in program.computations() if where[i.result] == item]
        needed_decls: list[str] = []
        received: list[str] = []
        for inst in mine:
            for v in inst.inputs():
                if v in declarations and v not in needed_decls:
                    needed_decls.append(v)
                elif v in where and where[v] != item and v not in received:
                    received.append(v)
        head = [declarations[v] for v in declarations if v in needed_decls]
        exported = [i.result for i in mine if i.result in readers]
        head += [
            Instruction(syncs[v], "variablesync", (("shape", tuple(shapes[v])),)) for v in exported
        ]
        body: list[Instruction] = []
        got: set[str] = set()
        for inst in mine:
            for v in inst.inputs():
                if v in received and v not in got:
                    body.append(
                        Instruction(v, "get_var", (("source", ItemRef(where[v])), ("data", SyncRef(syncs[v]))))
                    )
                    got.add(v)
            body.append(inst)
            if inst.result in readers:
                dest = tuple(ItemRef(r) for r in readers[inst.result])
                body.append(
                    Instruction(syncs[inst.result], "send_var", (("dest", dest), ("data", VarRef(inst.result))))
                )
        local_outputs = [v for v in program.outputs if where.get(v) == item]
        item_inputs = [v for v in needed_decls if declarations[v].op == "external"] + received
        result.append(
            ItemProgram(
                graph_name=program.graph_name,
                inputs=tuple(item_inputs),
                outputs=tuple(dict.fromkeys(exported + local_outputs)),
                instructions=tuple(head + body),
                item_id=item,
                node_name=program.graph_name,
                graph_inputs=program.inputs,
                graph_outputs=program.outputs,
            )
        )
    return result


def _rename(inst: Instruction, names: Mapping[str, str]) -> Instruction:
    if not names:
        return inst

    def sub(value):
        if isinstance(value, VarRef):
            return VarRef(names.get(value.name, value.name))
        if isinstance(value, tuple) and value and isinstance(value[0], VarRef):
            return tuple(sub(v) for v in value)
        return value

    return Instruction(inst.result, inst.op, tuple((k, sub(v)) for k, v in inst.args))


def merge(items: Sequence[ItemProgram]) -> NnefProgram:
    """Union of the items' instructions with sync operations removed."""
    items = list(items)
    if not items:
        raise UnresolvedSync("nothing to merge")
    by_id = {item.item_id: item for item in items}

    declarations: dict[str, Instruction] = {}
    labels: dict[str, tuple[int, ...]] = {}
    for item in items:
        for inst in item.declarations():
            seen = declarations.get(inst.result)
            if seen is not None and seen != inst:
                raise ConflictingDeclarations(f"{inst.result} is declared differently on two items")
            if inst.op == "variable":
                label, shape = inst.arg("label"), tuple(inst.arg("shape"))
                if labels.setdefault(label, shape) != shape:
                    raise ConflictingDeclarations(
                        f"label {label!r} declared with shapes {list(labels[label])} and {list(shape)}"
                    )
            declarations[inst.result] = inst

    published: dict[tuple[str, str], str] = {}
    for item in items:
        for inst in item.sends():
            published[(item.item_id, inst.result)] = inst.arg("data").name

    queues: list[list[Instruction]] = []
    for item in items:
        names: dict[str, str] = {}
        for inst in item.gets():
            source = inst.arg("source").name
            key = (source, inst.arg("data").name)
            if source not in by_id or key not in published:
                raise UnresolvedSync(
                    f"{item.item_id}: get_var {inst.result} has no matching send_var on {source}"
                )
            if published[key] != inst.result:
                names[inst.result] = published[key]
        queues.append([_rename(i, names) for i in item.computations()])

    available = set(declarations)
    ordered: list[Instruction] = []
    cursors = [0] * len(queues)
    while any(c < len(q) for c, q in zip(cursors, queues)):
        progress = False
        for k, queue in enumerate(queues):
            while cursors[k] < len(queue) and all(v in available for v in queue[cursors[k]].inputs()):
                inst = queue[cursors[k]]
                ordered.append(inst)
                available.add(inst.result)
                cursors[k] += 1
                progress = True
        if not progress:
            stuck = [q[c].result for c, q in zip(cursors, queues) if c < len(q)]
            raise UnresolvedSync(f"no item can proceed; blocked at {', '.join(stuck)}")

    first = items[0]
    return NnefProgram(
        graph_name=first.graph_name,
        inputs=first.graph_inputs,
        outputs=first.graph_outputs,
        instructions=tuple(declarations.values()) + tuple(ordered),
    )


def _item_ids(n: int) -> tuple[str, ...]:
    return tuple(f"item{k}" for k in range(1, n + 1))


def _contiguous(program: NnefProgram, n: int) -> Assignment | None:
    computed = [i.result for i in program.computations()]
    if n > len(computed):
        return None
    ids = _item_ids(n)
    mapping = {}
    base, extra = divmod(len(computed), n)
    pos = 0
    for k, item in enumerate(ids):
        size = base + (1 if k < extra else 0)
        for var in computed[pos : pos + size]:
            mapping[var] = item
        pos += size
    return Assignment(ids, mapping, "contiguous")


def _descendants(program: NnefProgram, start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for c in program.consumers(v):
            if c.is_compute and c.result not in seen:
                seen.add(c.result)
                stack.append(c.result)
    return seen


def _branch_parallel(program: NnefProgram, n: int) -> Assignment | None:
    if n < 2:
        return None
    for fork in program.instructions:
        if fork.op == "variable":
            continue
        heads = [c.result for c in program.consumers(fork.result) if c.is_compute]
        if len(heads) < max(2, n - 1):
            continue
        reach = {h: _descendants(program, h) for h in heads}
        branches = []
        for h in heads:
            others = set().union(*(reach[o] for o in heads if o != h))
            branches.append(reach[h] - others)
        if sum(1 for b in branches if b) < n - 1:
            continue
        ids = _item_ids(n)
        mapping = {i.result: ids[0] for i in program.computations()}
        k = 1
        for branch in branches:
            if branch and k < n:
                for var in branch:
                    mapping[var] = ids[k]
                k += 1
        return Assignment(ids, mapping, "branch-parallel")
    return None


def _offload(program: NnefProgram, n: int, op: str = "conv") -> Assignment | None:
    if n != 2:
        return None
    computed = list(program.computations())
    hits = [i.result for i in computed if i.op == op]
    if not hits or len(hits) == len(computed):
        return None
    ids = _item_ids(2)
    mapping = {i.result: ids[0] if i.op == op else ids[1] for i in computed}
    return Assignment(ids, mapping, f"offload-{op}")


def suggest_assignments(program: NnefProgram, n_items: int) -> list[Assignment]:
    """Deterministic candidate partitions.

    Offloading puts every convolution on one item (two items only).
    Branch-parallel gives the exclusive descendants of each consumer of a
    fork to its own item, keeping everything else on ``item1``.  When no
    fork is wide enough, contiguous segments of the instruction list are
    used instead.
    """
    if n_items < 1:
        raise ValueError("n_items must be >= 1")
    if n_items == 1:
        return [Assignment(("item1",), {i.result: "item1" for i in program.computations()}, "single")]
    found: list[Assignment] = []
    for candidate in (_offload(program, n_items), _branch_parallel(program, n_items)):
        if candidate is not None:
            found.append(candidate)
    if not any(a.strategy == "branch-parallel" for a in found):
        fallback = _contiguous(program, n_items)
        if fallback is not None:
            found.append(fallback)
    return found


def item_filename(item: ItemProgram) -> str:
    return f"{item.node_name}.{item.item_id}.nnef"


def write_items(items: Sequence[ItemProgram], outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for item in items:
        path = outdir / item_filename(item)
        path.write_text(serialize(item), encoding="utf-8")
        paths.append(path)
    return paths
