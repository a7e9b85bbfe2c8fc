from __future__ import annotations

from typing import Mapping, MutableMapping

import numpy as np

from ..errors import EvaluationError, MissingInput, MissingWeight, NnefError, ShapeMismatch
from ..frontend.program import Instruction, NnefProgram
from . import ops


def apply(inst: Instruction, env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Compute one layer instruction from already-available variables."""
    op = inst.op

    def var(name: str) -> np.ndarray:
        return env[inst.arg(name).name]

    if op == "conv":
        return ops.conv(
            var("input"),
            var("filter"),
            var("bias"),
            inst.arg("stride"),
            inst.arg("dilation"),
            inst.arg("padding"),
            inst.arg("groups"),
        )
    if op == "relu":
        return ops.relu(var("x"))
    if op == "max_pool":
        return ops.max_pool(
            var("input"),
            inst.arg("size"),
            inst.arg("stride"),
            inst.arg("dilation"),
            inst.arg("padding"),
            inst.arg("border"),
        )
    if op == "reshape":
        return ops.reshape(var("input"), inst.arg("shape"))
    if op == "linear":
        return ops.linear(var("input"), var("filter"), var("bias"))
    if op == "softmax":
        return ops.softmax(var("x"), inst.arg("axis"))
    if op == "concat":
        return ops.concat([env[v.name] for v in inst.arg("values")], inst.arg("axis"))
    if op == "split":
        ranges = inst.arg("ranges")
        if len(ranges) != 1:
            raise ShapeMismatch(f"split instruction must name exactly one range, got {len(ranges)}")
        return ops.split(var("value"), inst.arg("axis"), ranges)[0]
    raise NnefError(f"{op} is not a layer operation")


def declare(
    inst: Instruction,
    inputs: Mapping[str, np.ndarray],
    weights: Mapping[str, np.ndarray],
) -> np.ndarray:
    """Resolve an ``external`` or ``variable`` declaration to its tensor."""
    shape = tuple(inst.arg("shape"))
    if inst.op == "external":
        if inst.result not in inputs:
            raise MissingInput(f"no tensor supplied for external {inst.result}")
        tensor = np.asarray(inputs[inst.result], dtype=np.float32)
        what = f"external {inst.result}"
    else:
        label = inst.arg("label")
        if label not in weights:
            raise MissingWeight(f"no weight for label {label!r}")
        tensor = np.asarray(weights[label], dtype=np.float32)
        what = f"variable {label!r}"
    if tensor.shape != shape:
        raise ShapeMismatch(f"{what}: declared {list(shape)}, got {list(tensor.shape)}")
    return tensor


def run_instructions(
    instructions,
    env: MutableMapping[str, np.ndarray],
    inputs: Mapping[str, np.ndarray],
    weights: Mapping[str, np.ndarray],
    offset: int = 0,
) -> None:
    for index, inst in enumerate(instructions, start=offset):
        if inst.is_declaration:
            env[inst.result] = declare(inst, inputs, weights)
            continue
        try:
            env[inst.result] = apply(inst, env)
        except NnefError as exc:
            raise EvaluationError(index, inst.result, exc) from exc


def evaluate(
    program: NnefProgram,
    inputs: Mapping[str, np.ndarray],
    weights: Mapping[str, np.ndarray],
) -> dict[str, np.ndarray]:
    """Run ``program`` instruction by instruction, in file order."""
    for inst in program.instructions:
        if inst.is_sync:
            raise NnefError(f"{inst.op} cannot be evaluated sequentially; run the item set instead")
    for inst in program.declarations():
        if inst.op == "external" and inst.result not in inputs:
            raise MissingInput(f"no tensor supplied for external {inst.result}")
    env: dict[str, np.ndarray] = {}
    run_instructions(program.instructions, env, inputs, weights)
    return {name: env[name] for name in program.outputs}
