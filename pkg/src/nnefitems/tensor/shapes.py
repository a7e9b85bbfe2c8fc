"""Static output-shape formulas, independent of the kernels."""

from __future__ import annotations

from typing import Mapping

from ..errors import ChannelMismatch, ElementCountMismatch, NnefError, ShapeMismatch
from ..frontend.program import Instruction, NnefProgram
from .ops import pool_output_extent

Shape = tuple[int, ...]


def _last2(values):
    return tuple(values)[-2:]


def output_shape(inst: Instruction, shapes: Mapping[str, Shape]) -> Shape:
    op = inst.op
    if op in ("external", "variable", "variablesync"):
        return tuple(inst.arg("shape"))
    if op == "relu":
        return shapes[inst.arg("x").name]
    if op == "softmax":
        return shapes[inst.arg("x").name]
    if op == "reshape":
        src = shapes[inst.arg("input").name]
        shape = tuple(inst.arg("shape"))
        if _count(src) != _count(shape):
            raise ElementCountMismatch(f"{inst.result}: reshape {list(src)} -> {list(shape)}")
        return shape
    if op == "conv":
        n, c, h, w = _nchw(shapes[inst.arg("input").name])
        o, ci, k_h, k_w = shapes[inst.arg("filter").name]
        if ci != c:
            raise ChannelMismatch(f"{inst.result}: {c} input channels, filter expects {ci}")
        s_h, s_w = _last2(inst.arg("stride"))
        (pt, pb), (pl, pr) = _last2(inst.arg("padding"))
        return (n, o, pool_output_extent(h + pt + pb, k_h, s_h), pool_output_extent(w + pl + pr, k_w, s_w))
    if op == "max_pool":
        n, c, h, w = _nchw(shapes[inst.arg("input").name])
        k_h, k_w = _last2(inst.arg("size"))
        s_h, s_w = _last2(inst.arg("stride"))
        (pt, pb), (pl, pr) = _last2(inst.arg("padding"))
        return (n, c, pool_output_extent(h + pt + pb, k_h, s_h), pool_output_extent(w + pl + pr, k_w, s_w))
    if op == "linear":
        src = shapes[inst.arg("input").name]
        n_out, _ = shapes[inst.arg("filter").name]
        return (src[0], n_out) if len(src) == 2 else (n_out,)
    if op == "concat":
        parts = [shapes[v.name] for v in inst.arg("values")]
        axis = inst.arg("axis") % len(parts[0])
        out = list(parts[0])
        out[axis] = sum(p[axis] for p in parts)
        return tuple(out)
    if op == "split":
        src = list(shapes[inst.arg("value").name])
        axis = inst.arg("axis") % len(src)
        ((lo, hi),) = inst.arg("ranges")
        src[axis] = hi - lo
        return tuple(src)
    if op == "get_var":
        raise NnefError(f"{inst.result}: get_var shape comes from the writer item")
    raise NnefError(f"no shape rule for {op}")


def _nchw(shape: Shape) -> tuple[int, int, int, int]:
    if len(shape) == 4:
        return shape  # type: ignore[return-value]
    if len(shape) == 3:
        return (1, *shape)  # type: ignore[return-value]
    raise ShapeMismatch(f"expected a 3-D or 4-D tensor shape, got {list(shape)}")


def _count(shape: Shape) -> int:
    n = 1
    for d in shape:
        n *= d
    return n


def infer_shapes(program: NnefProgram, known: Mapping[str, Shape] | None = None) -> dict[str, Shape]:
    """Shape of every variable assigned in ``program``.

    ``known`` supplies shapes for variables obtained through get_var.
    """
    shapes: dict[str, Shape] = dict(known or {})
    for inst in program.instructions:
        if inst.op == "send_var" or (inst.op == "get_var" and inst.result in shapes):
            continue
        shapes[inst.result] = output_shape(inst, shapes)
    return shapes
