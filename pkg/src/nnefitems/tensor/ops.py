"""Layer kernels over float32 numpy arrays.

``pad`` and ``pool_max`` work on (height, width, channel) tensors exactly as
the padding/pooling functions are defined; the NNEF-facing ``max_pool`` and
``conv`` take (batch=1, channel, height, width) arrays and transpose into
that layout.  Accumulating kernels use a fixed loop order so results are
bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import (
    AxisOutOfRange,
    ChannelMismatch,
    ElementCountMismatch,
    RankError,
    ShapeMismatch,
    UnsupportedBorder,
    UnsupportedDilation,
    UnsupportedGroups,
    WindowTooLarge,
)

# Most negative finite float32: neutral element of max over finite data.
MIN_F = np.float32(np.finfo(np.float32).min)


@dataclass(frozen=True)
class PaddingSpec:
    top: int
    bottom: int
    left: int
    right: int
    fill: float = 0.0

    def __post_init__(self) -> None:
        if min(self.top, self.bottom, self.left, self.right) < 0:
            raise ValueError("padding counts must be non-negative")


@dataclass(frozen=True)
class PoolSpec:
    k_h: int
    k_w: int
    s_h: int
    s_w: int

    def __post_init__(self) -> None:
        if min(self.k_h, self.k_w, self.s_h, self.s_w) < 1:
            raise ValueError("window and stride must be >= 1")


def pool_output_extent(n: int, k: int, s: int) -> int:
    """floor((n - k) / s + 1)"""
    return (n - k) // s + 1


def pad(x: np.ndarray, spec: PaddingSpec) -> np.ndarray:
    """Border-pad an (h, w, c) tensor with ``spec.fill``."""
    if x.ndim != 3:
        raise RankError(f"pad expects a rank-3 (h, w, c) tensor, got rank {x.ndim}")
    n_h, n_w, n_c = x.shape
    out = np.full(
        (n_h + spec.top + spec.bottom, n_w + spec.left + spec.right, n_c),
        np.float32(spec.fill),
        dtype=np.float32,
    )
    out[spec.top : spec.top + n_h, spec.left : spec.left + n_w, :] = x
    return out


def pool_max(x: np.ndarray, spec: PoolSpec) -> np.ndarray:
    """Max over each k_h x k_w window taken every (s_h, s_w) of an (h, w, c) tensor."""
    if x.ndim != 3:
        raise RankError(f"pooling expects a rank-3 (h, w, c) tensor, got rank {x.ndim}")
    n_h, n_w, _ = x.shape
    if spec.k_h > n_h or spec.k_w > n_w:
        raise WindowTooLarge(f"window {spec.k_h}x{spec.k_w} exceeds input {n_h}x{n_w}")
    o_h = pool_output_extent(n_h, spec.k_h, spec.s_h)
    o_w = pool_output_extent(n_w, spec.k_w, spec.s_w)
    out = None
    for i in range(spec.k_h):
        for j in range(spec.k_w):
            window = x[i : i + spec.s_h * (o_h - 1) + 1 : spec.s_h, j : j + spec.s_w * (o_w - 1) + 1 : spec.s_w, :]
            out = window.copy() if out is None else np.maximum(out, window)
    return out


def _chw(x: np.ndarray, what: str) -> np.ndarray:
    if x.ndim == 4:
        if x.shape[0] != 1:
            raise ShapeMismatch(f"{what}: batch dimension must be 1, got {x.shape[0]}")
        return x[0]
    if x.ndim == 3:
        return x
    raise RankError(f"{what} expects a (1, c, h, w) or (c, h, w) tensor, got rank {x.ndim}")


def _spatial(values: Sequence, rank: int, what: str, trivial) -> tuple:
    values = tuple(values)
    if len(values) == 2:
        return values
    if len(values) == rank and rank > 2:
        lead = values[: rank - 2]
        if any(v != trivial for v in lead):
            raise ShapeMismatch(f"{what}: batch/channel entries must be {trivial}, got {list(lead)}")
        return values[rank - 2 :]
    raise ShapeMismatch(f"{what}: expected 2 or {rank} entries, got {len(values)}")


def max_pool(
    x: np.ndarray,
    size: Sequence[int],
    stride: Sequence[int],
    dilation: Sequence[int],
    padding: Sequence[tuple[int, int]],
    border: str,
) -> np.ndarray:
    """NNEF ``max_pool`` restricted to border 'ignore' and no dilation.

    Computed as pooling after padding with MIN_F.
    """
    if any(d != 1 for d in dilation):
        raise UnsupportedDilation(f"max_pool dilation {list(dilation)} is not supported")
    if border != "ignore":
        raise UnsupportedBorder(f"max_pool border {border!r} is not supported (only 'ignore')")
    chw = _chw(x, "max_pool")
    k_h, k_w = _spatial(size, x.ndim, "max_pool size", 1)
    s_h, s_w = _spatial(stride, x.ndim, "max_pool stride", 1)
    (p_t, p_b), (p_l, p_r) = _spatial(padding, x.ndim, "max_pool padding", (0, 0))
    hwc = np.transpose(chw, (1, 2, 0))
    padded = pad(hwc, PaddingSpec(p_t, p_b, p_l, p_r, MIN_F))
    pooled = np.transpose(pool_max(padded, PoolSpec(k_h, k_w, s_h, s_w)), (2, 0, 1))
    pooled = np.ascontiguousarray(pooled)
    return pooled[None] if x.ndim == 4 else pooled


def conv(
    x: np.ndarray,
    filt: np.ndarray,
    bias: np.ndarray,
    stride: Sequence[int],
    dilation: Sequence[int],
    padding: Sequence[tuple[int, int]],
    groups: int,
) -> np.ndarray:
    """2-D cross-correlation plus bias, zero padding, groups == 1 only.

    Each output cell accumulates in float32 over input channel, then kernel
    row, then kernel column; the bias is added last.
    """
    if groups != 1:
        raise UnsupportedGroups(f"conv groups={groups} is not supported")
    if any(d != 1 for d in dilation):
        raise UnsupportedDilation(f"conv dilation {list(dilation)} is not supported")
    chw = _chw(x, "conv")
    if filt.ndim != 4:
        raise RankError(f"conv filter must be (out_c, in_c, k_h, k_w), got rank {filt.ndim}")
    out_c, in_c, k_h, k_w = filt.shape
    if chw.shape[0] != in_c:
        raise ChannelMismatch(f"conv input has {chw.shape[0]} channels, filter expects {in_c}")
    b = bias.reshape(-1)
    if b.shape[0] != out_c:
        raise ShapeMismatch(f"conv bias has {b.shape[0]} entries, expected {out_c}")
    s_h, s_w = _spatial(stride, 4, "conv stride", 1)
    (p_t, p_b), (p_l, p_r) = _spatial(padding, 4, "conv padding", (0, 0))
    hwc = pad(np.transpose(chw, (1, 2, 0)), PaddingSpec(p_t, p_b, p_l, p_r, 0.0))
    xs = np.transpose(hwc, (2, 0, 1))
    n_h, n_w = xs.shape[1:]
    if k_h > n_h or k_w > n_w:
        raise WindowTooLarge(f"kernel {k_h}x{k_w} exceeds padded input {n_h}x{n_w}")
    o_h = pool_output_extent(n_h, k_h, s_h)
    o_w = pool_output_extent(n_w, k_w, s_w)
    acc = np.zeros((out_c, o_h, o_w), dtype=np.float32)
    for c in range(in_c):
        for i in range(k_h):
            for j in range(k_w):
                patch = xs[c, i : i + s_h * (o_h - 1) + 1 : s_h, j : j + s_w * (o_w - 1) + 1 : s_w]
                acc += filt[:, c, i, j][:, None, None] * patch[None]
    acc += b.astype(np.float32)[:, None, None]
    return acc[None] if x.ndim == 4 else acc


def relu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.float32(0)).astype(np.float32)


def _axis(x: np.ndarray, axis: int) -> int:
    if not -x.ndim <= axis < x.ndim:
        raise AxisOutOfRange(f"axis {axis} out of range for rank {x.ndim}")
    return axis % x.ndim


def softmax(x: np.ndarray, axis: int) -> np.ndarray:
    axis = _axis(x, axis)
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted, dtype=np.float32)
    return (e / np.sum(e, axis=axis, keepdims=True, dtype=np.float32)).astype(np.float32)


def reshape(x: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    shape = tuple(shape)
    if any(d < 1 for d in shape) or int(np.prod(shape)) != x.size:
        raise ElementCountMismatch(f"cannot reshape {list(x.shape)} ({x.size} elements) to {list(shape)}")
    return x.reshape(shape)


def linear(x: np.ndarray, filt: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """``filt @ x + bias`` for a single input row, accumulated in input order."""
    if filt.ndim != 2:
        raise RankError(f"linear filter must be (n_out, n_in), got rank {filt.ndim}")
    if x.ndim == 2 and x.shape[0] != 1:
        raise ShapeMismatch(f"linear input batch must be 1, got {x.shape[0]}")
    if x.ndim not in (1, 2):
        raise RankError(f"linear input must be (n_in,) or (1, n_in), got rank {x.ndim}")
    v = x.reshape(-1)
    n_out, n_in = filt.shape
    if v.shape[0] != n_in:
        raise ShapeMismatch(f"linear input has {v.shape[0]} features, filter expects {n_in}")
    b = bias.reshape(-1)
    if b.shape[0] != n_out:
        raise ShapeMismatch(f"linear bias has {b.shape[0]} entries, expected {n_out}")
    acc = np.zeros(n_out, dtype=np.float32)
    for k in range(n_in):
        acc += filt[:, k] * v[k]
    acc += b.astype(np.float32)
    return acc[None] if x.ndim == 2 else acc


def concat(values: Sequence[np.ndarray], axis: int) -> np.ndarray:
    if not values:
        raise ShapeMismatch("concat needs at least one input")
    first = values[0]
    axis = _axis(first, axis)
    for v in values[1:]:
        if v.ndim != first.ndim or any(a != b for d, (a, b) in enumerate(zip(v.shape, first.shape)) if d != axis):
            raise ShapeMismatch(f"concat shapes {list(first.shape)} and {list(v.shape)} differ off axis {axis}")
    return np.concatenate(values, axis=axis).astype(np.float32)


def split(x: np.ndarray, axis: int, ranges: Sequence[tuple[int, int]]) -> list[np.ndarray]:
    """Extract half-open index ranges along ``axis``; ranges may overlap."""
    axis = _axis(x, axis)
    parts = []
    for lo, hi in ranges:
        if not 0 <= lo < hi <= x.shape[axis]:
            raise ShapeMismatch(f"split range [{lo}, {hi}) invalid for extent {x.shape[axis]}")
        index = [slice(None)] * x.ndim
        index[axis] = slice(lo, hi)
        parts.append(np.ascontiguousarray(x[tuple(index)]))
    return parts
