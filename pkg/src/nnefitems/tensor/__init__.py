"""Functional semantics: float32 layer kernels and sequential evaluation."""

from .evaluate import apply, evaluate
from .ops import (
    MIN_F,
    PaddingSpec,
    PoolSpec,
    concat,
    conv,
    linear,
    max_pool,
    pad,
    pool_max,
    pool_output_extent,
    relu,
    reshape,
    softmax,
    split,
)
from .shapes import infer_shapes, output_shape

__all__ = [
    "MIN_F",
    "PaddingSpec",
    "PoolSpec",
    "apply",
    "concat",
    "conv",
    "evaluate",
    "infer_shapes",
    "linear",
    "max_pool",
    "output_shape",
    "pad",
    "pool_max",
    "pool_output_extent",
    "relu",
    "reshape",
    "softmax",
    "split",
]
