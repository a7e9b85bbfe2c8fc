"""Canonical NNEF max_pool encodings of framework pooling conventions.

Keras ``padding='same'`` yields ``ceil(n / s)`` windows, padding
``total // 2`` cells before the data as TensorFlow does; the canonical form
then fills the rest of a ``k - 1`` budget after the data, which adds only
unused MIN_F cells.  PyTorch ``padding=p`` adds ``p`` cells on both sides.
Both pad with MIN_F and use border 'ignore'.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tensor.ops import pool_output_extent


@dataclass(frozen=True)
class MaxPoolEncoding:
    framework: str
    size: tuple[int, int, int, int]
    stride: tuple[int, int, int, int]
    padding: tuple[tuple[int, int], ...]
    border: str = "ignore"

    @property
    def dilation(self) -> tuple[int, int, int, int]:
        return (1, 1, 1, 1)

    def output_hw(self, h: int, w: int) -> tuple[int, int]:
        (pt, pb), (pl, pr) = self.padding[2], self.padding[3]
        return (
            pool_output_extent(h + pt + pb, self.size[2], self.stride[2]),
            pool_output_extent(w + pl + pr, self.size[3], self.stride[3]),
        )

    def padding_text(self) -> str:
        return "[" + ", ".join(f"({a}, {b})" for a, b in self.padding) + "]"

    def nnef(self, result: str = "o", source: str = "x") -> str:
        def ints(v):
            return "[" + ", ".join(str(i) for i in v) + "]"

        return (
            f"{result} = max_pool({source}, size = {ints(self.size)}, stride = {ints(self.stride)}, "
            f"dilation = {ints(self.dilation)}, padding = {self.padding_text()}, border = '{self.border}');"
        )


def _pair(v: int | tuple[int, int]) -> tuple[int, int]:
    return (v, v) if isinstance(v, int) else (int(v[0]), int(v[1]))


def _same_pad(n: int, k: int, s: int) -> tuple[int, int]:
    total = max((-(-n // s) - 1) * s + k - n, 0)
    before = total // 2
    return before, k - 1 - before


def keras_encoding(pool_size=2, strides=None, padding: str = "valid", input_hw=None) -> MaxPoolEncoding:
    """``input_hw`` is needed for 'same' with windows wider than 2, where
    the leading pad depends on the input extent."""
    k_h, k_w = _pair(pool_size)
    s_h, s_w = _pair(strides if strides is not None else pool_size)
    if padding == "same":
        if input_hw is None:
            if max(k_h, k_w) > 2:
                raise ValueError("Keras 'same' with pool > 2 needs the input height and width")
            input_hw = (k_h, k_w)  # any extent: the leading pad is always 0 here
        pads = ((0, 0), (0, 0), _same_pad(input_hw[0], k_h, s_h), _same_pad(input_hw[1], k_w, s_w))
    elif padding == "valid":
        pads = ((0, 0),) * 4
    else:
        raise ValueError(f"Keras padding must be 'same' or 'valid', got {padding!r}")
    return MaxPoolEncoding(f"keras[{padding}]", (1, 1, k_h, k_w), (1, 1, s_h, s_w), pads)


def pytorch_encoding(kernel_size=2, stride=None, padding=0) -> MaxPoolEncoding:
    k_h, k_w = _pair(kernel_size)
    s_h, s_w = _pair(stride if stride is not None else kernel_size)
    p_h, p_w = _pair(padding)
    if not (0 <= p_h <= k_h // 2 and 0 <= p_w <= k_w // 2):
        raise ValueError("PyTorch padding must lie in [0, kernel_size // 2]")
    pads = ((0, 0), (0, 0), (p_h, p_h), (p_w, p_w))
    return MaxPoolEncoding(f"pytorch[padding={padding}]", (1, 1, k_h, k_w), (1, 1, s_h, s_w), pads)


@dataclass(frozen=True)
class ConventionDiff:
    encodings: tuple[MaxPoolEncoding, ...]
    input_hw: tuple[int, int]

    @property
    def shapes(self) -> tuple[tuple[int, int], ...]:
        return tuple(e.output_hw(*self.input_hw) for e in self.encodings)

    @property
    def divergent(self) -> bool:
        return len(set(self.shapes)) > 1 or len({e.padding for e in self.encodings}) > 1

    def to_json(self) -> dict:
        return {
            "input": list(self.input_hw),
            "encodings": [
                {
                    "framework": e.framework,
                    "padding": [list(p) for p in e.padding],
                    "border": e.border,
                    "output": list(e.output_hw(*self.input_hw)),
                    "nnef": e.nnef(),
                }
                for e in self.encodings
            ],
            "divergent": self.divergent,
        }


def diff_conventions(
    height: int = 28,
    width: int = 28,
    pool: int = 2,
    stride: int = 2,
    keras_padding: str = "same",
    torch_padding: int = 1,
) -> ConventionDiff:
    return ConventionDiff(
        (
            keras_encoding(pool, stride, keras_padding, (height, width)),
            pytorch_encoding(pool, stride, torch_padding),
        ),
        (height, width),
    )
