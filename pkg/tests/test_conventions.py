from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnefitems.conventions import diff_conventions, keras_encoding, pytorch_encoding
from nnefitems.frontend import parse
from nnefitems.tensor import evaluate
from nnefitems.tensor.ops import max_pool

from oracles import keras_same_pool, torch_pool


def apply(encoding, x):
    out = max_pool(x[None], encoding.size, encoding.stride, encoding.dilation, encoding.padding, encoding.border)
    return out[0]


def test_default_diff_reproduces_listed_encodings():
    diff = diff_conventions()
    keras, torch = diff.encodings
    assert keras.padding == ((0, 0), (0, 0), (0, 1), (0, 1))
    assert torch.padding == ((0, 0), (0, 0), (1, 1), (1, 1))
    assert keras.border == torch.border == "ignore"
    assert diff.shapes == ((14, 14), (15, 15))
    assert diff.divergent


def test_valid_has_no_padding():
    assert keras_encoding(3, 2, "valid").padding == ((0, 0),) * 4


def test_bad_arguments():
    with pytest.raises(ValueError):
        keras_encoding(2, 2, "full")
    with pytest.raises(ValueError):
        keras_encoding(3, 1, "same")
    with pytest.raises(ValueError):
        pytorch_encoding(2, 2, 2)


def test_encoding_text_parses_and_runs():
    enc = diff_conventions().encodings[0]
    src = f"graph g ( x ) -> ( o )\n{{\nx = external(shape = [1, 1, 28, 28]);\n{enc.nnef()}\n}}\n"
    x = np.random.default_rng(0).standard_normal((1, 1, 28, 28)).astype(np.float32)
    assert evaluate(parse(src), {"x": x}, {})["o"].shape == (1, 1, 14, 14)


@settings(max_examples=150, deadline=None)
@given(
    h=st.integers(1, 12), w=st.integers(1, 12), k=st.integers(1, 4), s=st.integers(1, 4), seed=st.integers(0, 2**32 - 1)
)
def test_keras_same_matches_framework_semantics(h, w, k, s, seed):
    x = np.random.default_rng(seed).standard_normal((2, h, w)).astype(np.float32)
    enc = keras_encoding(k, s, "same", (h, w))
    got = apply(enc, x)
    assert got.shape[1:] == enc.output_hw(h, w) == (-(-h // s), -(-w // s))
    assert np.array_equal(got, keras_same_pool(x, (k, k), (s, s)))


@settings(max_examples=150, deadline=None)
@given(data=st.data(), h=st.integers(1, 12), w=st.integers(1, 12), k=st.integers(1, 4), s=st.integers(1, 4))
def test_pytorch_matches_framework_semantics(data, h, w, k, s):
    p = data.draw(st.integers(0, k // 2))
    if h + 2 * p < k or w + 2 * p < k:
        return
    x = np.random.default_rng(h * 100 + w).standard_normal((3, h, w)).astype(np.float32)
    enc = pytorch_encoding(k, s, p)
    got = apply(enc, x)
    assert got.shape[1:] == enc.output_hw(h, w)
    assert np.array_equal(got, torch_pool(x, (k, k), (s, s), (p, p)))


def test_json_report():
    doc = diff_conventions(28, 28).to_json()
    assert doc["divergent"] is True
    assert [e["output"] for e in doc["encodings"]] == [[14, 14], [15, 15]]
