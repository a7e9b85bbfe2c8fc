from __future__ import annotations

import struct

import numpy as np
import pytest

from nnefitems.errors import MissingWeight, ShapeMismatch
from nnefitems.frontend import decode_tensor, encode_tensor, load_weights, parse, read_tensor, save_weights, write_tensor
from nnefitems.frontend.weights import weight_path

PROG = parse(
    "graph g ( e1 ) -> ( out )\n{\n"
    "e1 = external(shape = [1, 6]);\n"
    "v1 = variable(shape = [6, 1, 5, 5], label = 'conv1/filter');\n"
    "out = relu(e1);\n}\n"
)


def test_layout_is_little_endian_header_then_payload():
    blob = encode_tensor(np.arange(6, dtype=np.float32).reshape(2, 3))
    assert blob[:4] == b"NWT1"
    assert struct.unpack("<3I", blob[4:16]) == (2, 2, 3)
    assert np.frombuffer(blob[16:], "<f4").tolist() == [0, 1, 2, 3, 4, 5]


def test_round_trip(tmp_path, rng):
    x = rng.standard_normal((3, 4, 5)).astype(np.float32)
    write_tensor(tmp_path / "x.dat", x)
    y = read_tensor(tmp_path / "x.dat")
    assert y.dtype == np.float32 and np.array_equal(x, y)


def test_accepts_150_floats(tmp_path):
    save_weights(tmp_path, {"conv1/filter": np.ones((6, 1, 5, 5), np.float32)})
    store = load_weights(tmp_path, PROG)
    assert store["conv1/filter"].size == 150


def test_149_floats_is_shape_mismatch(tmp_path):
    blob = encode_tensor(np.ones((6, 1, 5, 5), np.float32))[:-4]
    path = weight_path(tmp_path, "conv1/filter")
    path.parent.mkdir(parents=True)
    path.write_bytes(blob)
    with pytest.raises(ShapeMismatch):
        load_weights(tmp_path, PROG)


def test_declared_shape_differs_from_file(tmp_path):
    save_weights(tmp_path, {"conv1/filter": np.ones((150,), np.float32)})
    with pytest.raises(ShapeMismatch):
        load_weights(tmp_path, PROG)


def test_missing_label(tmp_path):
    with pytest.raises(MissingWeight, match="conv1/filter"):
        load_weights(tmp_path, PROG)


def test_bad_magic():
    with pytest.raises(ShapeMismatch):
        decode_tensor(b"XXXX\x00\x00\x00\x00")
