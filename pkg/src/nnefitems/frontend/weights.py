"""Binary tensor files.

Layout (all little-endian): magic ``NWT1``, u32 rank, ``rank`` x u32 dims,
then the row-major float32 payload.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from ..errors import MissingWeight, ShapeMismatch
from .program import NnefProgram

MAGIC = b"NWT1"

WeightStore = dict[str, np.ndarray]


def encode_tensor(array: np.ndarray) -> bytes:
    array = np.ascontiguousarray(array, dtype="<f4")
    header = MAGIC + struct.pack("<I", array.ndim) + struct.pack(f"<{array.ndim}I", *array.shape)
    return header + array.tobytes()


def decode_tensor(blob: bytes, origin: str = "<bytes>") -> np.ndarray:
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise ShapeMismatch(f"{origin}: not an NWT1 tensor file")
    (rank,) = struct.unpack_from("<I", blob, 4)
    offset = 8 + 4 * rank
    if len(blob) < offset:
        raise ShapeMismatch(f"{origin}: truncated header")
    dims = struct.unpack_from(f"<{rank}I", blob, 8)
    payload = blob[offset:]
    expected = int(np.prod(dims, dtype=np.int64)) * 4
    if len(payload) != expected:
        raise ShapeMismatch(
            f"{origin}: header shape {list(dims)} needs {expected // 4} floats, file holds {len(payload) / 4:g}"
        )
    return np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(dims)


def write_tensor(path: str | Path, array: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_tensor(array))


def read_tensor(path: str | Path) -> np.ndarray:
    path = Path(path)
    return decode_tensor(path.read_bytes(), str(path))


def weight_path(directory: str | Path, label: str) -> Path:
    return Path(directory) / f"{label}.dat"


def load_weights(directory: str | Path, program: NnefProgram) -> WeightStore:
    """Read one file per ``variable`` label and check it against the declared shape."""
    store: WeightStore = {}
    for inst in program.declarations():
        if inst.op != "variable":
            continue
        label = inst.arg("label")
        if label in store:
            continue
        path = weight_path(directory, label)
        if not path.is_file():
            raise MissingWeight(f"no weight file for label {label!r} ({path})")
        tensor = read_tensor(path)
        declared = tuple(inst.arg("shape"))
        if tensor.shape != declared:
            raise ShapeMismatch(f"{label}: declared shape {list(declared)}, file holds {list(tensor.shape)}")
        store[label] = tensor
    return store


def save_weights(directory: str | Path, store: Mapping[str, np.ndarray]) -> None:
    for label, tensor in store.items():
        write_tensor(weight_path(directory, label), tensor)
