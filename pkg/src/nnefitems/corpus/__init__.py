"""Bundled example models, assignments and a random-weight helper."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from ..frontend.parser import parse_program
from ..frontend.lexer import tokenize
from ..frontend.program import NnefProgram
from ..splitter import Assignment

MODELS = ("lenet5", "branched", "lenet5_rows")

# Reference splits shipped with the models.
SPLITS = {
    "lenet5": "lenet5.offload.json",
    "branched": "branched.assignment.json",
    "lenet5_rows": "lenet5_rows.assignment.json",
}


def corpus_dir() -> Path:
    return Path(str(resources.files(__name__)))


def model_path(name: str) -> Path:
    return corpus_dir() / f"{name}.nnef"


def load_model(name: str) -> NnefProgram:
    return parse_program(tokenize(model_path(name).read_text(encoding="utf-8")))


def load_split(name: str) -> Assignment:
    return Assignment.from_json(json.loads((corpus_dir() / SPLITS[name]).read_text(encoding="utf-8")))


def random_weights(program: NnefProgram, rng: np.random.Generator, scale: float = 0.5) -> dict[str, np.ndarray]:
    """Uniform(-scale, scale) float32 tensor for every ``variable`` label."""
    out = {}
    for inst in program.declarations():
        if inst.op == "variable":
            shape = tuple(inst.arg("shape"))
            out[inst.arg("label")] = rng.uniform(-scale, scale, size=shape).astype(np.float32)
    return out


def random_inputs(program: NnefProgram, rng: np.random.Generator) -> dict[str, np.ndarray]:
    out = {}
    for inst in program.declarations():
        if inst.op == "external":
            out[inst.result] = rng.uniform(0.0, 1.0, size=tuple(inst.arg("shape"))).astype(np.float32)
    return out
