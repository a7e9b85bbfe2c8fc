from __future__ import annotations

import numpy as np
import pytest

from nnefitems.corpus import MODELS, load_model, load_split, random_inputs, random_weights
from nnefitems.splitter import split


@pytest.fixture
def lenet():
    return load_model("lenet5")


@pytest.fixture
def branched():
    return load_model("branched")


@pytest.fixture
def rows():
    return load_model("lenet5_rows")


@pytest.fixture
def branched_items(branched):
    return split(branched, load_split("branched"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def instance(name: str, seed: int):
    """(program, items, inputs, weights) for a corpus model and its reference split."""
    program = load_model(name)
    rng = np.random.default_rng(seed)
    items = split(program, load_split(name))
    return program, items, random_inputs(program, rng), random_weights(program, rng)


ALL_MODELS = MODELS
