from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnefitems.corpus import MODELS, load_model, random_inputs, random_weights
from nnefitems.errors import EvaluationError, MissingInput, NnefError, ShapeMismatch
from nnefitems.frontend import parse
from nnefitems.tensor import evaluate, infer_shapes, output_shape
from nnefitems.tensor.evaluate import apply

from oracles import brute_conv


def zero_weights(program):
    return {i.arg("label"): np.zeros(i.arg("shape"), np.float32) for i in program.declarations() if i.op == "variable"}


def test_lenet_zero_weights_gives_uniform(lenet, rng):
    out = evaluate(lenet, {"e1": rng.standard_normal((1, 1, 32, 32)).astype(np.float32)}, zero_weights(lenet))
    assert out["out"].shape == (1, 10)
    assert np.allclose(out["out"], 0.1, atol=1e-7)


@pytest.mark.parametrize("name", MODELS)
def test_shape_law_on_corpus(name, rng):
    program = load_model(name)
    env = {}
    inputs, weights = random_inputs(program, rng), random_weights(program, rng)
    shapes = infer_shapes(program)
    from nnefitems.tensor.evaluate import run_instructions

    run_instructions(program.instructions, env, inputs, weights)
    for var, tensor in env.items():
        assert tensor.shape == shapes[var], var
        assert tensor.dtype == np.float32


def test_branched_matches_composed_oracle(branched, rng):
    """Compose independent per-op oracles (float64 conv, numpy concat/matmul)."""
    w = random_weights(branched, rng)
    x = rng.standard_normal((1, 1, 32, 32)).astype(np.float32)
    got = evaluate(branched, {"e1": x}, w)["out"]

    def c(t, f, b):
        return brute_conv(t, w[f], w[b][0], 1, 1, [(0, 0), (0, 0)])

    o1 = c(x[0], "conv1/filter", "conv1/bias")
    o3 = c(c(o1, "branch1/filter", "branch1/bias"), "shared/filter", "shared/bias")
    o5 = c(c(o1, "branch2/filter", "branch2/bias"), "shared/filter", "shared/bias")
    flat = np.concatenate([o3, o5], axis=0).reshape(-1)
    want = w["dense/filter"].astype(np.float64) @ flat + w["dense/bias"][0]
    assert np.allclose(got[0], want, rtol=1e-4, atol=1e-4)


def test_branched_identity_like_weights(branched):
    """Centre-tap kernels, zero biases: out is a plain weighted sum of the input crop."""
    w = zero_weights(branched)
    for label, cin, cout in [("conv1/filter", 1, 4), ("branch1/filter", 4, 8), ("branch2/filter", 4, 8), ("shared/filter", 8, 8)]:
        f = np.zeros((cout, cin, 3, 3), np.float32)
        for o in range(cout):
            f[o, o % cin, 1, 1] = 1.0
        w[label] = f
    w["dense/filter"] = np.ones((10, 10816), np.float32)
    x = np.arange(32 * 32, dtype=np.float32).reshape(1, 1, 32, 32) / 1024
    crop = x[0, 0, 3:29, 3:29]
    # every one of the 16 concat channels carries the same crop
    want = float(crop.astype(np.float64).sum()) * 16
    got = evaluate(branched, {"e1": x}, w)["out"]
    assert np.allclose(got, want, rtol=1e-5)


def test_missing_external_names_it(lenet):
    with pytest.raises(MissingInput, match="e1"):
        evaluate(lenet, {}, zero_weights(lenet))


def test_error_carries_instruction_index():
    prog = parse(
        "graph g ( e1 ) -> ( out )\n{ e1 = external(shape = [1, 4]);\n"
        "o1 = relu(e1);\nout = reshape(o1, shape = [3]); }"
    )
    with pytest.raises(EvaluationError) as info:
        evaluate(prog, {"e1": np.zeros((1, 4), np.float32)}, {})
    assert info.value.index == 2 and info.value.result == "out"


def test_external_shape_checked(lenet):
    with pytest.raises(ShapeMismatch):
        evaluate(lenet, {"e1": np.zeros((1, 1, 28, 28), np.float32)}, zero_weights(lenet))


def test_evaluate_is_bit_reproducible(lenet, rng):
    w, x = random_weights(lenet, rng), random_inputs(lenet, rng)
    first = evaluate(lenet, x, w)["out"]
    assert np.array_equal(first, evaluate(lenet, x, w)["out"])


def test_evaluate_rejects_items(branched_items, rng):
    with pytest.raises(NnefError):
        evaluate(branched_items[1], {}, {})


@settings(max_examples=60, deadline=None)
@given(
    c=st.integers(1, 3),
    h=st.integers(3, 10),
    w=st.integers(3, 10),
    k=st.integers(1, 3),
    s=st.integers(1, 3),
    p=st.integers(0, 2),
    op=st.sampled_from(["conv", "max_pool"]),
)
def test_shape_formula_matches_kernels(c, h, w, k, s, p, op):
    if op == "conv":
        call = f"o = conv(e1, f, b, stride = [{s}, {s}], dilation = [1, 1], padding = [({p}, {p}), ({p}, {p})], groups = 1);"
    else:
        call = (
            f"o = max_pool(e1, size = [1, 1, {k}, {k}], stride = [1, 1, {s}, {s}], dilation = [1, 1, 1, 1], "
            f"padding = [(0, 0), (0, 0), ({p}, {p}), ({p}, {p})], border = 'ignore');"
        )
    text = (
        f"graph g ( e1 ) -> ( o )\n{{ e1 = external(shape = [1, {c}, {h}, {w}]);\n"
        f"f = variable(shape = [2, {c}, {k}, {k}], label = 'f');\nb = variable(shape = [1, 2], label = 'b');\n{call} }}"
    )
    prog = parse(text)
    inst = prog.producer("o")
    shapes = {"e1": (1, c, h, w), "f": (2, c, k, k), "b": (1, 2)}
    want = output_shape(inst, shapes)
    env = {"e1": np.ones((1, c, h, w), np.float32), "f": np.ones((2, c, k, k), np.float32), "b": np.zeros((1, 2), np.float32)}
    assert apply(inst, env).shape == want
