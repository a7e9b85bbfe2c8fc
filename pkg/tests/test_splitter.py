from __future__ import annotations

import dataclasses
import re
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnefitems.corpus import MODELS, load_model, load_split, random_inputs, random_weights
from nnefitems.errors import ConflictingDeclarations, EmptyItem, InvalidAssignment, UnresolvedSync
from nnefitems.frontend import parse, serialize, validate_item_set
from nnefitems.splitter import (
    Assignment,
    load_assignment,
    merge,
    save_assignment,
    split,
    suggest_assignments,
    sync_variable,
    write_items,
)
from nnefitems.tensor import evaluate


def ops(program):
    return [i.op for i in program.instructions]


def test_branched_item_structure(branched_items):
    item1, item2, item3 = branched_items
    assert [it.item_id for it in branched_items] == ["item1", "item2", "item3"]
    assert item1.inputs == ("e1", "o3", "o5")
    assert item1.outputs == ("o1", "out")
    assert item2.inputs == ("o1",) and item2.outputs == ("o3",)
    # declarations, then variablesyncs, then the body
    kinds = ops(item2)
    assert kinds == ["variable"] * 4 + ["variablesync", "get_var", "conv", "conv", "send_var"]
    send = item1.sends()[0]
    assert send.result == "o1_sync"
    assert [d.name for d in send.arg("dest")] == ["item2", "item3"]
    sync_decl = next(i for i in item1.instructions if i.op == "variablesync")
    assert list(sync_decl.arg("shape")) == [1, 4, 30, 30]


def test_shared_weights_are_replicated(branched_items):
    holders = [it.item_id for it in branched_items if any(d.result == "v5" for d in it.declarations())]
    assert holders == ["item2", "item3"]


@pytest.mark.parametrize("model", MODELS)
def test_split_items_are_well_formed_and_reparse(model):
    items = split(load_model(model), load_split(model))
    assert validate_item_set(items) == []
    for item in items:
        assert parse(serialize(item)) == item


@pytest.mark.parametrize("model", MODELS)
def test_merge_round_trip(model):
    program = load_model(model)
    merged = merge(split(program, load_split(model)))
    assert Counter(i.op for i in merged.computations()) == Counter(i.op for i in program.computations())
    assert {i.result for i in merged.instructions} == {i.result for i in program.instructions}
    rng = np.random.default_rng(7)
    inputs, weights = random_inputs(program, rng), random_weights(program, rng)
    a, b = evaluate(program, inputs, weights), evaluate(merged, inputs, weights)
    assert a.keys() == b.keys()
    for k in a:
        assert np.array_equal(a[k], b[k])


@settings(max_examples=20, deadline=None)
@given(model=st.sampled_from(MODELS), data=st.data())
def test_split_then_merge_preserves_instructions(model, data):
    program = load_model(model)
    names = [i.result for i in program.computations()]
    owners = data.draw(st.lists(st.sampled_from(["p", "q", "r"]), min_size=len(names), max_size=len(names)))
    items = split(program, Assignment(tuple(sorted(set(owners))), dict(zip(names, owners))))
    merged = merge(items)
    assert sorted(map(str, merged.computations())) == sorted(map(str, program.computations()))


def test_merge_missing_send_is_unresolved(branched_items):
    item1 = branched_items[0]
    broken = dataclasses.replace(item1, instructions=tuple(i for i in item1.instructions if i.op != "send_var"))
    with pytest.raises(UnresolvedSync):
        merge([broken, *branched_items[1:]])


def test_merge_conflicting_declaration(branched_items):
    text = serialize(branched_items[2]).replace("v5 = variable(shape = [8, 8, 3, 3]", "v5 = variable(shape = [8, 8, 1, 1]")
    with pytest.raises(ConflictingDeclarations):
        merge([branched_items[0], branched_items[1], parse(text)])


def test_merge_same_label_different_shape(branched_items):
    text = re.sub(r"\bv5\b", "w5", serialize(branched_items[2]))
    text = text.replace("w5 = variable(shape = [8, 8, 3, 3]", "w5 = variable(shape = [8, 8, 1, 1]")
    with pytest.raises(ConflictingDeclarations, match="shared/filter"):
        merge([branched_items[0], branched_items[1], parse(text)])


@pytest.mark.parametrize(
    "mapping_edit, error",
    [
        (lambda m: m.pop("o2"), InvalidAssignment),
        (lambda m: m.update(v1="item1"), InvalidAssignment),
        (lambda m: m.update(zz="item1"), InvalidAssignment),
        (lambda m: m.update(o2="item9"), InvalidAssignment),
    ],
)
def test_invalid_assignments(branched, mapping_edit, error):
    base = load_split("branched")
    mapping = dict(base.mapping)
    mapping_edit(mapping)
    with pytest.raises(error):
        split(branched, Assignment(base.items, mapping))


def test_empty_item(branched):
    base = load_split("branched")
    with pytest.raises(EmptyItem):
        split(branched, Assignment((*base.items, "item4"), base.mapping))


def test_assignment_json_round_trip(tmp_path):
    a = load_split("branched")
    path = tmp_path / "a.json"
    save_assignment(a, path)
    b = load_assignment(path)
    assert b.items == a.items and dict(b.mapping) == dict(a.mapping)


def test_assignment_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(InvalidAssignment):
        load_assignment(path)
    path.write_text('{"items": ["a"]}')
    with pytest.raises(InvalidAssignment):
        load_assignment(path)


def test_sync_variable_avoids_clashes():
    assert sync_variable("o1", set()) == "o1_sync"
    assert sync_variable("o1", {"o1_sync"}) == "o1_sync2"


def test_suggestions_for_branched(branched):
    by_strategy = {a.strategy: a for a in suggest_assignments(branched, 3)}
    assert "branch-parallel" in by_strategy
    bp = by_strategy["branch-parallel"]
    assert {bp.mapping[v] for v in ("o2", "o3")} != {bp.mapping[v] for v in ("o4", "o5")}
    assert bp.mapping["o1"] == bp.mapping["out"] == "item1"


def test_suggestions_for_lenet(lenet):
    strategies = [a.strategy for a in suggest_assignments(lenet, 2)]
    assert "offload-conv" in strategies and "branch-parallel" not in strategies
    assert [a.strategy for a in suggest_assignments(lenet, 1)] == ["single"]
    assert [a.strategy for a in suggest_assignments(lenet, 3)] == ["contiguous"]
    with pytest.raises(ValueError):
        suggest_assignments(lenet, 0)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_every_suggestion_splits_cleanly(model, n):
    program = load_model(model)
    for assignment in suggest_assignments(program, n):
        items = split(program, assignment)
        assert len(items) == n
        assert validate_item_set(items) == []


def test_write_items(tmp_path, branched_items):
    paths = write_items(branched_items, tmp_path / "out")
    assert [p.name for p in paths] == ["branched.item1.nnef", "branched.item2.nnef", "branched.item3.nnef"]
    assert parse(paths[1].read_text()) == branched_items[1]
