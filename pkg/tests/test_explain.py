import copy
import random

from conftest import MINI_FACTS, eval_with_facts
from genutil import random_calc_graph, random_money
from kgengine.engine import EvalState, FactStore, full_eval, recompute, set_fact
from kgengine.explain import explain, explain_path
from kgengine.model import (
    Binding,
    BoundedCalcModel,
    FieldDecl,
    FieldRole,
    KnowledgeGraph,
)
from kgengine.values import Value, ValueKind

import pytest

from kgengine.errors import UnknownFieldError

EXPECTED_PREORDER = ["L20", "L19", "L17", "L18e", "L18a", "L18b", "L18c", "L18d", "L16"]


def test_depth_one_explanation_text_and_children(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    node = explain(mini_graph, result, store, "L20", depth=1)
    assert node.text == "L20 (200.00) is L19 (600.00) minus L16 (400.00), floored at zero"
    assert [c.field for c in node.children] == ["L19", "L16"]
    for child in node.children:
        assert child.children == ()
        assert child.depth == 1


def test_depth_two_expands_the_middle_level(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    node = explain(mini_graph, result, store, "L20", depth=2)
    l19 = node.children[0]
    assert [c.field for c in l19.children] == ["L17", "L18e"]
    l18e = l19.children[1]
    assert l18e.children == ()  # beyond depth, value still correct
    assert l18e.value.render() == "100.00"


def test_inputs_terminate_chains(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    for depth in (1, 3, None):
        node = explain(mini_graph, result, store, "L17", depth=depth)
        assert node.children == ()
        assert node.gist == "input-fact"
        assert node.text == "L17 (500.00) is a value you entered"


def test_preorder_path(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    assert [n.field for n in explain_path(mini_graph, result, store, "L20")] == EXPECTED_PREORDER


def test_path_of_input_is_single_node(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    assert [n.field for n in explain_path(mini_graph, result, store, "L17")] == ["L17"]


def test_path_of_mid_level_field(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    assert [n.field for n in explain_path(mini_graph, result, store, "L18e")] == [
        "L18e", "L18a", "L18b", "L18c", "L18d",
    ]


def test_structure_equals_backward_closure(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    visited = {n.field for n in explain_path(mini_graph, result, store, "L20")}

    def brute_closure(fid):
        seen = set()
        stack = [fid]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            producer = mini_graph.producer_of(cur)
            if producer:
                stack.extend(producer.ref_inputs())
        return seen

    assert visited == brute_closure("L20")


def test_closure_equality_on_random_graphs():
    rng = random.Random(20)
    for _ in range(15):
        graph = random_calc_graph(rng, n_inputs=4, n_models=10)
        store, state = FactStore(), EvalState.fresh(graph)
        for f in graph.fields.values():
            if f.role is FieldRole.INPUT:
                set_fact(graph, store, state, f.id, random_money(rng))
        result = recompute(graph, store, state)
        target = graph.calc_models[-1].output
        visited = {n.field for n in explain_path(graph, result, store, target)}
        seen, stack = set(), [target]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            producer = graph.producer_of(cur)
            if producer:
                stack.extend(producer.ref_inputs())
        assert visited == seen


def test_rendered_text_contains_engine_rendering(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    for node in explain_path(mini_graph, result, store, "L20"):
        assert node.value.render() in node.text
        assert node.value == result.values[node.field]


def test_explain_is_read_only(mini_graph):
    store, state = FactStore(), EvalState.fresh(mini_graph)
    for fid, raw in MINI_FACTS.items():
        set_fact(mini_graph, store, state, fid, Value.money(raw))
    result = recompute(mini_graph, store, state)
    store_before = copy.deepcopy(store)
    state_snapshot = (
        dict(state.values), set(state.unknown), dict(state.computed),
        set(state.dirty), dict(state.eval_count), state.revision,
    )
    explain(mini_graph, result, store, "L20", depth=None)
    explain_path(mini_graph, result, store, "L20")
    assert store.facts == store_before.facts and store.revision == store_before.revision
    assert state_snapshot == (
        dict(state.values), set(state.unknown), dict(state.computed),
        set(state.dirty), dict(state.eval_count), state.revision,
    )


def test_depth_layers_are_prefixes(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)

    def layers(node, acc):
        acc.setdefault(node.depth, []).append(node.field)
        for child in node.children:
            layers(child, acc)
        return acc

    for d in (1, 2, 3):
        shallow = layers(explain(mini_graph, result, store, "L20", depth=d), {})
        deeper = layers(explain(mini_graph, result, store, "L20", depth=d + 1), {})
        for level, fields_at in shallow.items():
            assert deeper[level] == fields_at


def test_unknown_values_render_unknown_token(mini_graph):
    store, _, result = eval_with_facts(mini_graph, {"L17": "500.00"})
    node = explain(mini_graph, result, store, "L20", depth=2)
    assert "(unknown)" in node.text
    pending = [n for n in explain_path(mini_graph, result, store, "L20") if n.field == "L16"]
    assert pending[0].text == "L16 (unknown) has not been provided yet"


def test_default_inputs_render_as_defaults():
    graph = KnowledgeGraph(
        "defaults",
        [
            FieldDecl("a", ValueKind.MONEY, FieldRole.INPUT, default=Value.money("5.00")),
            FieldDecl("o", ValueKind.MONEY, FieldRole.COMPUTED),
        ],
        [BoundedCalcModel("m", "ADD", (Binding(None, ref="a"),), "o")],
    )
    store = FactStore()
    result = full_eval(graph, store)
    node = explain(graph, result, store, "o", depth=1)
    leaf = node.children[0]
    assert leaf.gist == "default"
    assert leaf.text == "a (5.00) is the default when left blank"


def test_labels_used_when_declared(benefit_graph):
    store, _, result = eval_with_facts(benefit_graph, {"Age": "19"})
    node = explain(benefit_graph, result, store, "Age")
    assert node.text == "Your age (19.0000) is a value you entered"


def test_constants_render_inline():
    graph = KnowledgeGraph(
        "consts",
        [
            FieldDecl("a", ValueKind.MONEY, FieldRole.INPUT),
            FieldDecl("o", ValueKind.MONEY, FieldRole.COMPUTED),
        ],
        [BoundedCalcModel("m", "MULTIPLY", (
            Binding(None, ref="a"), Binding(None, const=Value.number("0.5")),
        ), "o")],
    )
    store, state = FactStore(), EvalState.fresh(graph)
    set_fact(graph, store, state, "a", Value.money("10.00"))
    result = recompute(graph, store, state)
    node = explain(graph, result, store, "o")
    assert node.text == "o (5.00) is the product of a (10.00), 0.5000 (0.5000)"
    assert [c.field for c in node.children] == ["a"]  # constants are not children


def test_unknown_field_raises(mini_graph):
    store, _, result = eval_with_facts(mini_graph, MINI_FACTS)
    with pytest.raises(UnknownFieldError):
        explain(mini_graph, result, store, "nope")
