import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genutil import random_calc_graph
from kgengine.errors import CycleError
from kgengine.model import (
    Binding,
    BoundedCalcModel,
    CompletenessGraph,
    ConditionNode,
    FieldDecl,
    FieldRole,
    KnowledgeGraph,
    OutcomeNode,
    TruthRow,
    TruthTable,
    dependency_cone,
    derive_truth_table,
    effective_truth_table,
    topo_order,
    validate,
)
from kgengine.values import Value, ValueKind

MONEY = ValueKind.MONEY


def money_field(fid, role=FieldRole.INPUT, **kw):
    return FieldDecl(fid, MONEY, role, **kw)


def test_fixture_graph_is_valid(mini_graph):
    assert validate(mini_graph) == []


def test_smallest_cycle_is_reported_naming_both_fields():
    graph = KnowledgeGraph(
        "cyc",
        [money_field("L19", FieldRole.COMPUTED), money_field("L20", FieldRole.COMPUTED)],
        [
            BoundedCalcModel("a", "ADD", (Binding(None, ref="L20"),), "L19"),
            BoundedCalcModel("b", "ADD", (Binding(None, ref="L19"),), "L20"),
        ],
    )
    diags = [d for d in validate(graph) if d.code == "KG018"]
    assert len(diags) == 1
    assert "L19" in diags[0].message and "L20" in diags[0].message


def test_duplicate_output_is_one_diagnostic():
    graph = KnowledgeGraph(
        "dup",
        [money_field("a"), money_field("L19", FieldRole.COMPUTED)],
        [
            BoundedCalcModel("m1", "ADD", (Binding(None, ref="a"),), "L19"),
            BoundedCalcModel("m2", "ADD", (Binding(None, ref="a"),), "L19"),
        ],
    )
    dups = [d for d in validate(graph) if d.code == "KG014"]
    assert len(dups) == 1
    assert "m1" in dups[0].message and "m2" in dups[0].message


def test_topo_order_on_fixture(mini_graph):
    assert [m.id for m in topo_order(mini_graph)] == ["m18e", "m19", "m20"]


def test_topo_order_empty_graph():
    assert topo_order(KnowledgeGraph("empty")) == []


def test_topo_order_tie_breaks_by_model_id():
    graph = KnowledgeGraph(
        "tie",
        [
            money_field("x"),
            money_field("oa", FieldRole.COMPUTED),
            money_field("ob", FieldRole.COMPUTED),
        ],
        [
            BoundedCalcModel("b", "ADD", (Binding(None, ref="x"),), "ob"),
            BoundedCalcModel("a", "ADD", (Binding(None, ref="x"),), "oa"),
        ],
    )
    assert [m.id for m in topo_order(graph)] == ["a", "b"]


def test_topo_raises_on_cycle():
    graph = KnowledgeGraph(
        "cyc",
        [money_field("p", FieldRole.COMPUTED), money_field("q", FieldRole.COMPUTED)],
        [
            BoundedCalcModel("m1", "ADD", (Binding(None, ref="q"),), "p"),
            BoundedCalcModel("m2", "ADD", (Binding(None, ref="p"),), "q"),
        ],
    )
    with pytest.raises(CycleError):
        topo_order(graph)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_topo_respects_partial_order_on_random_graphs(seed):
    rng = random.Random(seed)
    graph = random_calc_graph(rng, n_inputs=4, n_models=rng.randint(0, 10))
    order = topo_order(graph)
    assert sorted(m.id for m in order) == sorted(m.id for m in graph.calc_models)
    position = {m.id: i for i, m in enumerate(order)}
    # Brute force: every producer of a consumed field must come earlier.
    for m in graph.calc_models:
        for ref in m.ref_inputs():
            for producer in graph.producers.get(ref, ()):
                assert position[producer] < position[m.id]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_dependency_cone_matches_brute_force(seed):
    rng = random.Random(seed)
    graph = random_calc_graph(rng, n_inputs=5, n_models=12)

    def brute_cone(start):
        cone, grew = set(), True
        while grew:
            grew = False
            for m in graph.calc_models:
                if m.output in cone:
                    continue
                if any(r == start or r in cone for r in m.ref_inputs()):
                    cone.add(m.output)
                    grew = True
        return cone

    for fid in graph.fields:
        assert dependency_cone(graph, fid) == brute_cone(fid)


def test_validate_never_raises_and_topo_clean_on_fixtures(mini_graph, benefit_graph):
    for g in (mini_graph, benefit_graph):
        assert validate(g) == []
        topo_order(g)


def test_arity_and_kind_diagnostics():
    graph = KnowledgeGraph(
        "bad",
        [
            FieldDecl("flag", ValueKind.BOOLEAN, FieldRole.INPUT),
            money_field("out", FieldRole.COMPUTED),
        ],
        [
            BoundedCalcModel("m1", "SUBTRACT", (Binding("minuend", ref="flag"),), "out"),
        ],
    )
    codes = {d.code for d in validate(graph)}
    assert "KG013" in codes  # arity
    assert "KG012" in codes  # boolean into numeric gist


def test_unknown_gist_and_dangling_ref_and_not_computed():
    graph = KnowledgeGraph(
        "bad2",
        [money_field("a"), money_field("b")],
        [
            BoundedCalcModel("m1", "ADDD", (Binding(None, ref="a"),), "b"),
            BoundedCalcModel("m2", "ADD", (Binding(None, ref="ghost"),), "b"),
        ],
    )
    codes = {d.code for d in validate(graph)}
    assert "KG010" in codes
    assert "KG011" in codes
    assert "KG015" in codes  # output is an input-role field


def test_missing_producer_and_default_rules():
    graph = KnowledgeGraph(
        "bad3",
        [
            money_field("lonely", FieldRole.COMPUTED),
            FieldDecl("d1", MONEY, FieldRole.INPUT, default=Value.number("1")),
            FieldDecl("t1", ValueKind.TEXT, FieldRole.INPUT),
        ],
    )
    codes = [d.code for d in validate(graph)]
    assert "KG016" in codes  # computed without producer
    assert "KG021" in codes  # default kind mismatch
    assert "KG022" in codes  # text without choices


def test_calc_fn_rules():
    graph = KnowledgeGraph(
        "fn",
        [money_field("a"), money_field("o", FieldRole.COMPUTED), money_field("o2", FieldRole.COMPUTED)],
        [
            BoundedCalcModel("m1", "CALC", (Binding(None, ref="a"),), "o"),
            BoundedCalcModel("m2", "ADD", (Binding(None, ref="a"),), "o2", fn="nope"),
        ],
    )
    codes = [d.code for d in validate(graph)]
    assert codes.count("KG017") == 2


def test_bad_field_id_flagged():
    graph = KnowledgeGraph("ids", [money_field("no spaces")])
    assert any(d.code == "KG023" for d in validate(graph))


def _benefit_like_cg(table: TruthTable | None = None) -> CompletenessGraph:
    return CompletenessGraph(
        "g",
        "n1",
        (
            ConditionNode("n1", "Residence", "eq", Value.text("CA"), "n2", "o_no"),
            ConditionNode("n2", "Age", "gt", Value.number("18"), "o_yes", "o_no"),
            OutcomeNode("o_yes", "Qualified"),
            OutcomeNode("o_no", "Disqualified"),
        ),
        table,
    )


def _cg_fields():
    return [
        FieldDecl("Age", ValueKind.NUMBER, FieldRole.INPUT),
        FieldDecl("Residence", ValueKind.TEXT, FieldRole.INPUT, enum=("CA", "NY")),
    ]


def test_derived_truth_table_enumerates_all_rows():
    table = derive_truth_table(_benefit_like_cg())
    assert len(table.columns) == 2
    assert [c.var for c in table.columns] == ["Residence", "Age"]
    assert table.as_mapping() == {
        (True, True): "Qualified",
        (True, False): "Disqualified",
        (False, True): "Disqualified",
        (False, False): "Disqualified",
    }


def test_walking_graph_reaches_each_rows_outcome(benefit_cg):
    table = effective_truth_table(benefit_cg)
    nodes = benefit_cg.node_map()
    index = {c: i for i, c in enumerate(table.columns)}
    for row in table.rows:
        nid = benefit_cg.start
        while isinstance(nodes[nid], ConditionNode):
            node = nodes[nid]
            nid = node.true_edge if row.values[index[node.condition]] else node.false_edge
        assert nodes[nid].decision == row.outcome


def test_authored_table_cross_check_passes_on_fixture(benefit_graph):
    assert validate(benefit_graph) == []


def test_authored_table_mismatch_is_flagged():
    wrong = TruthTable(
        derive_truth_table(_benefit_like_cg()).columns,
        (
            TruthRow((True, True), "Disqualified"),
            TruthRow((True, False), "Disqualified"),
            TruthRow((False, True), "Disqualified"),
            TruthRow((False, False), "Disqualified"),
        ),
    )
    graph = KnowledgeGraph("tt", _cg_fields(), completeness_graphs=[_benefit_like_cg(wrong)])
    assert any(d.code == "KG020" for d in validate(graph))


def test_authored_table_row_order_is_free():
    derived = derive_truth_table(_benefit_like_cg())
    shuffled = TruthTable(derived.columns, tuple(reversed(derived.rows)))
    graph = KnowledgeGraph("tt2", _cg_fields(), completeness_graphs=[_benefit_like_cg(shuffled)])
    assert validate(graph) == []


def test_completeness_structure_diagnostics():
    dangling = CompletenessGraph(
        "g",
        "n1",
        (
            ConditionNode("n1", "Age", "gt", Value.number("18"), "ghost", "o_no"),
            OutcomeNode("o_no", "No"),
        ),
    )
    graph = KnowledgeGraph(
        "cgbad", [FieldDecl("Age", ValueKind.NUMBER, FieldRole.INPUT)],
        completeness_graphs=[dangling],
    )
    assert any(d.code == "KG019" for d in validate(graph))


def test_condition_var_and_kind_diagnostics():
    cg = CompletenessGraph(
        "g",
        "n1",
        (
            ConditionNode("n1", "Ghost", "eq", Value.number("1"), "o", "o"),
            OutcomeNode("o", "X"),
        ),
    )
    graph = KnowledgeGraph("cgbad2", [], completeness_graphs=[cg])
    assert any(d.code == "KG011" for d in validate(graph))

    cg2 = CompletenessGraph(
        "g2",
        "n1",
        (
            ConditionNode("n1", "Residence", "lt", Value.text("CA"), "o", "o"),
            OutcomeNode("o", "X"),
        ),
    )
    graph2 = KnowledgeGraph(
        "cgbad3",
        [FieldDecl("Residence", ValueKind.TEXT, FieldRole.INPUT, enum=("CA",))],
        completeness_graphs=[cg2],
    )
    assert any(d.code == "KG012" for d in validate(graph2))


def test_unreachable_node_is_a_warning():
    cg = CompletenessGraph(
        "g",
        "n1",
        (
            ConditionNode("n1", "Age", "gt", Value.number("18"), "o_a", "o_b"),
            OutcomeNode("o_a", "A"),
            OutcomeNode("o_b", "B"),
            OutcomeNode("orphan", "C"),
        ),
    )
    graph = KnowledgeGraph(
        "warn", [FieldDecl("Age", ValueKind.NUMBER, FieldRole.INPUT)],
        completeness_graphs=[cg],
    )
    diags = validate(graph)
    assert any(d.code == "KG019" and d.severity.value == "warning" for d in diags)
    assert not any(d.severity.value == "error" for d in diags)
