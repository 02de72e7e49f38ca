from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))

from kgengine.engine import EvalState, FactStore, recompute, set_fact
from kgengine.loader import load_file
from kgengine.values import parse_value

FIXTURES = TESTS_DIR.parent / "fixtures"


@pytest.fixture(scope="session")
def mini_graph():
    result = load_file(FIXTURES / "f1040_mini.kg.xml")
    assert result.graph is not None, result.diagnostics
    return result.graph


@pytest.fixture(scope="session")
def benefit_graph():
    result = load_file(FIXTURES / "benefit_eligibility.kg.xml")
    assert result.graph is not None, result.diagnostics
    return result.graph


@pytest.fixture(scope="session")
def benefit_cg(benefit_graph):
    return benefit_graph.completeness_graphs[0]


def eval_with_facts(graph, facts: dict[str, str], host=None):
    """Apply textual facts to a fresh session and recompute once."""
    store, state = FactStore(), EvalState.fresh(graph)
    for fid, raw in facts.items():
        decl = graph.fields[fid]
        set_fact(graph, store, state, fid, parse_value(decl.kind, raw, decl.enum))
    result = recompute(graph, store, state, host)
    return store, state, result


MINI_FACTS = {
    "L16": "400.00",
    "L17": "500.00",
    "L18a": "100.00",
    "L18b": "0.00",
    "L18c": "0.00",
    "L18d": "0.00",
}
