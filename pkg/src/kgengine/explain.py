"""Explain Why: backward-chained explanation trees.

For a computed field, find the model producing it, render that gist's
explanation template with live values, and recurse into the model's field
inputs down to the requested depth. Input fields terminate chains and
render as entered facts or applied defaults. The traversal is read-only
over an evaluation snapshot, so explaining never perturbs the engine.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .engine import EvalResult, FactStore
from .errors import UnknownFieldError
from .model import Binding, BoundedCalcModel, FieldRole, KnowledgeGraph
from .values import Value

_PLACEHOLDER = re.compile(r"\{(out|out_val|inputs)\}|\{(in|in_val):([A-Za-z_][A-Za-z0-9_]*)\}")

INPUT_FACT = "input-fact"
DEFAULTED = "default"

_INPUT_TEXTS = {
    INPUT_FACT: "{out} ({out_val}) is a value you entered",
    DEFAULTED: "{out} ({out_val}) is the default when left blank",
}
_PENDING_TEXT = "{out} ({out_val}) has not been provided yet"


@dataclass(frozen=True)
class ExplanationNode:
    """One level of the drill-down tree."""

    field: str
    value: Value
    text: str
    gist: str
    children: tuple["ExplanationNode", ...]
    depth: int


def _display(graph: KnowledgeGraph, binding: Binding) -> str:
    if binding.const is not None:
        return binding.const.render()
    assert binding.ref is not None
    decl = graph.field(binding.ref)
    return decl.display_name() if decl else binding.ref


def _render(graph: KnowledgeGraph, result: EvalResult, model: BoundedCalcModel, out_value: Value) -> str:
    spec = graph.gists[model.gist]
    by_role = {b.role: b for b in model.inputs if b.role is not None}
    if spec.roles:
        for role, b in zip(spec.roles, model.inputs):
            by_role.setdefault(role, b)

    def binding_value(b: Binding) -> Value:
        if b.const is not None:
            return b.const
        assert b.ref is not None
        return result.values.get(b.ref, Value(None))

    def sub(m: re.Match) -> str:
        simple, kind, role = m.group(1), m.group(2), m.group(3)
        if simple == "out":
            decl = graph.field(model.output)
            return decl.display_name() if decl else model.output
        if simple == "out_val":
            return out_value.render()
        if simple == "inputs":
            return ", ".join(
                f"{_display(graph, b)} ({binding_value(b).render()})" for b in model.inputs
            )
        b = by_role.get(role)
        if b is None:
            return m.group(0)
        return _display(graph, b) if kind == "in" else binding_value(b).render()

    return _PLACEHOLDER.sub(sub, spec.template)


def explain(
    graph: KnowledgeGraph,
    result: EvalResult,
    store: FactStore,
    field_id: str,
    depth: int | None = 1,
) -> ExplanationNode:
    """Explanation tree rooted at ``field_id``, expanded ``depth`` levels.

    ``depth=None`` expands the full backward closure (finite: the graph is
    acyclic). Nodes past the depth limit keep correct values but carry no
    children.
    """
    if graph.field(field_id) is None:
        raise UnknownFieldError(f"field {field_id!r} is not declared")
    return _build(graph, result, store, field_id, 0, depth)


def _build(
    graph: KnowledgeGraph,
    result: EvalResult,
    store: FactStore,
    field_id: str,
    level: int,
    depth: int | None,
) -> ExplanationNode:
    decl = graph.fields[field_id]
    value = result.values.get(field_id, Value(None))
    name = decl.display_name()

    if decl.role is FieldRole.INPUT:
        if field_id in store.facts:
            gist, template = INPUT_FACT, _INPUT_TEXTS[INPUT_FACT]
        elif decl.default is not None:
            gist, template = DEFAULTED, _INPUT_TEXTS[DEFAULTED]
        else:
            gist, template = INPUT_FACT, _PENDING_TEXT
        text = template.format(out=name, out_val=value.render())
        return ExplanationNode(field_id, value, text, gist, (), level)

    model = graph.producer_of(field_id)
    if model is None:
        text = f"{name} ({value.render()}) has no producing model"
        return ExplanationNode(field_id, value, text, "computed", (), level)

    children: tuple[ExplanationNode, ...] = ()
    if depth is None or level < depth:
        children = tuple(
            _build(graph, result, store, b.ref, level + 1, depth)
            for b in model.inputs
            if b.ref is not None
        )
    text = _render(graph, result, model, value)
    return ExplanationNode(field_id, value, text, model.gist, children, level)


def explain_path(
    graph: KnowledgeGraph,
    result: EvalResult,
    store: FactStore,
    field_id: str,
) -> list[ExplanationNode]:
    """Pre-order flattening of the fully expanded tree (chat-style UIs)."""
    root = explain(graph, result, store, field_id, depth=None)
    out: list[ExplanationNode] = []
    stack = [root]
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(reversed(node.children))
    return out
