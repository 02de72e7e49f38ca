"""Instantiates a knowledge graph against one session's facts.

The evaluation contract is incremental: storing a fact eagerly marks the
dependency cone of the touched field dirty (every computed field
transitively downstream), and :func:`recompute` then executes exactly the
models whose output is dirty, in topological order. Facts may be batched
between recomputes; retracting a fact dirties the same cone.

Unknown propagates strictly: a model whose bound inputs include an Unknown
(after per-field defaults) produces Unknown. Blank-means-zero form lines
are expressed with declared defaults, not by treating absence as zero.

Run-time model failures (a host CALC function dividing by zero, a text
result outside its field's choices) are recorded on the result, the output
becomes Unknown, and evaluation continues downstream. Because of that, a
graph using defaults together with fallible CALC functions can demote a
previously known output back to Unknown when a new fact arrives; built-in
arithmetic gists never fail after validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from decimal import localcontext
from typing import Mapping

from .errors import KindMismatchError, NotAnInputError, UnknownFieldError, ValueParseError
from .gists import EVAL_CONTEXT, GistEvalError, HostFunction, Raw, apply_gist
from .model import FieldRole, KnowledgeGraph, dependency_cone
from .values import UNKNOWN, Value, ValueKind, coerce_raw


class Absent:
    """Marker for fact retraction in :func:`set_fact`."""

    def __repr__(self) -> str:  # pragma: no cover - trivial
        return "ABSENT"


ABSENT = Absent()


@dataclass
class FactStore:
    """Partial map of input field ids to values for one session.

    Absence of an entry encodes Unknown; stored values are never the
    Unknown singleton. The revision increases on every store mutation.
    """

    facts: dict[str, Value] = dc_field(default_factory=dict)
    revision: int = 0


@dataclass
class EvalState:
    """Mutable evaluation bookkeeping paired with one FactStore.

    ``values`` mirrors every declared field (inputs resolved through facts
    and defaults, computed fields as last evaluated) and is maintained
    incrementally; results snapshot it. Use :meth:`fresh` to create a
    state; a blank state initializes itself on first use.
    """

    values: dict[str, Value] = dc_field(default_factory=dict)
    unknown: set[str] = dc_field(default_factory=set)
    computed: dict[str, Value] = dc_field(default_factory=dict)
    dirty: set[str] = dc_field(default_factory=set)
    eval_count: dict[str, int] = dc_field(default_factory=dict)
    revision: int = 0

    @classmethod
    def fresh(cls, graph: KnowledgeGraph) -> "EvalState":
        """A state with every computed field pending evaluation."""
        dirty = {f.id for f in graph.fields.values() if f.role is FieldRole.COMPUTED}
        return cls(dirty=dirty)


@dataclass(frozen=True)
class EvalError:
    model_id: str
    message: str


@dataclass(frozen=True)
class EvalResult:
    """Immutable snapshot of every field's value after a recompute."""

    values: dict[str, Value]
    unknown_fields: frozenset[str]
    errors: tuple[EvalError, ...]
    revision: int

    def to_wire(self) -> dict:
        """JSON-ready canonical form (decimal strings, sorted content)."""
        wire_values = {fid: value_to_wire(v) for fid, v in sorted(self.values.items())}
        return {
            "errors": [{"message": e.message, "model": e.model_id} for e in self.errors],
            "revision": self.revision,
            "unknown": sorted(self.unknown_fields),
            "values": wire_values,
        }


def value_to_wire(v: Value) -> str | bool | None:
    """Money/number cross the wire as decimal strings, never floats."""
    if v.is_unknown:
        return None
    if isinstance(v.raw, bool):
        return v.raw
    return v.render()


def input_value(graph: KnowledgeGraph, store: FactStore, field_id: str) -> Value:
    """Current value of an input field: fact, else default, else Unknown."""
    fact = store.facts.get(field_id)
    if fact is not None:
        return fact
    decl = graph.fields[field_id]
    if decl.default is not None:
        return decl.default
    return UNKNOWN


def _ensure_initialized(graph: KnowledgeGraph, store: FactStore, state: EvalState) -> None:
    if len(state.values) == len(graph.fields):
        return
    values: dict[str, Value] = {}
    unknown: set[str] = set()
    dirty_extra: set[str] = set()
    for fid, decl in graph.fields.items():
        if decl.role is FieldRole.INPUT:
            v = input_value(graph, store, fid)
        else:
            v = state.computed.get(fid, UNKNOWN)
            dirty_extra.add(fid)
        values[fid] = v
        if v.is_unknown:
            unknown.add(fid)
    state.values = values
    state.unknown = unknown
    state.dirty |= dirty_extra


def set_fact(
    graph: KnowledgeGraph,
    store: FactStore,
    state: EvalState,
    field_id: str,
    value: Value | Absent,
) -> None:
    """Store or retract one input fact and dirty its dependency cone."""
    decl = graph.field(field_id)
    if decl is None:
        raise UnknownFieldError(f"field {field_id!r} is not declared")
    if decl.role is not FieldRole.INPUT:
        raise NotAnInputError(f"field {field_id!r} is computed; facts go to inputs only")
    if isinstance(value, Absent):
        store.facts.pop(field_id, None)
    else:
        if value.is_unknown:
            raise KindMismatchError(f"cannot store unknown into {field_id!r}; retract instead")
        if value.kind is not decl.kind:
            raise KindMismatchError(
                f"field {field_id!r} is {decl.kind.value}, got {value.kind.value}"
            )
        if decl.kind is ValueKind.TEXT and value.raw not in decl.enum:
            raise KindMismatchError(
                f"{value.raw!r} is not one of the declared choices for {field_id!r}"
            )
        store.facts[field_id] = value
    store.revision += 1
    _ensure_initialized(graph, store, state)
    current = input_value(graph, store, field_id)
    state.values[field_id] = current
    if current.is_unknown:
        state.unknown.add(field_id)
    else:
        state.unknown.discard(field_id)
    state.dirty |= dependency_cone(graph, field_id)


def recompute(
    graph: KnowledgeGraph,
    store: FactStore,
    state: EvalState,
    host: Mapping[str, HostFunction] | None = None,
) -> EvalResult:
    """Execute exactly the models whose output is dirty, in order.

    Fields outside the dirty cones keep their previous values. Errors are
    per-model and reported for this run only.
    """
    _ensure_initialized(graph, store, state)
    errors: list[EvalError] = []
    dirty = state.dirty
    if dirty:
        values = state.values
        unknown = state.unknown
        computed = state.computed
        counts = state.eval_count
        gists = graph.gists
        fields = graph.fields
        with localcontext(EVAL_CONTEXT):
            for model in graph.topo:
                out = model.output
                if out not in dirty:
                    continue
                args: list[Raw] = []
                for binding in model.inputs:
                    if binding.ref is not None:
                        v = values[binding.ref]
                    else:
                        v = binding.const  # type: ignore[assignment]
                    if v.kind is None:
                        args = None  # type: ignore[assignment]
                        break
                    args.append(v.raw)  # type: ignore[arg-type]
                if args is None:
                    out_value = UNKNOWN
                else:
                    out_decl = fields[out]
                    try:
                        raw = apply_gist(gists[model.gist], args, model.fn, host)
                        out_value = coerce_raw(raw, out_decl.kind, out_decl.enum)
                    except (GistEvalError, ValueParseError) as exc:
                        out_value = UNKNOWN
                        errors.append(EvalError(model.id, str(exc)))
                computed[out] = out_value
                values[out] = out_value
                if out_value.is_unknown:
                    unknown.add(out)
                else:
                    unknown.discard(out)
                counts[model.id] = counts.get(model.id, 0) + 1
        state.dirty = set()
    state.revision = store.revision
    return EvalResult(dict(state.values), frozenset(state.unknown), tuple(errors), store.revision)


def full_eval(
    graph: KnowledgeGraph,
    store: FactStore,
    host: Mapping[str, HostFunction] | None = None,
) -> EvalResult:
    """From-scratch baseline: evaluate every model once, in order."""
    return recompute(graph, store, EvalState.fresh(graph), host)
