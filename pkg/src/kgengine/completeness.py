"""Reasoning over completeness graphs with partial facts.

Known facts are applied to the truth table rather than walked through the
node graph: each known variable fixes the truth value of its condition
columns, rows inconsistent with those values are discarded, and the graph
is Decided as soon as every surviving row carries the same outcome. That
way a forced outcome is detected even when the still-unknown variable sits
at the root of the graph.

Question selection is a pluggable strategy; the default picks the relevant
variable minimizing the worst-case number of surviving rows, breaking ties
by ascending field id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .engine import EvalResult, FactStore
from .errors import KindMismatchError, ValueParseError
from .model import (
    CompletenessGraph,
    FieldRole,
    KnowledgeGraph,
    TruthRow,
    effective_truth_table,
)
from .values import Value, compare

FactsLike = FactStore | Mapping[str, Value]


@dataclass(frozen=True)
class CompletenessStatus:
    """Decided (one forced outcome) or Incomplete (live rows remain).

    ``relevant_vars`` lists the unknown variables that can still change
    the outcome; it is empty when decided.
    """

    decision: str | None
    live_rows: tuple[TruthRow, ...]
    relevant_vars: tuple[str, ...]

    @property
    def decided(self) -> bool:
        return self.decision is not None


def _known(facts: FactsLike) -> Mapping[str, Value]:
    mapping = facts.facts if isinstance(facts, FactStore) else facts
    return {fid: v for fid, v in mapping.items() if not v.is_unknown}


def assess(cg: CompletenessGraph, facts: FactsLike) -> CompletenessStatus:
    """Prune the truth table down to the rows consistent with known facts."""
    table = effective_truth_table(cg)
    known = _known(facts)

    fixed: dict[int, bool] = {}
    for i, cond in enumerate(table.columns):
        value = known.get(cond.var)
        if value is None:
            continue
        try:
            fixed[i] = compare(cond.op, value, cond.value)
        except ValueParseError as exc:
            raise KindMismatchError(f"condition {cond.describe()}: {exc}") from exc

    live = tuple(
        row for row in table.rows
        if all(row.values[i] == want for i, want in fixed.items())
    )
    outcomes = {row.outcome for row in live}
    if len(outcomes) == 1:
        return CompletenessStatus(next(iter(outcomes)), live, ())

    relevant: list[str] = []
    for var in sorted({c.var for c in table.columns}):
        if var in known:
            continue
        varies = any(
            len({row.values[i] for row in live}) > 1
            for i, cond in enumerate(table.columns)
            if cond.var == var
        )
        if varies:
            relevant.append(var)
    return CompletenessStatus(None, live, tuple(relevant))


QuestionStrategy = Callable[[CompletenessGraph, CompletenessStatus], str | None]


def min_worst_case_rows(cg: CompletenessGraph, status: CompletenessStatus) -> str | None:
    """Default strategy: smallest worst-case surviving row count wins."""
    if status.decided or not status.relevant_vars:
        return None
    table = effective_truth_table(cg)
    best: tuple[int, str] | None = None
    for var in status.relevant_vars:
        cols = [i for i, c in enumerate(table.columns) if c.var == var]
        patterns: dict[tuple[bool, ...], int] = {}
        for row in status.live_rows:
            key = tuple(row.values[i] for i in cols)
            patterns[key] = patterns.get(key, 0) + 1
        worst = max(patterns.values())
        if best is None or (worst, var) < best:
            best = (worst, var)
    return best[1] if best else None


def next_question(
    cg: CompletenessGraph,
    facts: FactsLike,
    strategy: QuestionStrategy = min_worst_case_rows,
) -> str | None:
    """The next variable to ask for, or None once the outcome is forced."""
    return strategy(cg, assess(cg, facts))


@dataclass(frozen=True)
class DecisionEntry:
    graph_id: str
    decision: str


@dataclass(frozen=True)
class QuestionEntry:
    graph_id: str
    next_question: str
    relevant_vars: tuple[str, ...]


@dataclass(frozen=True)
class UnknownOutput:
    """A computed field still Unknown, with the absent undefaulted inputs
    in its backward closure that explain why."""

    field: str
    missing_inputs: tuple[str, ...]


@dataclass(frozen=True)
class MissingReport:
    decisions: tuple[DecisionEntry, ...]
    questions: tuple[QuestionEntry, ...]
    unknown_outputs: tuple[UnknownOutput, ...]

    @property
    def empty(self) -> bool:
        return not self.questions and not self.unknown_outputs


def backward_missing_inputs(graph: KnowledgeGraph, store: FactStore, field_id: str) -> tuple[str, ...]:
    """Absent, undefaulted input fields in the backward closure of a field."""
    missing: set[str] = set()
    seen: set[str] = set()
    stack = [field_id]
    while stack:
        fid = stack.pop()
        if fid in seen:
            continue
        seen.add(fid)
        decl = graph.field(fid)
        if decl is None:
            continue
        if decl.role is FieldRole.INPUT:
            if fid not in store.facts and decl.default is None:
                missing.add(fid)
            continue
        producer = graph.producer_of(fid)
        if producer is not None:
            stack.extend(producer.ref_inputs())
    return tuple(sorted(missing))


def missing_report(
    graph: KnowledgeGraph,
    facts: FactStore,
    result: EvalResult,
    strategy: QuestionStrategy = min_worst_case_rows,
) -> MissingReport:
    """What is still needed: one payload unifying calc unknowns and
    completeness questions, deterministically sorted."""
    # Completeness conditions see every known value, defaults and computed
    # results included, not just raw facts.
    known = {fid: v for fid, v in result.values.items() if not v.is_unknown}

    decisions: list[DecisionEntry] = []
    questions: list[QuestionEntry] = []
    for cg in sorted(graph.completeness_graphs, key=lambda g: g.id):
        status = assess(cg, known)
        if status.decided:
            assert status.decision is not None
            decisions.append(DecisionEntry(cg.id, status.decision))
            continue
        question = strategy(cg, status)
        if question is not None:
            questions.append(QuestionEntry(cg.id, question, status.relevant_vars))

    unknown_outputs = tuple(
        UnknownOutput(fid, backward_missing_inputs(graph, facts, fid))
        for fid in sorted(result.unknown_fields)
        if (decl := graph.field(fid)) is not None and decl.role is FieldRole.COMPUTED
    )
    return MissingReport(tuple(decisions), tuple(questions), unknown_outputs)
