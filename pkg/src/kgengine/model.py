"""Core immutable domain model.

A knowledge graph couples three artifact families:

* field declarations (typed inputs and computed outputs of a form),
* bounded calc models (gist instances whose roles are bound to fields or
  constants), whose shared fields chain them into one calculation DAG,
* completeness graphs (rooted condition/outcome DAGs backed by truth
  tables) that decide the applicability of a topic from partial data.

Everything here is immutable after construction; :func:`validate` reports
every invariant violation as a diagnostic instead of raising, so authoring
tools can show all problems at once. A validated graph is safe to share
across concurrent evaluation sessions.
"""

from __future__ import annotations

import heapq
import itertools
import re
from dataclasses import dataclass, field as dc_field
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterable, Union

from .diagnostics import Diagnostic, SourceLocation, error, warning
from .errors import CompletenessStructureError, CycleError
from .gists import BUILTIN_GISTS, GistSpec
from .values import Value, ValueKind, is_numeric, kinds_comparable

FIELD_ID_RE = re.compile(r"[A-Za-z0-9_.]+\Z")

PREDICATE_OPS = ("eq", "ne", "lt", "le", "gt", "ge")
OP_SYMBOLS = {"eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}

# Enumerating a truth table doubles per condition; beyond this the graph
# must be split into smaller topics.
MAX_CONDITIONS = 16


class FieldRole(str, Enum):
    INPUT = "input"
    COMPUTED = "computed"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


@dataclass(frozen=True)
class FieldDecl:
    id: str
    kind: ValueKind
    role: FieldRole
    default: Value | None = None
    label: str | None = None
    enum: tuple[str, ...] = ()

    def display_name(self) -> str:
        return self.label if self.label else self.id


@dataclass(frozen=True)
class Binding:
    """One input slot of a calc model: a field reference or a constant."""

    role: str | None = None
    ref: str | None = None
    const: Value | None = None

    def __post_init__(self) -> None:
        if (self.ref is None) == (self.const is None):
            raise ValueError("binding needs exactly one of ref/const")


@dataclass(frozen=True)
class BoundedCalcModel:
    """A gist instance bound to concrete fields; the unit of the calc DAG."""

    id: str
    gist: str
    inputs: tuple[Binding, ...]
    output: str
    fn: str | None = None

    def ref_inputs(self) -> tuple[str, ...]:
        return tuple(b.ref for b in self.inputs if b.ref is not None)


@dataclass(frozen=True)
class Condition:
    """A predicate over one field against a constant."""

    var: str
    op: str
    value: Value

    def describe(self) -> str:
        return f"{self.var} {OP_SYMBOLS.get(self.op, self.op)} {self.value.render()}"


@dataclass(frozen=True)
class ConditionNode:
    id: str
    var: str
    op: str
    value: Value
    true_edge: str
    false_edge: str

    @property
    def condition(self) -> Condition:
        return Condition(self.var, self.op, self.value)


@dataclass(frozen=True)
class OutcomeNode:
    id: str
    decision: str


CompletenessNode = Union[ConditionNode, OutcomeNode]


@dataclass(frozen=True)
class TruthRow:
    values: tuple[bool, ...]
    outcome: str


@dataclass(frozen=True)
class TruthTable:
    columns: tuple[Condition, ...]
    rows: tuple[TruthRow, ...]

    def as_mapping(self) -> dict[tuple[bool, ...], str]:
        return {row.values: row.outcome for row in self.rows}


@dataclass(frozen=True)
class CompletenessGraph:
    """Rooted condition/outcome DAG; ``authored_table`` is the optional
    hand-written truth table cross-checked against the graph."""

    id: str
    start: str
    nodes: tuple[CompletenessNode, ...]
    authored_table: TruthTable | None = None

    def node_map(self) -> dict[str, CompletenessNode]:
        return {n.id: n for n in self.nodes}


def check_completeness_structure(cg: CompletenessGraph) -> list[str]:
    """Structural problems that make the graph unwalkable; [] when sound."""
    problems: list[str] = []
    nodes = {}
    for n in cg.nodes:
        if n.id in nodes:
            problems.append(f"duplicate node id {n.id!r}")
        nodes[n.id] = n
    if cg.start not in nodes:
        problems.append(f"start node {cg.start!r} is not declared")
        return problems
    for n in cg.nodes:
        if isinstance(n, ConditionNode):
            for edge in (n.true_edge, n.false_edge):
                if edge not in nodes:
                    problems.append(f"node {n.id!r} points at undeclared node {edge!r}")
    if problems:
        return problems

    # Cycle check via iterative DFS with an on-path marker.
    WHITE, GREY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in nodes}
    stack: list[tuple[str, bool]] = [(cg.start, False)]
    while stack:
        nid, leaving = stack.pop()
        if leaving:
            color[nid] = BLACK
            continue
        if color[nid] == GREY:
            problems.append(f"cycle through node {nid!r}")
            return problems
        if color[nid] == BLACK:
            continue
        color[nid] = GREY
        stack.append((nid, True))
        node = nodes[nid]
        if isinstance(node, ConditionNode):
            for edge in (node.false_edge, node.true_edge):
                if color[edge] == GREY:
                    problems.append(f"cycle through node {edge!r}")
                    return problems
                if color[edge] == WHITE:
                    stack.append((edge, False))
    conditions = {n.condition for n in cg.nodes if isinstance(n, ConditionNode)}
    if len(conditions) > MAX_CONDITIONS:
        problems.append(
            f"{len(conditions)} distinct conditions exceed the enumeration cap of {MAX_CONDITIONS}"
        )
    return problems


def unreachable_nodes(cg: CompletenessGraph) -> list[str]:
    nodes = cg.node_map()
    seen: set[str] = set()
    stack = [cg.start]
    while stack:
        nid = stack.pop()
        if nid in seen or nid not in nodes:
            continue
        seen.add(nid)
        node = nodes[nid]
        if isinstance(node, ConditionNode):
            stack.extend((node.true_edge, node.false_edge))
    return sorted(set(nodes) - seen)


def derive_truth_table(cg: CompletenessGraph) -> TruthTable:
    """Exhaustively enumerate the graph into its canonical truth table.

    Columns are the distinct conditions in depth-first preorder from the
    start node (true edge first); rows enumerate every combination, walking
    the graph with the row's condition outcomes.
    """
    problems = check_completeness_structure(cg)
    if problems:
        raise CompletenessStructureError(f"completeness graph {cg.id!r}: {problems[0]}")
    nodes = cg.node_map()

    columns: list[Condition] = []
    index: dict[Condition, int] = {}
    seen: set[str] = set()
    stack = [cg.start]
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        node = nodes[nid]
        if isinstance(node, ConditionNode):
            cond = node.condition
            if cond not in index:
                index[cond] = len(columns)
                columns.append(cond)
            stack.append(node.false_edge)
            stack.append(node.true_edge)

    rows: list[TruthRow] = []
    limit = len(nodes) + 1
    for assignment in itertools.product((True, False), repeat=len(columns)):
        nid = cg.start
        for _ in range(limit):
            node = nodes[nid]
            if isinstance(node, OutcomeNode):
                rows.append(TruthRow(assignment, node.decision))
                break
            nid = node.true_edge if assignment[index[node.condition]] else node.false_edge
        else:  # pragma: no cover - excluded by the cycle check
            raise CompletenessStructureError(f"walk did not terminate in {cg.id!r}")
    return TruthTable(tuple(columns), tuple(rows))


@lru_cache(maxsize=512)
def effective_truth_table(cg: CompletenessGraph) -> TruthTable:
    """The table reasoning runs against: authored when present, else derived."""
    if cg.authored_table is not None:
        return cg.authored_table
    return derive_truth_table(cg)


class KnowledgeGraph:
    """The assembled, shareable artifact.

    Indexes (producers, consumers a.k.a. the dependency index, topological
    order) are derived once; the object is treated as immutable afterwards.
    Construction does not validate; run :func:`validate` and check for
    error diagnostics before evaluating.
    """

    def __init__(
        self,
        graph_id: str = "kg",
        fields: Iterable[FieldDecl] = (),
        calc_models: Iterable[BoundedCalcModel] = (),
        completeness_graphs: Iterable[CompletenessGraph] = (),
        gists: Iterable[GistSpec] = (),
    ) -> None:
        self.id = graph_id
        self.fields: dict[str, FieldDecl] = {}
        for f in fields:
            if f.id in self.fields:
                raise ValueError(f"duplicate field id {f.id!r}")
            self.fields[f.id] = f
        self.gists: dict[str, GistSpec] = dict(BUILTIN_GISTS)
        for g in gists:
            self.gists[g.name] = g
        self.calc_models: tuple[BoundedCalcModel, ...] = tuple(calc_models)
        self.completeness_graphs: tuple[CompletenessGraph, ...] = tuple(completeness_graphs)

        self.models_by_id: dict[str, BoundedCalcModel] = {}
        producers: dict[str, list[str]] = {}
        consumers: dict[str, list[str]] = {fid: [] for fid in self.fields}
        for m in self.calc_models:
            self.models_by_id.setdefault(m.id, m)
            producers.setdefault(m.output, []).append(m.id)
            seen_refs: set[str] = set()
            for ref in m.ref_inputs():
                if ref in seen_refs:
                    continue
                seen_refs.add(ref)
                consumers.setdefault(ref, []).append(m.id)
        self.producers: dict[str, tuple[str, ...]] = {k: tuple(v) for k, v in producers.items()}
        # The dependency index: field id -> models consuming it.
        self.consumers: dict[str, tuple[str, ...]] = {k: tuple(v) for k, v in consumers.items()}
        self._topo: tuple[BoundedCalcModel, ...] | None = None

    def field(self, field_id: str) -> FieldDecl | None:
        return self.fields.get(field_id)

    def producer_of(self, field_id: str) -> BoundedCalcModel | None:
        ids = self.producers.get(field_id)
        return self.models_by_id[ids[0]] if ids else None

    @property
    def topo(self) -> tuple[BoundedCalcModel, ...]:
        if self._topo is None:
            self._topo = tuple(topo_order(self))
        return self._topo


def topo_order(graph: KnowledgeGraph) -> list[BoundedCalcModel]:
    """Calc models ordered so producers precede consumers.

    Deterministic: ready models are released in ascending id order. Raises
    CycleError when the dependency relation is cyclic.
    """
    preds: dict[str, set[str]] = {m.id: set() for m in graph.calc_models}
    succs: dict[str, list[str]] = {m.id: [] for m in graph.calc_models}
    for m in graph.calc_models:
        for ref in m.ref_inputs():
            for producer_id in graph.producers.get(ref, ()):
                if producer_id != m.id and producer_id not in preds[m.id]:
                    preds[m.id].add(producer_id)
                    succs[producer_id].append(m.id)
    ready = [mid for mid, ps in preds.items() if not ps]
    heapq.heapify(ready)
    order: list[BoundedCalcModel] = []
    remaining = {mid: len(ps) for mid, ps in preds.items()}
    while ready:
        mid = heapq.heappop(ready)
        order.append(graph.models_by_id[mid])
        for succ in succs[mid]:
            remaining[succ] -= 1
            if remaining[succ] == 0:
                heapq.heappush(ready, succ)
    if len(order) != len(graph.calc_models):
        leftover = sorted(mid for mid, n in remaining.items() if n > 0)
        fields = sorted({graph.models_by_id[mid].output for mid in leftover})
        raise CycleError(f"cyclic dependency among fields: {', '.join(fields)}")
    return order


def dependency_cone(graph: KnowledgeGraph, field_id: str) -> set[str]:
    """All computed fields transitively downstream of ``field_id``."""
    cone: set[str] = set()
    stack = [field_id]
    while stack:
        fid = stack.pop()
        for model_id in graph.consumers.get(fid, ()):
            out = graph.models_by_id[model_id].output
            if out not in cone:
                cone.add(out)
                stack.append(out)
    return cone


def _find_cycle(graph: KnowledgeGraph, candidates: set[str]) -> list[str]:
    """One concrete field cycle among ``candidates``, smallest ids first."""
    edges: dict[str, list[str]] = {f: [] for f in candidates}
    for m in graph.calc_models:
        if m.output in candidates:
            for ref in m.ref_inputs():
                if ref in candidates:
                    edges[m.output].append(ref)
    for out in edges:
        edges[out].sort()
    for start in sorted(candidates):
        path: list[str] = []
        on_path: set[str] = set()

        def dfs(fid: str) -> list[str] | None:
            if fid in on_path:
                return path[path.index(fid):] + [fid]
            path.append(fid)
            on_path.add(fid)
            for nxt in edges.get(fid, ()):
                found = dfs(nxt)
                if found:
                    return found
            path.pop()
            on_path.remove(fid)
            return None

        cycle = dfs(start)
        if cycle:
            return cycle
    return sorted(candidates)  # pragma: no cover - defensive


Locator = Callable[[str, str], SourceLocation]


def _default_locator(kind: str, ident: str) -> SourceLocation:
    return SourceLocation("<memory>", 1, 1)


_NUMERIC_SEMS = frozenset(("add", "subtract", "nonneg_subtract", "multiply", "min", "max"))


def validate(graph: KnowledgeGraph, locator: Locator | None = None) -> list[Diagnostic]:
    """Check every model invariant, reporting all violations.

    Returns an empty list iff the graph is well formed. ``locator`` maps
    ("field" | "calc" | "completeness", id) to a source location so loader
    diagnostics point into the definition file. Locations are resolved
    only for offending elements; clean graphs validate in one linear pass.
    """
    loc = locator or _default_locator
    out: list[Diagnostic] = []

    for f in graph.fields.values():
        if not FIELD_ID_RE.match(f.id):
            out.append(error("KG023", f"field id {f.id!r} contains illegal characters", loc("field", f.id)))
        if f.kind is ValueKind.TEXT:
            if not f.enum:
                out.append(error("KG022", f"text field {f.id!r} declares no choices", loc("field", f.id)))
        elif f.enum:
            out.append(error("KG022", f"field {f.id!r} is not text but declares choices", loc("field", f.id)))
        if f.default is not None:
            if f.role is not FieldRole.INPUT:
                out.append(error("KG021", f"computed field {f.id!r} cannot carry a default", loc("field", f.id)))
            elif f.default.is_unknown:
                out.append(error("KG021", f"default for {f.id!r} cannot be unknown", loc("field", f.id)))
            elif f.default.kind is not f.kind:
                out.append(error(
                    "KG021",
                    f"default for {f.id!r} is {f.default.kind} but the field is {f.kind.value}",
                    loc("field", f.id),
                ))
            elif f.kind is ValueKind.TEXT and f.default.raw not in f.enum:
                out.append(error("KG021", f"default for {f.id!r} is outside its choices", loc("field", f.id)))

    seen_model_ids: set[str] = set()
    for m in graph.calc_models:
        if m.id in seen_model_ids:
            out.append(error("KG006", f"duplicate calc model id {m.id!r}", loc("calc", m.id)))
        seen_model_ids.add(m.id)

    fields = graph.fields
    for m in graph.calc_models:
        spec = graph.gists.get(m.gist)
        if spec is None:
            out.append(error("KG010", f"unknown gist {m.gist!r} in model {m.id!r}", loc("calc", m.id)))
            continue
        if not spec.arity_ok(len(m.inputs)):
            want = (
                f"exactly {spec.min_inputs}"
                if spec.max_inputs == spec.min_inputs
                else f"at least {spec.min_inputs}"
            )
            out.append(error(
                "KG013",
                f"model {m.id!r} binds {len(m.inputs)} inputs but {spec.name} takes {want}",
                loc("calc", m.id),
            ))
        if spec.semantics == "calc":
            if not m.fn:
                out.append(error("KG017", f"CALC model {m.id!r} names no host function", loc("calc", m.id)))
        elif m.fn:
            out.append(error(
                "KG017", f"model {m.id!r} carries fn= but {spec.name} is not CALC", loc("calc", m.id),
            ))

        numeric = spec.semantics in _NUMERIC_SEMS
        roles = spec.roles
        input_kinds: list[ValueKind | None] = []
        for i, b in enumerate(m.inputs):
            if b.role is not None:
                expected = roles[i] if i < len(roles) else None
                if not roles:
                    out.append(error(
                        "KG017",
                        f"model {m.id!r} input {i + 1} carries a role but {spec.name} is variadic",
                        loc("calc", m.id),
                    ))
                elif b.role != expected:
                    out.append(error(
                        "KG017",
                        f"model {m.id!r} input {i + 1} has role {b.role!r}, expected {expected!r}",
                        loc("calc", m.id),
                    ))
            if b.ref is not None:
                decl = fields.get(b.ref)
                if decl is None:
                    out.append(error(
                        "KG011", f"model {m.id!r} references undeclared field {b.ref!r}", loc("calc", m.id),
                    ))
                    input_kinds.append(None)
                else:
                    input_kinds.append(decl.kind)
            else:
                assert b.const is not None
                input_kinds.append(b.const.kind)

        out_decl = fields.get(m.output)
        if out_decl is None:
            out.append(error(
                "KG011", f"model {m.id!r} outputs undeclared field {m.output!r}", loc("calc", m.id),
            ))
        elif out_decl.role is not FieldRole.COMPUTED:
            out.append(error(
                "KG015", f"model {m.id!r} outputs {m.output!r} which is not computed", loc("calc", m.id),
            ))

        out_kind = out_decl.kind if out_decl else None
        if numeric:
            for i, k in enumerate(input_kinds):
                if k is not None and not is_numeric(k):
                    out.append(error(
                        "KG012",
                        f"model {m.id!r} input {i + 1} is {k.value}, {spec.name} needs money/number",
                        loc("calc", m.id),
                    ))
            if out_kind is not None and not is_numeric(out_kind):
                out.append(error(
                    "KG012",
                    f"model {m.id!r} output {m.output!r} is {out_kind.value}, {spec.name} produces money/number",
                    loc("calc", m.id),
                ))
        elif spec.semantics == "conditional" and len(input_kinds) == 3:
            if input_kinds[0] is not None and input_kinds[0] is not ValueKind.BOOLEAN:
                out.append(error("KG012", f"model {m.id!r} condition input must be boolean", loc("calc", m.id)))
            for branch, k in (("then", input_kinds[1]), ("else", input_kinds[2])):
                if k is None or out_kind is None:
                    continue
                if not kinds_comparable(k, out_kind):
                    out.append(error(
                        "KG012",
                        f"model {m.id!r} {branch} branch is {k.value} but output is {out_kind.value}",
                        loc("calc", m.id),
                    ))

    by_output: dict[str, list[str]] = {}
    for m in graph.calc_models:
        by_output.setdefault(m.output, []).append(m.id)
    for fid, model_ids in sorted(by_output.items()):
        if len(model_ids) > 1:
            out.append(error(
                "KG014",
                f"field {fid!r} is produced by {len(model_ids)} models: {', '.join(sorted(model_ids))}",
                loc("calc", sorted(model_ids)[0]),
            ))
    for f in graph.fields.values():
        if f.role is FieldRole.COMPUTED and f.id not in by_output:
            out.append(error("KG016", f"computed field {f.id!r} has no producing model", loc("field", f.id)))

    try:
        graph.topo  # noqa: B018 - shares the cached order with evaluation
    except CycleError:
        candidates = _cycle_candidates(graph)
        cycle = _find_cycle(graph, candidates)
        producer_ids = graph.producers.get(cycle[0], ("",))
        out.append(error(
            "KG018",
            "cyclic dependency: " + " -> ".join(cycle),
            loc("calc", producer_ids[0]),
        ))

    for g in graph.gists.values():
        for placeholder in re.findall(r"\{([^{}]+)\}", g.template):
            if placeholder in ("out", "out_val", "inputs"):
                continue
            m2 = re.match(r"(in|in_val):([A-Za-z_][A-Za-z0-9_]*)\Z", placeholder)
            if not m2 or m2.group(2) not in g.roles:
                out.append(error(
                    "KG024",
                    f"gist {g.name!r} template uses undeclared placeholder {{{placeholder}}}",
                ))

    seen_cg_ids: set[str] = set()
    for cg in graph.completeness_graphs:
        where = loc("completeness", cg.id)
        if cg.id in seen_cg_ids:
            out.append(error("KG006", f"duplicate completeness graph id {cg.id!r}", where))
        seen_cg_ids.add(cg.id)
        problems = check_completeness_structure(cg)
        for p in problems:
            out.append(error("KG019", f"completeness graph {cg.id!r}: {p}", where))
        for n in cg.nodes:
            if isinstance(n, ConditionNode):
                decl = graph.field(n.var)
                if decl is None:
                    out.append(error(
                        "KG011", f"condition {n.id!r} tests undeclared field {n.var!r}", where,
                    ))
                    continue
                if n.value.kind is None or not kinds_comparable(decl.kind, n.value.kind):
                    got = n.value.kind.value if n.value.kind else "unknown"
                    out.append(error(
                        "KG012",
                        f"condition {n.id!r} compares {decl.kind.value} field {n.var!r} with {got}",
                        where,
                    ))
                elif n.op not in ("eq", "ne") and not is_numeric(decl.kind):
                    out.append(error(
                        "KG012",
                        f"condition {n.id!r} uses ordered predicate on {decl.kind.value} field {n.var!r}",
                        where,
                    ))
                elif decl.kind is ValueKind.TEXT and n.value.raw not in decl.enum:
                    out.append(error(
                        "KG022",
                        f"condition {n.id!r} compares {n.var!r} with undeclared choice {n.value.raw!r}",
                        where,
                    ))
        for nid in unreachable_nodes(cg):
            out.append(warning("KG019", f"node {nid!r} is unreachable from start in {cg.id!r}", where))
        if not problems and cg.authored_table is not None:
            derived = derive_truth_table(CompletenessGraph(cg.id, cg.start, cg.nodes, None))
            out.extend(_check_table(cg, derived, where))

    return out


def _cycle_candidates(graph: KnowledgeGraph) -> set[str]:
    """Computed fields that belong to some dependency cycle."""
    return {
        m.output
        for m in graph.calc_models
        if m.output in dependency_cone(graph, m.output)
    }


def _check_table(cg: CompletenessGraph, derived: TruthTable, where: SourceLocation) -> list[Diagnostic]:
    """Cross-check an authored truth table against the derived enumeration."""
    authored = cg.authored_table
    assert authored is not None
    out: list[Diagnostic] = []
    if sorted(authored.columns, key=lambda c: (c.var, c.op, c.value.render())) != sorted(
        derived.columns, key=lambda c: (c.var, c.op, c.value.render())
    ):
        out.append(error(
            "KG020",
            f"truth table of {cg.id!r} declares different conditions than the graph",
            where,
        ))
        return out
    # Align authored column order onto the derived order before comparing rows.
    col_index = {c: i for i, c in enumerate(authored.columns)}
    perm = [col_index[c] for c in derived.columns]
    remapped: dict[tuple[bool, ...], str] = {}
    for row in authored.rows:
        if len(row.values) != len(authored.columns):
            out.append(error("KG020", f"truth table row in {cg.id!r} has wrong width", where))
            return out
        key = tuple(row.values[perm[i]] for i in range(len(perm)))
        if key in remapped and remapped[key] != row.outcome:
            out.append(error(
                "KG020",
                f"truth table of {cg.id!r} lists conflicting outcomes for one combination",
                where,
            ))
            return out
        remapped[key] = row.outcome
    want = derived.as_mapping()
    if remapped != want:
        missing = sorted(set(want) - set(remapped))
        extra = sorted(set(remapped) - set(want))
        wrong = sorted(k for k in set(want) & set(remapped) if want[k] != remapped[k])
        detail: list[str] = []
        if missing:
            detail.append(f"{len(missing)} missing rows")
        if extra:
            detail.append(f"{len(extra)} extra rows")
        if wrong:
            first = wrong[0]
            detail.append(
                "row "
                + "/".join("T" if v else "F" for v in first)
                + f" walks to {want[first]!r} but the table says {remapped[first]!r}"
            )
        out.append(error(
            "KG020",
            f"truth table of {cg.id!r} disagrees with the graph: " + "; ".join(detail),
            where,
        ))
    return out


def structurally_equal(a: KnowledgeGraph, b: KnowledgeGraph) -> bool:
    """Identity up to canonical ordering of fields, models and graphs."""
    if a.id != b.id or a.fields != b.fields:
        return False
    if sorted(a.calc_models, key=lambda m: m.id) != sorted(b.calc_models, key=lambda m: m.id):
        return False
    ca = sorted(a.completeness_graphs, key=lambda g: g.id)
    cb = sorted(b.completeness_graphs, key=lambda g: g.id)
    if len(ca) != len(cb):
        return False
    for ga, gb in zip(ca, cb):
        if ga.id != gb.id or ga.start != gb.start:
            return False
        if sorted(ga.nodes, key=lambda n: n.id) != sorted(gb.nodes, key=lambda n: n.id):
            return False
        try:
            if derive_truth_table(ga) != derive_truth_table(gb):
                return False
        except CompletenessStructureError:
            if ga.authored_table != gb.authored_table:
                return False
    return True
