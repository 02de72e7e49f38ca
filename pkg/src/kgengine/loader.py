"""Definition file parsing and canonical serialization.

The on-disk format is a small strict XML dialect (documented with a full
element/attribute table in ``docs/format.md``). Strictness is deliberate:
unknown elements and attributes are errors, every diagnostic points at the
offending element's line and column, and a document that fails any model
invariant never yields a graph. ``load`` collects *all* diagnostics, parse
and semantic, instead of stopping at the first.

``save`` emits the canonical form: fields, calcs and completeness graphs
sorted by id, constants with explicit kinds, and truth tables always
materialized. ``load(save(g))`` is structurally identical to ``g``.
"""

from __future__ import annotations

import xml.parsers.expat
from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

from .diagnostics import Diagnostic, SourceLocation, error, has_errors
from .errors import CompletenessStructureError, ValueParseError
from .model import (
    Binding,
    BoundedCalcModel,
    CompletenessGraph,
    Condition,
    ConditionNode,
    FieldDecl,
    FieldRole,
    KnowledgeGraph,
    OutcomeNode,
    PREDICATE_OPS,
    TruthRow,
    TruthTable,
    derive_truth_table,
    effective_truth_table,
    validate,
)
from .values import Value, ValueKind, parse_value

FILE_EXTENSION = ".kg.xml"


class _Elem:
    """Minimal positioned element tree; built once per document."""

    __slots__ = ("tag", "attrib", "line", "column", "children")

    def __init__(self, tag: str, attrib: dict[str, str], line: int, column: int) -> None:
        self.tag = tag
        self.attrib = attrib
        self.line = line
        self.column = column
        self.children: list["_Elem"] = []

    def loc(self, filename: str) -> SourceLocation:
        return SourceLocation(filename, self.line, self.column)


@dataclass(frozen=True)
class LoadResult:
    """Outcome of ``load``: a graph iff no error diagnostics were found."""

    graph: KnowledgeGraph | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.graph is not None


def _parse_tree(text: str, filename: str, diags: list[Diagnostic]) -> _Elem | None:
    parser = xml.parsers.expat.ParserCreate()
    parser.buffer_text = True
    root: list[_Elem] = []
    stack: list[_Elem] = []

    def start(tag: str, attrs: dict[str, str]) -> None:
        elem = _Elem(tag, attrs, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(elem)
        else:
            root.append(elem)
        stack.append(elem)

    def end(tag: str) -> None:
        stack.pop()

    def chars(data: str) -> None:
        if data.strip():
            where = SourceLocation(filename, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
            diags.append(error("KG002", f"unexpected text content {data.strip()[:30]!r}", where))

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except xml.parsers.expat.ExpatError as exc:
        where = SourceLocation(filename, exc.lineno or 1, (exc.offset or 0) + 1)
        diags.append(error("KG001", f"malformed document: {xml.parsers.expat.errors.messages[exc.code]}", where))
        return None
    return root[0] if root else None


class _Parser:
    def __init__(self, filename: str) -> None:
        self.filename = filename
        self.diags: list[Diagnostic] = []
        self.locations: dict[tuple[str, str], tuple[int, int]] = {}

    def err(self, code: str, message: str, elem: _Elem) -> None:
        self.diags.append(error(code, message, elem.loc(self.filename)))

    def attrs(self, elem: _Elem, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict[str, str] | None:
        """Enforce the attribute table; None when a required one is absent."""
        attrib = elem.attrib
        for name in attrib:
            if name not in required and name not in optional:
                self.err("KG003", f"unknown attribute {name!r} on <{elem.tag}>", elem)
        ok = True
        for name in required:
            if name not in attrib:
                self.err("KG004", f"<{elem.tag}> misses required attribute {name!r}", elem)
                ok = False
        return attrib if ok else None

    def parse_field(self, elem: _Elem, fields: dict[str, FieldDecl]) -> None:
        attrs = self.attrs(elem, ("id", "kind", "role"), ("default", "label"))
        enum: list[str] = []
        for child in elem.children:
            if child.tag != "enum":
                self.err("KG002", f"unknown element <{child.tag}> inside <field>", child)
                continue
            eattrs = self.attrs(child, ("value",))
            if eattrs is None:
                continue
            if eattrs["value"] in enum:
                self.err("KG006", f"duplicate enum value {eattrs['value']!r}", child)
            else:
                enum.append(eattrs["value"])
        if attrs is None:
            return
        try:
            kind = ValueKind(attrs["kind"])
        except ValueError:
            self.err("KG005", f"unknown kind {attrs['kind']!r}", elem)
            return
        try:
            role = FieldRole(attrs["role"])
        except ValueError:
            self.err("KG005", f"unknown role {attrs['role']!r}", elem)
            return
        default: Value | None = None
        if "default" in attrs:
            try:
                default = parse_value(kind, attrs["default"], tuple(enum))
            except ValueParseError as exc:
                self.err("KG005", f"bad default for field {attrs['id']!r}: {exc}", elem)
        fid = attrs["id"]
        if fid in fields:
            self.err("KG006", f"duplicate field id {fid!r}", elem)
            return
        fields[fid] = FieldDecl(fid, kind, role, default, attrs.get("label"), tuple(enum))
        self.locations[("field", fid)] = (elem.line, elem.column)

    def parse_const(self, raw: str, kind_attr: str | None, elem: _Elem) -> Value | None:
        if kind_attr is not None:
            try:
                kind = ValueKind(kind_attr)
            except ValueError:
                self.err("KG005", f"unknown kind {kind_attr!r}", elem)
                return None
            if kind is ValueKind.TEXT:
                return Value.text(raw)
            try:
                return parse_value(kind, raw)
            except ValueParseError as exc:
                self.err("KG005", f"bad constant: {exc}", elem)
                return None
        if raw in ("true", "false"):
            return Value.boolean(raw == "true")
        try:
            return parse_value(ValueKind.NUMBER, raw)
        except ValueParseError:
            self.err("KG005", f"constant {raw!r} needs an explicit kind attribute", elem)
            return None

    def parse_calc(self, elem: _Elem, models: list[BoundedCalcModel], seen: set[str]) -> None:
        attrs = self.attrs(elem, ("id", "gist", "out"), ("fn",))
        if attrs is None:
            return
        bindings: list[Binding] = []
        broken = False
        for child in elem.children:
            if child.tag != "in":
                self.err("KG002", f"unknown element <{child.tag}> inside <calc>", child)
                continue
            cattrs = self.attrs(child, (), ("role", "ref", "const", "kind"))
            if cattrs is None:  # pragma: no cover - no required attrs
                continue
            has_ref = "ref" in cattrs
            has_const = "const" in cattrs
            if has_ref == has_const:
                self.err("KG005", "<in> needs exactly one of ref= or const=", child)
                broken = True
                continue
            if has_ref:
                if "kind" in cattrs:
                    self.err("KG005", "kind= only applies to constants", child)
                bindings.append(Binding(cattrs.get("role"), ref=cattrs["ref"]))
            else:
                const = self.parse_const(cattrs["const"], cattrs.get("kind"), child)
                if const is None:
                    broken = True
                    continue
                bindings.append(Binding(cattrs.get("role"), const=const))
        if broken:
            return
        mid = attrs["id"]
        if mid in seen:
            self.err("KG006", f"duplicate calc id {mid!r}", elem)
            return
        seen.add(mid)
        models.append(BoundedCalcModel(mid, attrs["gist"], tuple(bindings), attrs["out"], attrs.get("fn")))
        self.locations[("calc", mid)] = (elem.line, elem.column)

    def parse_completeness(
        self,
        elem: _Elem,
        fields: dict[str, FieldDecl],
        graphs: list[CompletenessGraph],
        seen: set[str],
    ) -> None:
        attrs = self.attrs(elem, ("id", "start"))
        if attrs is None:
            return
        nodes: list[ConditionNode | OutcomeNode] = []
        node_ids: set[str] = set()
        table_elem: _Elem | None = None
        for child in elem.children:
            if child.tag == "condition":
                cattrs = self.attrs(child, ("id", "var", "op", "value", "true", "false"))
                if cattrs is None:
                    continue
                if cattrs["op"] not in PREDICATE_OPS:
                    self.err("KG005", f"unknown predicate {cattrs['op']!r}", child)
                    continue
                value = self._condition_value(cattrs["var"], cattrs["value"], fields, child)
                if value is None:
                    continue
                if cattrs["id"] in node_ids:
                    self.err("KG006", f"duplicate node id {cattrs['id']!r}", child)
                    continue
                node_ids.add(cattrs["id"])
                nodes.append(ConditionNode(
                    cattrs["id"], cattrs["var"], cattrs["op"], value, cattrs["true"], cattrs["false"],
                ))
            elif child.tag == "outcome":
                oattrs = self.attrs(child, ("id", "decision"))
                if oattrs is None:
                    continue
                if oattrs["id"] in node_ids:
                    self.err("KG006", f"duplicate node id {oattrs['id']!r}", child)
                    continue
                node_ids.add(oattrs["id"])
                nodes.append(OutcomeNode(oattrs["id"], oattrs["decision"]))
            elif child.tag == "truth-table":
                if table_elem is not None:
                    self.err("KG006", "second <truth-table> in one completeness graph", child)
                    continue
                table_elem = child
            else:
                self.err("KG002", f"unknown element <{child.tag}> inside <completeness>", child)

        table: TruthTable | None = None
        if table_elem is not None:
            table = self._parse_table(table_elem, nodes)
        cid = attrs["id"]
        if cid in seen:
            self.err("KG006", f"duplicate completeness id {cid!r}", elem)
            return
        seen.add(cid)
        graphs.append(CompletenessGraph(cid, attrs["start"], tuple(nodes), table))
        self.locations[("completeness", cid)] = (elem.line, elem.column)

    def _condition_value(
        self, var: str, raw: str, fields: dict[str, FieldDecl], elem: _Elem,
    ) -> Value | None:
        decl = fields.get(var)
        if decl is not None:
            try:
                return parse_value(decl.kind, raw, decl.enum)
            except ValueParseError as exc:
                self.err("KG005", f"bad condition value: {exc}", elem)
                return None
        # Undeclared variable: best-effort parse; the validator reports the
        # dangling reference with this element's location.
        if raw in ("true", "false"):
            return Value.boolean(raw == "true")
        try:
            return parse_value(ValueKind.NUMBER, raw)
        except ValueParseError:
            return Value.text(raw)

    def _parse_table(self, elem: _Elem, nodes: list[ConditionNode | OutcomeNode]) -> TruthTable | None:
        conditions = {n.id: n.condition for n in nodes if isinstance(n, ConditionNode)}
        columns: list[str] = []
        rows: list[TruthRow] = []
        usable = True
        for child in elem.children:
            if child.tag != "row":
                self.err("KG002", f"unknown element <{child.tag}> inside <truth-table>", child)
                continue
            if not columns:
                columns = [name for name in child.attrib if name != "outcome"]
                for name in columns:
                    if name not in conditions:
                        self.err("KG003", f"row column {name!r} is not a condition node id", child)
                        usable = False
            if "outcome" not in child.attrib:
                self.err("KG004", "<row> misses required attribute 'outcome'", child)
                usable = False
                continue
            values: list[bool] = []
            for name in columns:
                raw = child.attrib.get(name)
                if raw is None:
                    self.err("KG004", f"<row> misses column {name!r}", child)
                    usable = False
                    continue
                if raw not in ("T", "F"):
                    self.err("KG005", f"row value for {name!r} must be T or F, got {raw!r}", child)
                    usable = False
                    continue
                values.append(raw == "T")
            for name in child.attrib:
                if name != "outcome" and name not in columns:
                    self.err("KG003", f"row carries unknown column {name!r}", child)
                    usable = False
            if usable and len(values) == len(columns):
                rows.append(TruthRow(tuple(values), child.attrib["outcome"]))
        if not usable or not columns:
            return None
        try:
            descriptors = tuple(conditions[name] for name in columns)
        except KeyError:
            return None
        return TruthTable(descriptors, tuple(rows))


def load(text: str, filename: str = "<string>") -> LoadResult:
    """Parse a definition document into a validated KnowledgeGraph.

    Returns the graph only when the document is both well formed and
    passes every model invariant; otherwise ``graph`` is None and the
    diagnostics list carries everything found.
    """
    p = _Parser(filename)
    tree = _parse_tree(text, filename, p.diags)
    if tree is None:
        return LoadResult(None, p.diags)
    if tree.tag != "knowledge-graph":
        p.err("KG002", f"root element must be <knowledge-graph>, got <{tree.tag}>", tree)
        return LoadResult(None, p.diags)
    root_attrs = p.attrs(tree, (), ("id", "version")) or {}
    if root_attrs.get("version", "1") != "1":
        p.err("KG005", f"unsupported version {root_attrs.get('version')!r}", tree)

    fields: dict[str, FieldDecl] = {}
    models: list[BoundedCalcModel] = []
    graphs: list[CompletenessGraph] = []
    seen_calc: set[str] = set()
    seen_cg: set[str] = set()

    field_elems: list[_Elem] = []
    calc_elems: list[_Elem] = []
    completeness_elems: list[_Elem] = []
    for section in tree.children:
        if section.tag == "fields":
            p.attrs(section, ())
            for child in section.children:
                if child.tag == "field":
                    field_elems.append(child)
                else:
                    p.err("KG002", f"unknown element <{child.tag}> inside <fields>", child)
        elif section.tag == "calcs":
            p.attrs(section, ())
            for child in section.children:
                if child.tag == "calc":
                    calc_elems.append(child)
                else:
                    p.err("KG002", f"unknown element <{child.tag}> inside <calcs>", child)
        elif section.tag == "completeness":
            completeness_elems.append(section)
        else:
            p.err("KG002", f"unknown element <{section.tag}>", section)

    for elem in field_elems:
        p.parse_field(elem, fields)
    for elem in calc_elems:
        p.parse_calc(elem, models, seen_calc)
    for elem in completeness_elems:
        p.parse_completeness(elem, fields, graphs, seen_cg)

    if has_errors(p.diags):
        return LoadResult(None, p.diags)

    graph = KnowledgeGraph(root_attrs.get("id", "kg"), fields.values(), models, graphs)

    def locator(kind: str, ident: str) -> SourceLocation:
        line, column = p.locations.get((kind, ident), (1, 1))
        return SourceLocation(filename, line, column)

    p.diags.extend(validate(graph, locator))
    if has_errors(p.diags):
        return LoadResult(None, p.diags)
    return LoadResult(graph, p.diags)


def load_file(path) -> LoadResult:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read(), str(path))


def _field_xml(f: FieldDecl) -> list[str]:
    attrs = [f"id={quoteattr(f.id)}", f"kind={quoteattr(f.kind.value)}", f"role={quoteattr(f.role.value)}"]
    if f.default is not None:
        attrs.append(f"default={quoteattr(f.default.render())}")
    if f.label is not None:
        attrs.append(f"label={quoteattr(f.label)}")
    if not f.enum:
        return [f"    <field {' '.join(attrs)}/>"]
    lines = [f"    <field {' '.join(attrs)}>"]
    lines.extend(f"      <enum value={quoteattr(v)}/>" for v in f.enum)
    lines.append("    </field>")
    return lines


def _calc_xml(m: BoundedCalcModel) -> list[str]:
    attrs = [f"id={quoteattr(m.id)}", f"gist={quoteattr(m.gist)}"]
    if m.fn is not None:
        attrs.append(f"fn={quoteattr(m.fn)}")
    attrs.append(f"out={quoteattr(m.output)}")
    lines = [f"    <calc {' '.join(attrs)}>"]
    for b in m.inputs:
        parts = []
        if b.role is not None:
            parts.append(f"role={quoteattr(b.role)}")
        if b.ref is not None:
            parts.append(f"ref={quoteattr(b.ref)}")
        else:
            assert b.const is not None and b.const.kind is not None
            parts.append(f"const={quoteattr(b.const.render())}")
            parts.append(f"kind={quoteattr(b.const.kind.value)}")
        lines.append(f"      <in {' '.join(parts)}/>")
    lines.append("    </calc>")
    return lines


def _completeness_xml(cg: CompletenessGraph) -> list[str]:
    lines = [f"  <completeness id={quoteattr(cg.id)} start={quoteattr(cg.start)}>"]
    for n in sorted(cg.nodes, key=lambda n: n.id):
        if isinstance(n, ConditionNode):
            lines.append(
                "    <condition "
                f"id={quoteattr(n.id)} var={quoteattr(n.var)} op={quoteattr(n.op)} "
                f"value={quoteattr(n.value.render())} "
                f"true={quoteattr(n.true_edge)} false={quoteattr(n.false_edge)}/>"
            )
        else:
            lines.append(f"    <outcome id={quoteattr(n.id)} decision={quoteattr(n.decision)}/>")
    try:
        table = effective_truth_table(cg)
    except CompletenessStructureError:
        table = cg.authored_table
    if table is not None:
        node_for: dict[Condition, str] = {}
        for n in sorted(cg.nodes, key=lambda n: n.id):
            if isinstance(n, ConditionNode) and n.condition not in node_for:
                node_for[n.condition] = n.id
        lines.append("    <truth-table>")
        for row in table.rows:
            cells = " ".join(
                f"{node_for[cond]}={quoteattr('T' if v else 'F')}"
                for cond, v in zip(table.columns, row.values)
            )
            lines.append(f"      <row {cells} outcome={quoteattr(row.outcome)}/>")
        lines.append("    </truth-table>")
    lines.append("  </completeness>")
    return lines


def save(graph: KnowledgeGraph) -> str:
    """Canonical document: sections sorted by id, constants with explicit
    kinds, truth tables always written out."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<knowledge-graph id={quoteattr(graph.id)} version=\"1\">",
    ]
    if graph.fields:
        lines.append("  <fields>")
        for fid in sorted(graph.fields):
            lines.extend(_field_xml(graph.fields[fid]))
        lines.append("  </fields>")
    if graph.calc_models:
        lines.append("  <calcs>")
        for m in sorted(graph.calc_models, key=lambda m: m.id):
            lines.extend(_calc_xml(m))
        lines.append("  </calcs>")
    for cg in sorted(graph.completeness_graphs, key=lambda g: g.id):
        lines.extend(_completeness_xml(cg))
    lines.append("</knowledge-graph>")
    return "\n".join(lines) + "\n"
