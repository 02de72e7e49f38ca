"""Rule-based compilation of form-line instructions into calc models.

The pipeline is deliberately deterministic: extract domain terms from an
instruction sentence (line references, operation keywords from a lexicon,
constants), then pattern-match the terms against the gist registry and
bind operands into a bounded calc model. Lines that do not carry a
recognizable calculation are data, not errors; they surface as unmatched
outcomes with a reason from a fixed registry, and the automation rate is
reported over calculation-bearing lines only.

The keyword lexicon and the gist pattern table live in ``patterns.json``
next to this module, so wiring a new phrasing to an existing bind policy
needs no code change. Operand binding itself (operand order, the
subtract-from swap, the conditional-excess consistency check) is code,
keyed by the pattern's ``bind`` name.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from importlib import resources
from typing import Iterable, Mapping

from .errors import KnowledgeGraphError
from .gists import BUILTIN_GISTS, GistSpec
from .model import Binding, BoundedCalcModel, FieldDecl, FieldRole, KnowledgeGraph
from .values import Value, ValueKind, is_numeric

# Unmatched reasons form a closed registry so reports stay machine-checkable.
NO_OPERATION = "no operation term"
UNKNOWN_OPERATION = "unknown operation"
AMBIGUOUS_OPERANDS = "ambiguous operands"
UNRESOLVED_REF = "unresolved line reference"
UNRESOLVED_OUTPUT = "unresolved output field"
INCOMPATIBLE_KINDS = "incompatible field kinds"
DUPLICATE_OUTPUT = "duplicate output"

MAX_RANGE_SPAN = 100


class CorpusFormatError(KnowledgeGraphError):
    """The instruction corpus file is not valid tab-separated records."""


@dataclass(frozen=True)
class InstructionLine:
    form: str
    line_id: str
    text: str


@dataclass(frozen=True)
class OpTerm:
    category: str
    phrase: str
    pos: int


@dataclass(frozen=True)
class Operand:
    pos: int
    ref: str | None = None
    const: Value | None = None


@dataclass(frozen=True)
class TermSet:
    """Atomic domain terms extracted from one instruction line."""

    form: str
    line_id: str
    output_field: str
    op_terms: tuple[OpTerm, ...]
    operands: tuple[Operand, ...]
    range_refs: tuple[tuple[str, str], ...]
    from_positions: tuple[int, ...]

    @property
    def operation_terms(self) -> tuple[str, ...]:
        return tuple(t.phrase for t in self.op_terms)

    @property
    def input_refs(self) -> tuple[str, ...]:
        return tuple(o.ref for o in self.operands if o.ref is not None)

    @property
    def constants(self) -> tuple[Value, ...]:
        return tuple(o.const for o in self.operands if o.const is not None)


@dataclass(frozen=True)
class Unmatched:
    form: str
    line_id: str
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class Matched:
    form: str
    line_id: str
    model: BoundedCalcModel
    gist: str
    confidence: str


CompileOutcome = Matched | Unmatched


def _load_patterns() -> dict:
    with resources.files("kgengine").joinpath("patterns.json").open(encoding="utf-8") as fh:
        return json.load(fh)


_PATTERNS: dict | None = None


def default_patterns() -> dict:
    global _PATTERNS
    if _PATTERNS is None:
        _PATTERNS = _load_patterns()
    return _PATTERNS


_LINE_TOKEN = re.compile(r"(\d+)([a-z]?)\Z")
_CROSS_SCHEDULE = re.compile(r"\bschedule\s+([0-9a-z]+)\s*,\s*line\s+(\d+[a-z]?)\b", re.I)
_CROSS_FORM = re.compile(r"\bform\s+([0-9a-z-]+)\s*,\s*line\s+(\d+[a-z]?)\b", re.I)
_RANGE = re.compile(r"\blines\s+(\d+[a-z]?)\s+through\s+(\d+[a-z]?)\b", re.I)
_LIST_SEP_RX = r"\s*,\s*(?:(?:and|or)\s+)?|\s+(?:and|or)\s+"
_LIST = re.compile(r"\blines\s+(\d+[a-z]?(?:(?:" + _LIST_SEP_RX + r")\d+[a-z]?)+)\b", re.I)
_LIST_SEP = re.compile(_LIST_SEP_RX, re.I)
_SINGLE = re.compile(r"\bline\s+(\d+[a-z]?)\b", re.I)
_DOLLARS = re.compile(r"\$\s*([0-9][0-9,]*(?:\.\d+)?)")
_PERCENT = re.compile(r"\b(\d+(?:\.\d+)?)\s*%")
_DECIMAL = re.compile(r"\b\d+\.\d+\b")
_BY_INT = re.compile(r"\bby\s+(\d+)\b", re.I)
_FROM = re.compile(r"\bfrom\b", re.I)


def _norm_form(token: str) -> str:
    return re.sub(r"[^0-9A-Za-z]", "", token).upper()


def _resolve_line(form: str, line_token: str, fields: Mapping[str, FieldDecl]) -> str | None:
    for candidate in (f"L{line_token}", f"{_norm_form(form)}.L{line_token}"):
        if candidate in fields:
            return candidate
    return None


def _expand_range(
    form: str, frm: str, to: str, fields: Mapping[str, FieldDecl],
) -> list[str] | None:
    m1, m2 = _LINE_TOKEN.match(frm), _LINE_TOKEN.match(to)
    if not m1 or not m2:
        return None
    n1, a1 = int(m1.group(1)), m1.group(2)
    n2, a2 = int(m2.group(1)), m2.group(2)
    tokens: list[str] = []
    if a1 and a2 and n1 == n2:
        if ord(a2) < ord(a1) or ord(a2) - ord(a1) > MAX_RANGE_SPAN:
            return None
        tokens = [f"{n1}{chr(c)}" for c in range(ord(a1), ord(a2) + 1)]
    elif not a1 and not a2:
        if n2 < n1 or n2 - n1 > MAX_RANGE_SPAN:
            return None
        tokens = [str(n) for n in range(n1, n2 + 1)]
    else:
        return None
    out: list[str] = []
    for token in tokens:
        resolved = _resolve_line(form, token, fields)
        if resolved is None:
            return None
        out.append(resolved)
    return out


def _mask(text: str, span: tuple[int, int]) -> str:
    return text[: span[0]] + " " * (span[1] - span[0]) + text[span[1]:]


def extract_terms(
    line: InstructionLine,
    fields: Mapping[str, FieldDecl],
    patterns: dict | None = None,
) -> TermSet | Unmatched:
    """Deterministic term extraction for one instruction line.

    Finds operation keywords, line references (single, lists, ranges,
    cross-form), and constants; resolves every reference against the
    declared fields. The line's own id becomes the output field.
    """
    table = patterns or default_patterns()
    text = line.text
    lowered = text.lower()

    ops: list[OpTerm] = []
    for category, phrases in table["operation_terms"].items():
        for phrase in phrases:
            for m in re.finditer(r"(?<![a-z])" + re.escape(phrase) + r"(?![a-z])", lowered):
                ops.append(OpTerm(category, phrase, m.start()))
    ops.sort(key=lambda t: (t.pos, t.phrase))
    if not ops:
        return Unmatched(line.form, line.line_id, NO_OPERATION)

    output = _resolve_line(line.form, line.line_id, fields)
    if output is None:
        return Unmatched(
            line.form, line.line_id, UNRESOLVED_OUTPUT,
            f"line {line.line_id!r} has no declared field",
        )

    operands: list[Operand] = []
    ranges: list[tuple[str, str]] = []
    work = text

    for rx, prefix in ((_CROSS_SCHEDULE, "SCH"), (_CROSS_FORM, "F")):
        for m in rx.finditer(work):
            fid = f"{prefix}{m.group(1).upper()}.L{m.group(2).lower()}"
            if fid not in fields:
                return Unmatched(
                    line.form, line.line_id, UNRESOLVED_REF,
                    f"{m.group(0)!r} resolves to undeclared field {fid!r}",
                )
            operands.append(Operand(m.start(), ref=fid))
            work = _mask(work, m.span())

    for m in _RANGE.finditer(work):
        expanded = _expand_range(line.form, m.group(1).lower(), m.group(2).lower(), fields)
        if expanded is None:
            return Unmatched(
                line.form, line.line_id, UNRESOLVED_REF,
                f"range {m.group(0)!r} does not expand over declared fields",
            )
        ranges.append((expanded[0], expanded[-1]))
        operands.extend(Operand(m.start(), ref=fid) for fid in expanded)
        work = _mask(work, m.span())

    for m in _LIST.finditer(work):
        for token in _LIST_SEP.split(m.group(1)):
            resolved = _resolve_line(line.form, token.lower(), fields)
            if resolved is None:
                return Unmatched(
                    line.form, line.line_id, UNRESOLVED_REF,
                    f"line {token!r} has no declared field",
                )
            operands.append(Operand(m.start(), ref=resolved))
        work = _mask(work, m.span())

    for m in _SINGLE.finditer(work):
        resolved = _resolve_line(line.form, m.group(1).lower(), fields)
        if resolved is None:
            return Unmatched(
                line.form, line.line_id, UNRESOLVED_REF,
                f"line {m.group(1)!r} has no declared field",
            )
        operands.append(Operand(m.start(), ref=resolved))
        work = _mask(work, m.span())

    for m in _DOLLARS.finditer(work):
        operands.append(Operand(m.start(), const=Value.money(m.group(1).replace(",", ""))))
        work = _mask(work, m.span())
    for m in _PERCENT.finditer(work):
        operands.append(Operand(m.start(), const=Value.number(Decimal(m.group(1)) / 100)))
        work = _mask(work, m.span())
    for m in _DECIMAL.finditer(work):
        operands.append(Operand(m.start(), const=Value.number(m.group(0))))
        work = _mask(work, m.span())
    for m in _BY_INT.finditer(work):
        operands.append(Operand(m.start(1), const=Value.number(m.group(1))))
        work = _mask(work, (m.start(1), m.end(1)))

    operands.sort(key=lambda o: o.pos)
    from_positions = tuple(m.start() for m in _FROM.finditer(lowered))
    return TermSet(
        line.form, line.line_id, output, tuple(ops), tuple(operands), tuple(ranges), from_positions,
    )


def _operand_binding(op: Operand, role: str | None = None) -> Binding:
    if op.ref is not None:
        return Binding(role, ref=op.ref)
    return Binding(role, const=op.const)


def _first_after(operands: tuple[Operand, ...], pos: int, before: int | None = None) -> Operand | None:
    for op in operands:
        if op.pos > pos and (before is None or op.pos < before):
            return op
    return None


def _last_before(operands: tuple[Operand, ...], pos: int) -> Operand | None:
    found = None
    for op in operands:
        if op.pos < pos:
            found = op
    return found


def _bind(terms: TermSet, policy: str, gist: GistSpec) -> tuple[Binding, ...] | str:
    """Bind operands per the named policy; returns a reason string on failure."""
    ops = terms.operands
    if policy in ("sum", "product", "choice"):
        if len(ops) < 2:
            return AMBIGUOUS_OPERANDS
        return tuple(_operand_binding(o) for o in ops)
    if policy == "copy":
        if len(ops) != 1:
            return AMBIGUOUS_OPERANDS
        return (_operand_binding(ops[0]),)
    if policy == "subtract_from":
        sub = next((t for t in terms.op_terms if t.category == "subtract"), None)
        if sub is None or len(ops) != 2:
            return AMBIGUOUS_OPERANDS
        from_pos = next((p for p in terms.from_positions if p > sub.pos), None)
        if from_pos is None:
            return AMBIGUOUS_OPERANDS
        subtrahend = _first_after(ops, sub.pos, before=from_pos)
        minuend = _first_after(ops, from_pos)
        if subtrahend is None or minuend is None or subtrahend is minuend:
            return AMBIGUOUS_OPERANDS
        return (
            _operand_binding(minuend, "minuend"),
            _operand_binding(subtrahend, "subtrahend"),
        )
    if policy == "excess":
        more = next((t for t in terms.op_terms if t.category == "more_than"), None)
        sub = next((t for t in terms.op_terms if t.category == "subtract"), None)
        if more is None or sub is None:
            return AMBIGUOUS_OPERANDS
        left = _last_before(ops, more.pos)
        right = _first_after(ops, more.pos, before=sub.pos)
        from_pos = next((p for p in terms.from_positions if p > sub.pos), None)
        if left is None or right is None or from_pos is None:
            return AMBIGUOUS_OPERANDS
        again_sub = _first_after(ops, sub.pos, before=from_pos)
        again_min = _first_after(ops, from_pos)
        if again_sub is None or again_min is None:
            return AMBIGUOUS_OPERANDS
        # The subtract clause must restate the comparison pair.
        if (again_min.ref, again_min.const) != (left.ref, left.const):
            return AMBIGUOUS_OPERANDS
        if (again_sub.ref, again_sub.const) != (right.ref, right.const):
            return AMBIGUOUS_OPERANDS
        return (
            _operand_binding(left, "minuend"),
            _operand_binding(right, "subtrahend"),
        )
    return AMBIGUOUS_OPERANDS  # pragma: no cover - closed policy set


def match_gist(
    terms: TermSet,
    fields: Mapping[str, FieldDecl],
    registry: Mapping[str, GistSpec] | None = None,
    patterns: dict | None = None,
) -> CompileOutcome:
    """Map extracted terms onto a gist and bind its operands."""
    gists = registry or BUILTIN_GISTS
    table = patterns or default_patterns()
    categories = {t.category for t in terms.op_terms}
    for pattern in table["gist_patterns"]:
        if not set(pattern["requires"]) <= categories:
            continue
        spec = gists.get(pattern["gist"])
        if spec is None:
            continue
        bound = _bind(terms, pattern["bind"], spec)
        if isinstance(bound, str):
            return Unmatched(terms.form, terms.line_id, bound, f"pattern {pattern['name']}")
        kinds_ok = _kinds_compatible(bound, terms.output_field, fields)
        if not kinds_ok:
            return Unmatched(terms.form, terms.line_id, INCOMPATIBLE_KINDS, f"pattern {pattern['name']}")
        model = BoundedCalcModel(
            f"c.{terms.output_field}", spec.name, bound, terms.output_field,
        )
        return Matched(terms.form, terms.line_id, model, spec.name, pattern.get("confidence", "exact"))
    return Unmatched(terms.form, terms.line_id, UNKNOWN_OPERATION, ", ".join(sorted(categories)))


def _kinds_compatible(bindings: tuple[Binding, ...], output: str, fields: Mapping[str, FieldDecl]) -> bool:
    decl = fields.get(output)
    if decl is None or not is_numeric(decl.kind):
        return False
    for b in bindings:
        kind = fields[b.ref].kind if b.ref is not None else (b.const.kind if b.const else None)
        if kind is None or not is_numeric(kind):
            return False
    return True


@dataclass(frozen=True)
class CompileReport:
    matched: tuple[Matched, ...]
    unmatched: tuple[Unmatched, ...]

    @property
    def models(self) -> tuple[BoundedCalcModel, ...]:
        return tuple(m.model for m in self.matched)

    @property
    def calculation_unmatched(self) -> tuple[Unmatched, ...]:
        return tuple(u for u in self.unmatched if u.reason != NO_OPERATION)

    @property
    def automation_rate(self) -> float | None:
        denominator = len(self.matched) + len(self.calculation_unmatched)
        if denominator == 0:
            return None
        return len(self.matched) / denominator

    def rate_display(self) -> str:
        rate = self.automation_rate
        return "n/a" if rate is None else f"{rate:.2f}"

    def to_wire(self) -> dict:
        return {
            "automation_rate": self.rate_display(),
            "calculation_lines": len(self.matched) + len(self.calculation_unmatched),
            "matched": [
                {
                    "confidence": m.confidence,
                    "form": m.form,
                    "gist": m.gist,
                    "line": m.line_id,
                    "output": m.model.output,
                }
                for m in self.matched
            ],
            "unmatched": [
                {"detail": u.detail, "form": u.form, "line": u.line_id, "reason": u.reason}
                for u in self.unmatched
            ],
        }


def _line_sort_key(form: str, line_id: str) -> tuple:
    m = _LINE_TOKEN.match(line_id.lower())
    if m:
        return (form, 0, int(m.group(1)), m.group(2))
    return (form, 1, 0, line_id)


def compile_form(
    lines: Iterable[InstructionLine],
    fields: Mapping[str, FieldDecl],
    registry: Mapping[str, GistSpec] | None = None,
    patterns: dict | None = None,
) -> CompileReport:
    """Compile a corpus of instruction lines against declared fields.

    Failures are data: each non-matching line carries its reason, and the
    automation rate counts only calculation-bearing lines (those with an
    operation term).
    """
    matched: list[Matched] = []
    unmatched: list[Unmatched] = []
    produced: set[str] = set()
    for line in lines:
        terms = extract_terms(line, fields, patterns)
        if isinstance(terms, Unmatched):
            unmatched.append(terms)
            continue
        outcome = match_gist(terms, fields, registry, patterns)
        if isinstance(outcome, Unmatched):
            unmatched.append(outcome)
            continue
        if outcome.model.output in produced:
            unmatched.append(Unmatched(
                line.form, line.line_id, DUPLICATE_OUTPUT,
                f"field {outcome.model.output!r} already produced",
            ))
            continue
        produced.add(outcome.model.output)
        matched.append(outcome)
    matched.sort(key=lambda m: _line_sort_key(m.form, m.line_id))
    unmatched.sort(key=lambda u: _line_sort_key(u.form, u.line_id))
    return CompileReport(tuple(matched), tuple(unmatched))


def fragment_graph(report: CompileReport, fields: Mapping[str, FieldDecl], graph_id: str) -> KnowledgeGraph:
    """Assemble compiled models into a loadable fragment.

    Declared roles are adjusted so the fragment validates on its own: a
    field is computed exactly when some emitted model produces it.
    """
    produced = {m.output for m in report.models}
    adjusted = []
    for f in fields.values():
        if f.id in produced:
            adjusted.append(FieldDecl(f.id, f.kind, FieldRole.COMPUTED, None, f.label, f.enum))
        else:
            adjusted.append(FieldDecl(f.id, f.kind, FieldRole.INPUT, f.default, f.label, f.enum))
    return KnowledgeGraph(graph_id, adjusted, report.models)


def parse_corpus(text: str, filename: str = "<corpus>") -> list[InstructionLine]:
    """Read the tab-separated corpus format: ``form<TAB>line<TAB>text``."""
    out: list[InstructionLine] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 3:
            raise CorpusFormatError(f"{filename}:{number}: expected form<TAB>line<TAB>text")
        form, line_id, body = (part.strip() for part in parts)
        if not form or not line_id or not body:
            raise CorpusFormatError(f"{filename}:{number}: empty record component")
        out.append(InstructionLine(form, line_id, body))
    return out
