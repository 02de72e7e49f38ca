"""Developer command line: validate, evaluate, inspect, compile.

Output is deterministic and line-stable for golden-file testing. Exit
codes: 0 success, 1 domain failure (diagnostics, unknown values requested,
bad facts), 2 unreadable files or usage errors. File formats are described
in ``docs/cli.md``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compiler import CorpusFormatError, compile_form, fragment_graph, parse_corpus
from .completeness import missing_report
from .diagnostics import Severity
from .engine import EvalState, FactStore, recompute, set_fact
from .errors import KnowledgeGraphError
from .explain import ExplanationNode, explain
from .loader import LoadResult, load_file, save
from .model import KnowledgeGraph
from .values import parse_value


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"kg: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
        raise SystemExit(2)


def _load_graph(path: str) -> tuple[KnowledgeGraph | None, LoadResult]:
    _read_text(path)  # existence/permission check with exit code 2
    result = load_file(path)
    return result.graph, result


def _print_diagnostics(result: LoadResult) -> None:
    for d in result.diagnostics:
        stream = sys.stderr if d.severity is Severity.ERROR else sys.stdout
        print(str(d), file=stream)


def cmd_validate(args: argparse.Namespace) -> int:
    graph, result = _load_graph(args.file)
    _print_diagnostics(result)
    if graph is None:
        return 1
    if not result.diagnostics:
        print("OK")
    return 0


def _parse_facts_file(path: str, graph: KnowledgeGraph) -> tuple[FactStore, EvalState, int]:
    """Apply a FIELD=VALUE facts file; returns the store plus a bad-line count."""
    text = _read_text(path)
    store = FactStore()
    state = EvalState.fresh(graph)
    bad = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            print(f"{path}:{number}: expected FIELD=VALUE", file=sys.stderr)
            bad += 1
            continue
        fid, _, raw_value = line.partition("=")
        fid, raw_value = fid.strip(), raw_value.strip()
        decl = graph.field(fid)
        if decl is None:
            print(f"{path}:{number}: unknown field {fid!r}", file=sys.stderr)
            bad += 1
            continue
        try:
            value = parse_value(decl.kind, raw_value, decl.enum)
            set_fact(graph, store, state, fid, value)
        except KnowledgeGraphError as exc:
            print(f"{path}:{number}: {exc}", file=sys.stderr)
            bad += 1
    return store, state, bad


def _print_tree(node: ExplanationNode, indent: int = 0) -> None:
    print("  " * indent + node.text)
    for child in node.children:
        _print_tree(child, indent + 1)


def cmd_eval(args: argparse.Namespace) -> int:
    graph, result = _load_graph(args.file)
    if graph is None:
        _print_diagnostics(result)
        return 1
    store, state, bad = _parse_facts_file(args.facts, graph)
    eval_result = recompute(graph, store, state)
    for fid in sorted(graph.fields):
        print(f"{fid} = {eval_result.values[fid].render()}")
    for err in eval_result.errors:
        print(f"error in {err.model_id}: {err.message}", file=sys.stderr)
    if args.explain is not None:
        if graph.field(args.explain) is None:
            print(f"kg: unknown field {args.explain!r}", file=sys.stderr)
            return 1
        print()
        _print_tree(explain(graph, eval_result, store, args.explain, args.depth))
    return 1 if bad else 0


def cmd_missing(args: argparse.Namespace) -> int:
    graph, result = _load_graph(args.file)
    if graph is None:
        _print_diagnostics(result)
        return 1
    store, state, bad = _parse_facts_file(args.facts, graph)
    eval_result = recompute(graph, store, state)
    report = missing_report(graph, store, eval_result)
    for d in report.decisions:
        print(f"graph {d.graph_id}: decided: {d.decision}")
    for q in report.questions:
        print(
            f"graph {q.graph_id}: next question: {q.next_question} "
            f"(relevant: {', '.join(q.relevant_vars)})"
        )
    for u in report.unknown_outputs:
        if u.missing_inputs:
            print(f"missing for {u.field}: {', '.join(u.missing_inputs)}")
    return 1 if bad else 0


def cmd_compile(args: argparse.Namespace) -> int:
    fields_graph, result = _load_graph(args.fields)
    if fields_graph is None:
        _print_diagnostics(result)
        return 1
    corpus_text = _read_text(args.corpus)
    try:
        lines = parse_corpus(corpus_text, args.corpus)
    except CorpusFormatError as exc:
        print(f"kg: {exc}", file=sys.stderr)
        return 2

    report = compile_form(lines, fields_graph.fields)
    fragment = fragment_graph(report, fields_graph.fields, args.graph_id)

    header = f"{'line':<14} {'outcome':<10} {'gist':<16} detail"
    print(header)
    print("-" * len(header))
    for m in report.matched:
        print(f"{m.form + '/' + m.line_id:<14} {'matched':<10} {m.gist:<16} -> {m.model.output}")
    for u in report.unmatched:
        detail = u.reason + (f" ({u.detail})" if u.detail else "")
        print(f"{u.form + '/' + u.line_id:<14} {'unmatched':<10} {'-':<16} {detail}")
    total = len(report.matched) + len(report.calculation_unmatched)
    print(
        f"matched {len(report.matched)} of {total} calculation lines; "
        f"automation rate {report.rate_display()}"
    )

    if args.output is not None:
        Path(args.output).write_text(save(fragment), encoding="utf-8")
    if args.report is not None:
        Path(args.report).write_text(
            json.dumps(report.to_wire(), indent=2, sort_keys=True) + "\n", encoding="utf-8",
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kg", description="Knowledge graph developer tool.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a definition file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate a graph over a facts file")
    p.add_argument("file")
    p.add_argument("--facts", required=True)
    p.add_argument("--explain", default=None, metavar="FIELD")
    p.add_argument("--depth", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("missing", help="report missing info for a facts file")
    p.add_argument("file")
    p.add_argument("--facts", required=True)
    p.set_defaults(func=cmd_missing)

    p = sub.add_parser("compile", help="compile an instruction corpus into calc models")
    p.add_argument("corpus")
    p.add_argument("--fields", required=True, help="definition file declaring the form's fields")
    p.add_argument("-o", "--output", default=None, help="write the compiled fragment here")
    p.add_argument("--report", default=None, help="write the machine-readable report here")
    p.add_argument("--graph-id", default="compiled", help="graph id for the fragment")
    p.set_defaults(func=cmd_compile)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except KnowledgeGraphError as exc:
        print(f"kg: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
