"""Session-oriented HTTP facade over the engine.

One process serves a fixed registry of graphs loaded at startup; clients
create sessions, stream facts in, and read back results, missing-info
reports and explanation trees. Responses are canonical JSON (sorted keys,
decimal strings for amounts, never binary floats) so a replayed request
sequence against a fresh service produces byte-identical bodies. Every
session-scoped response carries the store revision in ``X-KG-Revision``.

Sessions live in memory; with ``--snapshot DIR`` each session appends its
fact batches to a log file that is replayed on restart.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import threading
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .completeness import MissingReport, missing_report
from .engine import (
    ABSENT,
    EvalResult,
    EvalState,
    FactStore,
    full_eval,
    recompute,
    set_fact,
    value_to_wire,
)
from .errors import (
    KindMismatchError,
    NotAnInputError,
    UnknownFieldError,
    ValueParseError,
)
from .explain import ExplanationNode, explain
from .loader import FILE_EXTENSION, load_file
from .model import FieldDecl, FieldRole, KnowledgeGraph
from .values import Value, ValueKind, parse_value

MAX_EXPLAIN_DEPTH = 32


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _respond(payload: Any, status: int = 200, revision: int | None = None) -> Response:
    headers = {}
    if revision is not None:
        headers["X-KG-Revision"] = str(revision)
    return Response(
        content=canonical_json(payload) + "\n",
        status_code=status,
        media_type="application/json",
        headers=headers,
    )


class Session:
    def __init__(self, session_id: str, graph: KnowledgeGraph) -> None:
        self.id = session_id
        self.graph = graph
        self.store = FactStore()
        self.state = EvalState.fresh(graph)
        self.result: EvalResult = recompute(graph, self.store, self.state)
        self.lock = threading.Lock()


def parse_wire_value(decl: FieldDecl, raw: Any) -> Value:
    """Decode a JSON fact value per the field's kind; floats are refused."""
    if isinstance(raw, float):
        raise ValueParseError("binary floats are not accepted; send a decimal string")
    if decl.kind in (ValueKind.MONEY, ValueKind.NUMBER):
        if isinstance(raw, bool) or not isinstance(raw, (str, int)):
            raise ValueParseError(f"expected a decimal string for {decl.kind.value}")
        return parse_value(decl.kind, str(raw), decl.enum)
    if decl.kind is ValueKind.BOOLEAN:
        if isinstance(raw, bool):
            return Value.boolean(raw)
        if isinstance(raw, str):
            return parse_value(decl.kind, raw)
        raise ValueParseError("expected true/false")
    if not isinstance(raw, str):
        raise ValueParseError("expected a string choice")
    return parse_value(decl.kind, raw, decl.enum)


def _field_info(decl: FieldDecl) -> dict:
    info: dict[str, Any] = {
        "field": decl.id,
        "kind": decl.kind.value,
        "label": decl.display_name(),
    }
    if decl.kind is ValueKind.TEXT:
        info["enum"] = list(decl.enum)
    return info


def missing_to_wire(graph: KnowledgeGraph, report: MissingReport) -> dict:
    questions = []
    for q in report.questions:
        decl = graph.field(q.next_question)
        entry = _field_info(decl) if decl else {"field": q.next_question}
        entry["graph"] = q.graph_id
        entry["relevant"] = list(q.relevant_vars)
        questions.append(entry)
    return {
        "decisions": [{"decision": d.decision, "graph": d.graph_id} for d in report.decisions],
        "missing_inputs": [
            {
                "field": u.field,
                "inputs": [
                    _field_info(decl)
                    for fid in u.missing_inputs
                    if (decl := graph.field(fid)) is not None
                ],
            }
            for u in report.unknown_outputs
        ],
        "questions": questions,
    }


def explain_to_wire(graph: KnowledgeGraph, node: ExplanationNode) -> dict:
    decl = graph.field(node.field)
    return {
        "children": [explain_to_wire(graph, c) for c in node.children],
        "field": node.field,
        "gist": node.gist,
        "label": decl.display_name() if decl else node.field,
        "text": node.text,
        "value": node.value.render(),
    }


class _SnapshotLog:
    def __init__(self, directory: Path) -> None:
        self.directory = directory
        directory.mkdir(parents=True, exist_ok=True)

    def path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.log"

    def begin(self, session_id: str, graph_id: str) -> None:
        with self.path(session_id).open("w", encoding="utf-8") as fh:
            fh.write(canonical_json({"graph": graph_id}) + "\n")

    def append(self, session_id: str, clear: list[str], sets: Mapping[str, Any]) -> None:
        with self.path(session_id).open("a", encoding="utf-8") as fh:
            fh.write(canonical_json({"clear": clear, "set": dict(sets)}) + "\n")


def create_app(
    graphs: Mapping[str, KnowledgeGraph],
    snapshot_dir: Path | str | None = None,
) -> FastAPI:
    app = FastAPI(title="kgengine session service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-KG-Revision"],
    )

    sessions: dict[str, Session] = {}
    registry = dict(graphs)
    counter = {"next": 1}
    create_lock = threading.Lock()
    log = _SnapshotLog(Path(snapshot_dir)) if snapshot_dir is not None else None

    app.state.sessions = sessions
    app.state.graphs = registry

    def apply_batch(
        session: Session, clear: list[str], sets: Mapping[str, Any],
    ) -> Response:
        """Validate-then-apply one atomic fact batch; 422 applies nothing."""
        problems: list[dict] = []
        parsed: list[tuple[str, Value]] = []
        for fid in sorted(set(clear)):
            decl = session.graph.field(fid)
            if decl is None:
                problems.append({"code": "unknown-field", "field": fid, "message": "not declared"})
            elif decl.role is not FieldRole.INPUT:
                problems.append({"code": "not-an-input", "field": fid, "message": "computed field"})
        for fid in sorted(sets):
            decl = session.graph.field(fid)
            if decl is None:
                problems.append({"code": "unknown-field", "field": fid, "message": "not declared"})
                continue
            if decl.role is not FieldRole.INPUT:
                problems.append({"code": "not-an-input", "field": fid, "message": "computed field"})
                continue
            try:
                parsed.append((fid, parse_wire_value(decl, sets[fid])))
            except ValueParseError as exc:
                problems.append({"code": "kind-mismatch", "field": fid, "message": str(exc)})
        if problems:
            return _respond({"errors": problems}, 422, session.store.revision)

        before = session.result.values
        for fid in sorted(set(clear)):
            set_fact(session.graph, session.store, session.state, fid, ABSENT)
        for fid, value in parsed:
            set_fact(session.graph, session.store, session.state, fid, value)
        session.result = recompute(session.graph, session.store, session.state)
        after = session.result.values
        changed = {
            fid: value_to_wire(after[fid])
            for fid in sorted(after)
            if before.get(fid) != after[fid]
        }
        unknown = sorted(
            fid for fid in session.result.unknown_fields
            if session.graph.fields[fid].role is FieldRole.COMPUTED
        )
        errors = [{"message": e.message, "model": e.model_id} for e in session.result.errors]
        body = {"changed": changed, "errors": errors, "unknown": unknown}
        return _respond(body, 200, session.store.revision)

    def make_session(graph_id: str) -> Session:
        with create_lock:
            session_id = f"s-{counter['next']:06d}"
            counter["next"] += 1
            session = Session(session_id, registry[graph_id])
            sessions[session_id] = session
        return session

    @app.post("/v1/sessions")
    async def create_session(request: Request) -> Response:
        body = await _json_body(request)
        if not isinstance(body, dict) or not isinstance(body.get("graph"), str):
            return _respond({"error": "body must be {\"graph\": \"<id>\"}"}, 400)
        graph_id = body["graph"]
        if graph_id not in registry:
            return _respond({"error": f"unknown graph {graph_id!r}"}, 404)
        session = make_session(graph_id)
        if log is not None:
            log.begin(session.id, graph_id)
        return _respond(
            {"graph": graph_id, "session_id": session.id}, 201, session.store.revision,
        )

    @app.patch("/v1/sessions/{session_id}/facts")
    async def patch_facts(session_id: str, request: Request) -> Response:
        session = sessions.get(session_id)
        if session is None:
            return _respond({"error": "unknown session"}, 404)
        body = await _json_body(request)
        if not isinstance(body, dict):
            return _respond({"error": "body must be a JSON object"}, 400)
        sets = body.get("set", {})
        clear = body.get("clear", [])
        if not isinstance(sets, dict) or not isinstance(clear, list) or not all(
            isinstance(f, str) for f in clear
        ):
            return _respond({"error": "set must be an object and clear a list of field ids"}, 400)
        with session.lock:
            response = apply_batch(session, clear, sets)
            if log is not None and response.status_code == 200:
                log.append(session.id, sorted(set(clear)), {k: sets[k] for k in sorted(sets)})
        return response

    @app.get("/v1/sessions/{session_id}/missing")
    async def get_missing(session_id: str) -> Response:
        session = sessions.get(session_id)
        if session is None:
            return _respond({"error": "unknown session"}, 404)
        with session.lock:
            report = missing_report(session.graph, session.store, session.result)
            return _respond(missing_to_wire(session.graph, report), 200, session.store.revision)

    @app.get("/v1/sessions/{session_id}/explain/{field_id}")
    async def get_explain(session_id: str, field_id: str, request: Request) -> Response:
        session = sessions.get(session_id)
        if session is None:
            return _respond({"error": "unknown session"}, 404)
        raw_depth = request.query_params.get("depth", "1")
        if not re.fullmatch(r"\d+", raw_depth) or not 1 <= int(raw_depth) <= MAX_EXPLAIN_DEPTH:
            return _respond({"error": f"depth must be 1..{MAX_EXPLAIN_DEPTH}"}, 400)
        if session.graph.field(field_id) is None:
            return _respond({"error": f"unknown field {field_id!r}"}, 404)
        with session.lock:
            node = explain(session.graph, session.result, session.store, field_id, int(raw_depth))
            return _respond(explain_to_wire(session.graph, node), 200, session.store.revision)

    if log is not None:
        _replay_snapshots(log, registry, sessions, counter)
    return app


async def _json_body(request: Request) -> Any:
    try:
        return await request.json()
    except Exception:
        return None


def _replay_snapshots(
    log: _SnapshotLog,
    registry: Mapping[str, KnowledgeGraph],
    sessions: dict[str, Session],
    counter: dict[str, int],
) -> None:
    for path in sorted(log.directory.glob("s-*.log")):
        session_id = path.stem
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
            header = json.loads(lines[0])
            graph = registry[header["graph"]]
        except (KeyError, IndexError, json.JSONDecodeError):
            continue  # foreign or truncated log; leave it alone
        session = Session(session_id, graph)
        for line in lines[1:]:
            batch = json.loads(line)
            for fid in batch.get("clear", []):
                set_fact(graph, session.store, session.state, fid, ABSENT)
            for fid, raw in batch.get("set", {}).items():
                decl = graph.field(fid)
                if decl is None:
                    continue
                set_fact(graph, session.store, session.state, fid, parse_wire_value(decl, raw))
        session.result = recompute(graph, session.store, session.state)
        sessions[session_id] = session
        m = re.fullmatch(r"s-(\d+)", session_id)
        if m:
            counter["next"] = max(counter["next"], int(m.group(1)) + 1)


def load_graph_dir(directory: Path) -> dict[str, KnowledgeGraph]:
    """Load every ``.kg.xml`` under a directory, keyed by graph id."""
    registry: dict[str, KnowledgeGraph] = {}
    paths = sorted(directory.glob(f"*{FILE_EXTENSION}"))
    if not paths:
        raise FileNotFoundError(f"no {FILE_EXTENSION} files in {directory}")
    for path in paths:
        result = load_file(path)
        if result.graph is None:
            details = "\n".join(str(d) for d in result.diagnostics)
            raise ValueError(f"{path} failed to load:\n{details}")
        if result.graph.id in registry:
            raise ValueError(f"duplicate graph id {result.graph.id!r} ({path})")
        registry[result.graph.id] = result.graph
    return registry


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kgserve", description="Serve knowledge graphs over HTTP.")
    parser.add_argument("--graphs", required=True, help="directory of .kg.xml definition files")
    parser.add_argument("--listen", default="127.0.0.1:8000", help="HOST:PORT to bind")
    parser.add_argument("--snapshot", default=None, help="directory for per-session fact logs")
    args = parser.parse_args(argv)

    try:
        registry = load_graph_dir(Path(args.graphs))
    except (OSError, FileNotFoundError) as exc:
        print(f"kgserve: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"kgserve: {exc}", file=sys.stderr)
        return 1

    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"kgserve: --listen expects HOST:PORT, got {args.listen!r}", file=sys.stderr)
        return 2

    app = create_app(registry, args.snapshot)
    import uvicorn

    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
