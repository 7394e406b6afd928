"""HTTP service backing the human review workflows.

Serves projection-review and adjudication tasks over a small JSON API
and records every submission to append-only logs; the logs are the
source of truth, so restarting the service and replaying them
reconstructs identical state. Single-writer: appends are serialized
behind one lock. No framework, just the standard library server.

Endpoints:
    GET  /api/docs/{id}        canonical document (corrected view)
    GET  /api/tasks            ?kind=&doc=&status=&page=&page_size=
    POST /api/corrections      {"task_id", "annotator", correction fields}
    POST /api/adjudications    {"task_id", "annotator", decision fields}
"""

from __future__ import annotations

import base64
import json
import mimetypes
import re
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from .core import Document, MentionKind
from .jsonl import canonical_json, document_to_record, read_document_jsonl
from .merge import (
    MergeError,
    answer_to_record,
    decision_from_record,
    decision_to_record,
    merge_two_way,
    triplet_from_record,
)
from .projection import (
    Correction,
    CorrectionError,
    ProjectionResult,
    apply_corrections,
    correction_from_record,
    correction_to_record,
    read_projection_bundle,
)

_SAFE_ID = re.compile(r"^[A-Za-z0-9._:\-]+$")

PROJECTION_REVIEW = "projection_review"
ADJUDICATION = "adjudication"
TASK_KINDS = (PROJECTION_REVIEW, ADJUDICATION)


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


@dataclass
class Task:
    task_id: str
    kind: str
    doc_id: str
    position: int
    payload: dict
    done: bool = False


def _span_payload(doc: Document, utt_index: int) -> list[str]:
    if 0 <= utt_index < len(doc.utterances):
        return list(doc.utterances[utt_index].tokens)
    return []


class ReviewStore:
    """In-memory view of documents, tasks, and the two append-only logs."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.lock = threading.Lock()
        self.docs: dict[str, Document] = {}
        self.results: dict[str, ProjectionResult] = {}
        self.tasks: dict[str, Task] = {}
        self.task_order: list[str] = []
        self.triplets_by_doc: dict[str, list] = {}
        self.known_answer_targets: dict[str, set] = {}
        self.corrections_by_doc: dict[str, list[Correction]] = {}
        self._load()
        self._replay_logs()

    # ------------------------------------------------------------ loading

    def _load(self) -> None:
        bundle = self.data_dir / "projections.jsonl"
        if bundle.exists():
            for result in read_projection_bundle(bundle):
                self.results[result.target_doc.doc_id] = result
                self.docs[result.source_doc.doc_id] = result.source_doc
                self.docs[result.target_doc.doc_id] = result.target_doc
                self._make_projection_tasks(result)

        docs_file = self.data_dir / "documents.jsonl"
        if docs_file.exists():
            for doc in read_document_jsonl(docs_file):
                self.docs.setdefault(doc.doc_id, doc)

        triplets_file = self.data_dir / "triplets.jsonl"
        if triplets_file.exists():
            with open(triplets_file, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    doc_id = str(record.get("doc_id", ""))
                    triplet = triplet_from_record(record)
                    self.triplets_by_doc.setdefault(doc_id, []).append(triplet)
            for doc_id, triplets in self.triplets_by_doc.items():
                self._make_adjudication_tasks(doc_id, triplets)

    def _make_projection_tasks(self, result: ProjectionResult) -> None:
        doc_id = result.target_doc.doc_id
        source = result.source_doc
        target_spans = {m.id: m for m in result.target_doc.mentions}
        mapping_order = {m.id: i for i, m in enumerate(source.mentions)}
        for mid, entry in sorted(result.provenance.items(),
                                 key=lambda kv: mapping_order.get(kv[0], 0)):
            source_mention = source.mentions_by_id().get(mid)
            if source_mention is None:
                continue
            predicted = None
            target_tokens: list[str] = []
            projected = target_spans.get(mid)
            if projected is not None and projected.kind is MentionKind.SPAN:
                predicted = [projected.utt_index, projected.start, projected.end]
                target_tokens = _span_payload(result.target_doc,
                                              projected.utt_index)
            payload = {
                "mention_id": mid,
                "status": entry.status.value,
                "source_span": ([source_mention.utt_index, source_mention.start,
                                 source_mention.end]
                                if source_mention.kind is MentionKind.SPAN
                                else [source_mention.utt_index, None, None]),
                "source_tokens": _span_payload(source, source_mention.utt_index),
                "predicted_span": predicted,
                "target_tokens": target_tokens,
                "language": result.language,
            }
            task_id = f"proj:{doc_id}:{mid}"
            self._add_task(Task(task_id=task_id, kind=PROJECTION_REVIEW,
                                doc_id=doc_id, position=len(self.task_order),
                                payload=payload))

    def _make_adjudication_tasks(self, doc_id: str, triplets) -> None:
        state = merge_two_way(triplets)
        known: set = {t.query for t in triplets}
        for t in triplets:
            for answer in (t.answer1, t.answer2):
                if answer.target is not None:
                    known.add(answer.target)
        doc = self.docs.get(doc_id)
        if doc is not None:
            known |= set(doc.mentions_by_id())
        self.known_answer_targets[doc_id] = known
        for triplet in state.disagreements:
            payload = {
                "query": triplet.query,
                "answer1": answer_to_record(triplet.answer1),
                "answer2": answer_to_record(triplet.answer2),
            }
            if doc is not None:
                mention = doc.mentions_by_id().get(triplet.query)
                if mention is not None:
                    payload["query_span"] = [mention.utt_index, mention.start,
                                             mention.end]
                    payload["context_tokens"] = _span_payload(
                        doc, mention.utt_index)
            task_id = f"adj:{doc_id}:{triplet.query}"
            self._add_task(Task(task_id=task_id, kind=ADJUDICATION,
                                doc_id=doc_id, position=len(self.task_order),
                                payload=payload))

    def _add_task(self, task: Task) -> None:
        if task.task_id in self.tasks:
            raise ApiError(500, f"duplicate task id {task.task_id}")
        self.tasks[task.task_id] = task
        self.task_order.append(task.task_id)

    # ------------------------------------------------------------ logs

    @property
    def corrections_path(self) -> Path:
        return self.data_dir / "corrections.log.jsonl"

    @property
    def decisions_path(self) -> Path:
        return self.data_dir / "adjudications.log.jsonl"

    def _replay_logs(self) -> None:
        if self.corrections_path.exists():
            with open(self.corrections_path, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    correction = correction_from_record(record["correction"])
                    self._accept_correction(record["task_id"], correction,
                                            record=False)
        if self.decisions_path.exists():
            with open(self.decisions_path, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    task = self.tasks.get(record["task_id"])
                    if task is not None:
                        task.done = True

    def _append(self, path: Path, record: dict) -> None:
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(canonical_json(record) + "\n")

    # ------------------------------------------------------------ reads

    def get_document(self, doc_id: str) -> dict:
        if not _SAFE_ID.match(doc_id):
            raise ApiError(400, f"unsafe document id {doc_id!r}")
        doc = self.docs.get(doc_id)
        if doc is None:
            raise ApiError(404, f"unknown document {doc_id!r}")
        return document_to_record(doc)

    def list_tasks(self, kind=None, doc=None, status=None, page=None,
                   page_size=50) -> dict:
        if kind is not None and kind not in TASK_KINDS:
            raise ApiError(400, f"unknown task kind {kind!r}")
        if status is not None and status not in ("open", "done"):
            raise ApiError(400, f"unknown status {status!r}")
        offset = 0
        if page:
            try:
                decoded = base64.urlsafe_b64decode(page.encode("ascii")).decode()
                prefix, value = decoded.split(":", 1)
                if prefix != "offset":
                    raise ValueError(decoded)
                offset = int(value)
                if offset < 0:
                    raise ValueError(offset)
            except (ValueError, UnicodeDecodeError) as exc:
                raise ApiError(400, f"bad page token {page!r}") from exc

        ordered = sorted(self.task_order,
                         key=lambda tid: (self.tasks[tid].doc_id,
                                          self.tasks[tid].position))
        selected = []
        for tid in ordered:
            task = self.tasks[tid]
            if kind is not None and task.kind != kind:
                continue
            if doc is not None and task.doc_id != doc:
                continue
            if status == "open" and task.done:
                continue
            if status == "done" and not task.done:
                continue
            selected.append(task)

        window = selected[offset:offset + page_size]
        next_page = None
        if offset + page_size < len(selected):
            token = f"offset:{offset + page_size}".encode("ascii")
            next_page = base64.urlsafe_b64encode(token).decode("ascii")
        return {
            "tasks": [{
                "task_id": t.task_id,
                "kind": t.kind,
                "doc_id": t.doc_id,
                "status": "done" if t.done else "open",
                "payload": t.payload,
            } for t in window],
            "total": len(selected),
            "next_page": next_page,
        }

    # ------------------------------------------------------------ writes

    def _accept_correction(self, task_id: str, correction: Correction,
                           record: bool = True) -> None:
        task = self.tasks.get(task_id)
        if task is None or task.kind != PROJECTION_REVIEW:
            raise ApiError(404, f"unknown correction task {task_id!r}")
        doc_id = task.doc_id
        result = self.results[doc_id]
        pending = self.corrections_by_doc.get(doc_id, []) + [correction]
        try:
            updated = apply_corrections(result, pending)
        except CorrectionError as exc:
            raise ApiError(422, str(exc)) from exc
        self.corrections_by_doc[doc_id] = pending
        self.docs[doc_id] = updated
        task.done = True
        if record:
            self._append(self.corrections_path, {
                "task_id": task_id,
                "doc_id": doc_id,
                "correction": correction_to_record(correction),
            })

    def submit_correction(self, body: dict) -> dict:
        task_id = body.get("task_id")
        if not task_id:
            raise ApiError(422, "task_id is required")
        annotator = body.get("annotator")
        if not annotator:
            raise ApiError(422, "annotator is required")
        span = body.get("span")
        if (body.get("action") == "modification" and span is not None
                and len(span) == 3 and span[1] >= span[2]):
            # removing a projection must be an explicit deletion
            raise ApiError(422, f"degenerate span {span} in MODIFICATION")
        try:
            correction = correction_from_record({
                "action": body.get("action"),
                "mention_id": body.get("mention_id"),
                "span": span,
                "annotator": annotator,
                "timestamp_ms": int(time.time() * 1000),
            })
        except CorrectionError as exc:
            raise ApiError(422, str(exc)) from exc

        with self.lock:
            task = self.tasks.get(task_id)
            if task is None or task.kind != PROJECTION_REVIEW:
                raise ApiError(404, f"unknown correction task {task_id!r}")
            if task.done:
                if self._is_replay(task_id, correction):
                    return {"task_id": task_id, "status": "done",
                            "replayed": True}
                if not body.get("override"):
                    raise ApiError(409, f"task {task_id!r} already decided; "
                                        "pass override=true to supersede")
            self._accept_correction(task_id, correction)
        return {"task_id": task_id, "status": "done", "replayed": False}

    def _is_replay(self, task_id: str, correction: Correction) -> bool:
        if not self.corrections_path.exists():
            return False
        incoming = correction_to_record(correction)
        incoming.pop("timestamp_ms")
        with open(self.corrections_path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record.get("task_id") != task_id:
                    continue
                logged = dict(record["correction"])
                logged.pop("timestamp_ms", None)
                if logged == incoming:
                    return True
        return False

    def submit_decision(self, body: dict) -> dict:
        task_id = body.get("task_id")
        if not task_id:
            raise ApiError(422, "task_id is required")
        if not body.get("annotator"):
            raise ApiError(422, "annotator is required")
        try:
            decision = decision_from_record({
                "query": body.get("query"),
                "choice": body.get("choice"),
                "relabel": body.get("relabel"),
            })
        except MergeError as exc:
            raise ApiError(422, str(exc)) from exc

        with self.lock:
            task = self.tasks.get(task_id)
            if task is None or task.kind != ADJUDICATION:
                raise ApiError(404, f"unknown adjudication task {task_id!r}")
            if decision.query != task.payload["query"]:
                raise ApiError(422, "decision query does not match the task")
            if decision.relabel is not None and decision.relabel.target is not None:
                known = self.known_answer_targets.get(task.doc_id, set())
                if decision.relabel.target not in known:
                    raise ApiError(422, "relabel references an unknown mention "
                                        f"{decision.relabel.target!r}")
            superseded = task.done
            if task.done and not body.get("override"):
                raise ApiError(409, f"task {task_id!r} already decided; "
                                    "adjudication is final without override")
            task.done = True
            self._append(self.decisions_path, {
                "task_id": task_id,
                "annotator": body["annotator"],
                "decision": decision_to_record(decision),
                "superseded": superseded,
            })
        return {"task_id": task_id, "status": "done", "superseded": superseded}


class _Handler(BaseHTTPRequestHandler):
    store: ReviewStore = None
    cors_origin: str = "*"
    ui_dir: Path | None = None

    # silence per-request stderr noise
    def log_message(self, format, *args):
        pass

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", self.cors_origin)
        self.send_header("Access-Control-Allow-Methods",
                         "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _send_json(self, status: int, payload) -> None:
        body = (payload if isinstance(payload, str)
                else canonical_json(payload)).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error(self, err: ApiError) -> None:
        self._send_json(err.status, {"error": err.message})

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.end_headers()

    def do_GET(self):
        try:
            parsed = urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            if parts[:2] == ["api", "docs"] and len(parts) == 3:
                record = self.store.get_document(parts[2])
                self._send_json(200, canonical_json(record))
                return
            if parts == ["api", "tasks"]:
                query = parse_qs(parsed.query)

                def single(name, default=None):
                    values = query.get(name)
                    return values[0] if values else default

                page_size = single("page_size", "50")
                try:
                    page_size = max(1, min(500, int(page_size)))
                except ValueError as exc:
                    raise ApiError(400, "bad page_size") from exc
                payload = self.store.list_tasks(
                    kind=single("kind"), doc=single("doc"),
                    status=single("status"), page=single("page"),
                    page_size=page_size)
                self._send_json(200, payload)
                return
            if parts == ["api", "health"]:
                self._send_json(200, {"status": "ok"})
                return
            if parts[:1] != ["api"] and self.ui_dir is not None:
                self._send_static(parts)
                return
            raise ApiError(404, f"no such route {parsed.path!r}")
        except ApiError as err:
            self._send_error(err)

    def _send_static(self, parts: list[str]) -> None:
        relative = "/".join(unquote(p) for p in parts) or "index.html"
        base = self.ui_dir.resolve()
        target = (base / relative).resolve()
        if not str(target).startswith(str(base)) or not target.is_file():
            raise ApiError(404, f"no such file {relative!r}")
        body = target.read_bytes()
        content_type = (mimetypes.guess_type(target.name)[0]
                        or "application/octet-stream")
        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ApiError(400, "request body is not valid JSON") from exc
        if not isinstance(body, dict):
            raise ApiError(400, "request body must be a JSON object")
        return body

    def do_POST(self):
        try:
            parsed = urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            body = self._read_body()
            if parts == ["api", "corrections"]:
                self._send_json(201, self.store.submit_correction(body))
                return
            if parts == ["api", "adjudications"]:
                self._send_json(201, self.store.submit_decision(body))
                return
            raise ApiError(404, f"no such route {parsed.path!r}")
        except ApiError as err:
            self._send_error(err)


def make_server(data_dir, port: int = 0, cors_origin: str = "*",
                host: str = "127.0.0.1", ui_dir=None) -> ThreadingHTTPServer:
    store = ReviewStore(data_dir)
    handler = type("BoundHandler", (_Handler,),
                   {"store": store, "cors_origin": cors_origin,
                    "ui_dir": Path(ui_dir) if ui_dir else None})
    return ThreadingHTTPServer((host, port), handler)


def serve(data_dir, port: int, cors_origin: str = "*",
          host: str = "127.0.0.1", ui_dir=None) -> None:
    server = make_server(data_dir, port, cors_origin, host, ui_dir)
    bound_host, bound_port = server.server_address[:2]
    print(f"review service listening on http://{bound_host}:{bound_port} "
          f"(data: {data_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
