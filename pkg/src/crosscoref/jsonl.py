"""Line-delimited JSON interchange for documents.

This is the canonical on-disk format: one document record per line,
serialized with sorted keys and fixed separators so that write-read-write
is byte-stable. Every record carries a ``schema_version`` field.

Record layout (see README for the field-by-field description):

    {"schema_version": 1, "doc_id": ..., "language": ...,
     "metadata": {...},
     "utterances": [{"speaker": ..., "tokens": [...], "empty": false}, ...],
     "mentions": [{"id": ..., "kind": "span", "utt": 0, "start": 1,
                   "end": 3, "antecedents": [...], "flags": [...]}, ...]}
"""

from __future__ import annotations

import json
from typing import Iterable

from .core import (
    CorefError,
    Document,
    Mention,
    MentionFlag,
    MentionKind,
    Utterance,
    validate_document,
)

SCHEMA_VERSION = 1


class JsonlError(CorefError):
    """A malformed or invalid record; carries file path and line number."""

    def __init__(self, message: str, path=None, line_no: int | None = None):
        self.path = path
        self.line_no = line_no
        where = f"{path}:{line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message}")


def canonical_json(record: dict) -> str:
    """Deterministic single-line serialization (sorted keys, no padding)."""
    return json.dumps(record, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def document_to_record(doc: Document) -> dict:
    mentions = []
    for m in doc.mentions:
        rec = {
            "id": m.id,
            "kind": m.kind.value,
            "utt": m.utt_index,
            "antecedents": list(m.antecedents),
            "flags": sorted(f.value for f in m.flags),
        }
        if m.kind is MentionKind.SPAN:
            rec["start"] = m.start
            rec["end"] = m.end
        mentions.append(rec)
    return {
        "schema_version": SCHEMA_VERSION,
        "doc_id": doc.doc_id,
        "language": doc.language,
        "metadata": dict(sorted(doc.metadata.items())),
        "utterances": [
            {"speaker": u.speaker, "tokens": list(u.tokens), "empty": u.empty}
            for u in doc.utterances
        ],
        "mentions": mentions,
    }


def document_from_record(record: dict) -> Document:
    """Build a Document from a parsed record; raises JsonlError on bad shape."""
    try:
        version = record.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise JsonlError(f"unsupported schema_version {version}")
        utterances = tuple(
            Utterance(speaker=u.get("speaker", ""),
                      tokens=tuple(u.get("tokens", [])),
                      empty=bool(u.get("empty", False)))
            for u in record["utterances"]
        )
        mentions = []
        for m in record.get("mentions", []):
            kind = MentionKind(m.get("kind", "span"))
            mentions.append(Mention(
                id=str(m["id"]),
                kind=kind,
                utt_index=int(m["utt"]),
                start=m.get("start") if kind is MentionKind.SPAN else None,
                end=m.get("end") if kind is MentionKind.SPAN else None,
                antecedents=tuple(str(a) for a in m.get("antecedents", [])),
                flags=frozenset(MentionFlag(f) for f in m.get("flags", [])),
            ))
        return Document(
            doc_id=str(record["doc_id"]),
            language=str(record.get("language", "")),
            utterances=utterances,
            mentions=tuple(mentions),
            metadata={str(k): str(v)
                      for k, v in record.get("metadata", {}).items()},
        )
    except JsonlError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise JsonlError(f"bad document record: {exc}") from exc


def write_document_jsonl(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write(canonical_json(document_to_record(doc)))
            handle.write("\n")


def read_document_jsonl(path, strict: bool = True) -> list[Document]:
    """Read documents, one JSON record per line.

    In strict mode (default) every document must satisfy the core
    invariants; the file is rejected with the offending line number and
    collected violation codes otherwise.
    """
    docs = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise JsonlError(f"malformed JSON: {exc}", path, line_no) from exc
            try:
                doc = document_from_record(record)
            except JsonlError as exc:
                raise JsonlError(str(exc), path, line_no) from exc
            if strict:
                violations = validate_document(doc)
                if violations:
                    codes = ", ".join(v.code for v in violations)
                    raise JsonlError(
                        f"document {doc.doc_id!r} violates invariants: {codes}",
                        path, line_no)
            docs.append(doc)
    return docs
