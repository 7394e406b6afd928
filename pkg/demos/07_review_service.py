"""
The human review loop over HTTP
===============================

The review service turns a projection bundle into open tasks, records
every submitted correction to an append-only log, and keeps a corrected
document view that always equals an offline replay of that log.
"""

import json
import tempfile
import threading
import urllib.request
from pathlib import Path

from crosscoref.core import Document, Mention, MentionKind, Utterance
from crosscoref.jsonl import canonical_json, document_to_record
from crosscoref.parallel import AlignmentSet, ParallelDocument
from crosscoref.projection import (
    apply_corrections,
    project_document,
    read_correction_log,
    write_projection_bundle,
)
from crosscoref.service import make_server

source = Document(
    doc_id="en-scene", language="en",
    utterances=(Utterance(speaker="A", tokens=("the", "dog", "saw", "it")),),
    mentions=(
        Mention(id="dog", kind=MentionKind.SPAN, utt_index=0, start=0, end=2),
        Mention(id="it", kind=MentionKind.SPAN, utt_index=0, start=3, end=4,
                antecedents=("dog",)),
    ),
    metadata={"episode": "e1", "scene": "1"},
)
target = Document(doc_id="zh-scene", language="zh",
                  utterances=(Utterance(speaker="A", tokens=("狗", "看见")),),
                  metadata=dict(source.metadata))
parallel = ParallelDocument(source=source, targets={"zh": target},
                            utterance_map={"zh": (0,)})
result = project_document(parallel, AlignmentSet({(0, 0): {(0, 0), (1, 0)}}),
                          "zh")

data_dir = Path(tempfile.mkdtemp(prefix="review-demo-"))
write_projection_bundle([result], data_dir / "projections.jsonl")

server = make_server(data_dir, port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print("serving", base)


def call(path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(base + path, data=data,
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


tasks = call("/api/tasks?status=open")
print("open tasks:", [(t["task_id"], t["payload"]["status"])
                      for t in tasks["tasks"]])

# The pronoun null-projected; a reviewer adds the recovered span.
print("submit:", call("/api/corrections", {
    "task_id": "proj:zh-scene:it", "annotator": "demo",
    "action": "addition", "mention_id": "it", "span": [0, 1, 2]}))

served = call("/api/docs/zh-scene")
offline = apply_corrections(result,
                            read_correction_log(data_dir / "corrections.log.jsonl"))
print("server view == offline replay:",
      canonical_json(served) == canonical_json(document_to_record(offline)))

server.shutdown()
server.server_close()
