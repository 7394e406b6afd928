import json
import threading
import urllib.error
import urllib.request

import pytest

from crosscoref.jsonl import canonical_json, document_to_record
from crosscoref.merge import write_records
from crosscoref.projection import (
    apply_corrections,
    read_correction_log,
    write_projection_bundle,
)
from crosscoref.service import make_server

from test_projection import chain_parallel
from crosscoref.projection import project_document


@pytest.fixture
def data_dir(tmp_path):
    parallel, alignments = chain_parallel(drop_middle=True)
    result = project_document(parallel, alignments, "zh")
    write_projection_bundle([result], tmp_path / "projections.jsonl")
    write_records([
        {"doc_id": "tgt", "query": "q1",
         "answer1": {"kind": "span", "target": "a"},
         "answer2": {"kind": "span", "target": "c"}},
    ], tmp_path / "triplets.jsonl")
    return tmp_path


@pytest.fixture
def server(data_dir):
    httpd = make_server(data_dir, port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base, data_dir
    httpd.shutdown()
    httpd.server_close()


def request(base, path, body=None, method=None):
    url = base + path
    data = None
    headers = {}
    if body is not None:
        data = json.dumps(body).encode("utf-8")
        headers["Content-Type"] = "application/json"
    req = urllib.request.Request(url, data=data, headers=headers,
                                 method=method)
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read().decode("utf-8"))


def test_get_known_document(server):
    base, _ = server
    status, body = request(base, "/api/docs/src")
    assert status == 200
    assert body["doc_id"] == "src"


def test_get_unknown_document_404(server):
    base, _ = server
    status, _ = request(base, "/api/docs/nope")
    assert status == 404


def test_unsafe_document_id_400(server):
    base, _ = server
    status, _ = request(base, "/api/docs/..%2F..%2Fetc")
    assert status == 400


def test_task_listing_and_pagination(server):
    base, _ = server
    status, body = request(base, "/api/tasks")
    assert status == 200
    # three projection reviews (a, b, c) + one adjudication
    assert body["total"] == 4
    kinds = {t["kind"] for t in body["tasks"]}
    assert kinds == {"projection_review", "adjudication"}

    status, body = request(base, "/api/tasks?kind=projection_review")
    assert status == 200
    assert body["total"] == 3
    null_tasks = [t for t in body["tasks"]
                  if t["payload"]["status"] == "null_projection"]
    assert [t["payload"]["mention_id"] for t in null_tasks] == ["b"]

    status, body = request(base, "/api/tasks?page_size=2")
    assert len(body["tasks"]) == 2
    assert body["next_page"]
    status, body2 = request(base, f"/api/tasks?page_size=2&page={body['next_page']}")
    assert status == 200
    assert len(body2["tasks"]) == 2
    assert body2["next_page"] is None


def test_bad_kind_and_bad_page_token_400(server):
    base, _ = server
    assert request(base, "/api/tasks?kind=bogus")[0] == 400
    assert request(base, "/api/tasks?page=!!!")[0] == 400


def test_correction_flow_with_idempotent_replay(server):
    base, data = server
    body = {"task_id": "proj:tgt:b", "annotator": "ann",
            "action": "addition", "mention_id": "b", "span": [0, 2, 3]}
    status, reply = request(base, "/api/corrections", body)
    assert status == 201
    assert reply["status"] == "done"

    status, listing = request(base, "/api/tasks?status=open&kind=projection_review")
    assert listing["total"] == 2  # a and c still open

    # identical replay: 201, log unchanged
    log_before = (data / "corrections.log.jsonl").read_text()
    status, reply = request(base, "/api/corrections", body)
    assert status == 201
    assert reply["replayed"] is True
    assert (data / "corrections.log.jsonl").read_text() == log_before

    # conflicting correction without override -> 409
    conflicting = dict(body, span=[0, 3, 4])
    status, _ = request(base, "/api/corrections", conflicting)
    assert status == 409
    # with override -> accepted and appended
    status, _ = request(base, "/api/corrections", dict(conflicting, override=True))
    assert status == 201
    assert (data / "corrections.log.jsonl").read_text() != log_before


def test_correction_validation_422(server):
    base, _ = server
    bad_span = {"task_id": "proj:tgt:a", "annotator": "ann",
                "action": "modification", "mention_id": "a", "span": [0, 3, 2]}
    assert request(base, "/api/corrections", bad_span)[0] == 422
    out_of_range = {"task_id": "proj:tgt:a", "annotator": "ann",
                    "action": "modification", "mention_id": "a",
                    "span": [0, 4, 99]}
    assert request(base, "/api/corrections", out_of_range)[0] == 422
    no_annotator = {"task_id": "proj:tgt:a",
                    "action": "deletion", "mention_id": "a"}
    assert request(base, "/api/corrections", no_annotator)[0] == 422


def test_adjudication_flow_and_finality(server):
    base, data = server
    body = {"task_id": "adj:tgt:q1", "annotator": "judge",
            "query": "q1", "choice": "pick_second"}
    status, reply = request(base, "/api/adjudications", body)
    assert status == 201

    # finality: a second decision needs override
    second = dict(body, choice="pick_first")
    assert request(base, "/api/adjudications", second)[0] == 409
    status, reply = request(base, "/api/adjudications",
                            dict(second, override=True))
    assert status == 201
    assert reply["superseded"] is True

    lines = [json.loads(line) for line in
             (data / "adjudications.log.jsonl").read_text().splitlines()]
    assert [entry["superseded"] for entry in lines] == [False, True]


def test_adjudication_dangling_relabel_422(server):
    base, _ = server
    body = {"task_id": "adj:tgt:q1", "annotator": "judge", "query": "q1",
            "choice": "relabel",
            "relabel": {"kind": "span", "target": "ghost_mention"}}
    assert request(base, "/api/adjudications", body)[0] == 422


def test_served_doc_view_matches_offline_replay(server):
    base, data = server
    request(base, "/api/corrections",
            {"task_id": "proj:tgt:b", "annotator": "ann",
             "action": "addition", "mention_id": "b", "span": [0, 2, 3]})
    request(base, "/api/corrections",
            {"task_id": "proj:tgt:c", "annotator": "ann",
             "action": "modification", "mention_id": "c", "span": [0, 4, 6]})

    status, served = request(base, "/api/docs/tgt")
    assert status == 200

    from crosscoref.projection import read_projection_bundle
    result, = read_projection_bundle(data / "projections.jsonl")
    log = read_correction_log(data / "corrections.log.jsonl")
    offline = apply_corrections(result, log)
    assert canonical_json(served) == canonical_json(document_to_record(offline))


def test_crash_recovery_replays_to_identical_state(server):
    base, data = server
    request(base, "/api/corrections",
            {"task_id": "proj:tgt:b", "annotator": "ann",
             "action": "addition", "mention_id": "b", "span": [0, 2, 3]})
    request(base, "/api/adjudications",
            {"task_id": "adj:tgt:q1", "annotator": "judge", "query": "q1",
             "choice": "pick_first"})
    _, tasks_before = request(base, "/api/tasks")
    _, doc_before = request(base, "/api/docs/tgt")

    # restart from the same data dir
    httpd = make_server(data, port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    try:
        base2 = f"http://127.0.0.1:{httpd.server_address[1]}"
        _, tasks_after = request(base2, "/api/tasks")
        _, doc_after = request(base2, "/api/docs/tgt")
        assert tasks_after == tasks_before
        assert canonical_json(doc_after) == canonical_json(doc_before)
    finally:
        httpd.shutdown()
        httpd.server_close()


def test_unknown_route_404_and_bad_json_400(server):
    base, _ = server
    assert request(base, "/api/nope")[0] == 404
    req = urllib.request.Request(base + "/api/corrections", data=b"{oops",
                                 headers={"Content-Type": "application/json"})
    try:
        urllib.request.urlopen(req)
        assert False, "expected failure"
    except urllib.error.HTTPError as err:
        assert err.code == 400


def test_cors_preflight(server):
    base, _ = server
    req = urllib.request.Request(base + "/api/tasks", method="OPTIONS")
    with urllib.request.urlopen(req) as resp:
        assert resp.status == 204
        assert resp.headers["Access-Control-Allow-Origin"] == "*"


def test_static_ui_serving(data_dir, tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<html><body>review</body></html>")
    (ui / "app.js").write_text("console.log('ok')")
    httpd = make_server(data_dir, port=0, ui_dir=ui)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    try:
        with urllib.request.urlopen(base + "/") as resp:
            assert resp.status == 200
            assert b"review" in resp.read()
        with urllib.request.urlopen(base + "/app.js") as resp:
            assert "javascript" in resp.headers["Content-Type"]
        # traversal stays inside the ui dir
        status, _ = request(base, "/..%2F..%2Fetc%2Fpasswd")
        assert status == 404
        # api routes still respond
        assert request(base, "/api/docs/src")[0] == 200
    finally:
        httpd.shutdown()
        httpd.server_close()
