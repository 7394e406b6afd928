import json

import pytest

from crosscoref.jsonl import (
    JsonlError,
    canonical_json,
    document_from_record,
    document_to_record,
    read_document_jsonl,
    write_document_jsonl,
)

from conftest import make_doc, make_utterance, random_document, span_mention


def test_round_trip_random_documents(tmp_path, rng):
    docs = [random_document(rng) for _ in range(10)]
    path = tmp_path / "docs.jsonl"
    write_document_jsonl(docs, path)
    assert read_document_jsonl(path) == docs


def test_round_trip_is_byte_stable(tmp_path, rng):
    docs = [random_document(rng) for _ in range(5)]
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    write_document_jsonl(docs, first)
    write_document_jsonl(read_document_jsonl(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_empty_file_reads_empty(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert read_document_jsonl(path) == []


def test_malformed_line_names_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = canonical_json(document_to_record(make_doc()))
    path.write_text(good + "\n{not json\n")
    with pytest.raises(JsonlError) as err:
        read_document_jsonl(path)
    assert err.value.line_no == 2


def test_invalid_span_rejected_in_strict_mode(tmp_path):
    doc = make_doc(utterances=(make_utterance("one two"),),
                   mentions=(span_mention("a", 0, 1, 1),))
    record = document_to_record(doc)
    record["mentions"][0]["start"], record["mentions"][0]["end"] = 2, 1
    path = tmp_path / "bad_span.jsonl"
    path.write_text(canonical_json(record) + "\n")
    with pytest.raises(JsonlError) as err:
        read_document_jsonl(path)
    assert err.value.line_no == 1
    assert "SPAN_OUT_OF_RANGE" in str(err.value)

    docs = read_document_jsonl(path, strict=False)
    assert len(docs) == 1


def test_unknown_schema_version_rejected(tmp_path):
    record = document_to_record(make_doc())
    record["schema_version"] = 99
    path = tmp_path / "v99.jsonl"
    path.write_text(canonical_json(record) + "\n")
    with pytest.raises(JsonlError):
        read_document_jsonl(path)


def test_canonical_json_sorts_keys():
    text = canonical_json({"b": 1, "a": {"z": 0, "y": 1}})
    assert text == '{"a":{"y":1,"z":0},"b":1}'


def test_record_preserves_speaker_mentions_and_flags(rng):
    doc = random_document(rng, allow_speakers=True)
    record = json.loads(canonical_json(document_to_record(doc)))
    assert document_from_record(record) == doc
