import random

import pytest

from crosscoref.cli import format_table, main, parallel_map
from crosscoref.core import Document, Utterance, build_clusters
from crosscoref.jsonl import read_document_jsonl, write_document_jsonl
from crosscoref.merge import read_records, write_records
from crosscoref.parallel import (
    AlignmentSet,
    ParallelDocument,
    write_parallel_jsonl,
    write_pharaoh_corpus,
)
from crosscoref.projection import read_projection_bundle

from conftest import make_doc, make_utterance, random_document, span_mention


def identity_fixture(tmp_path, n_docs=3):
    parallels = []
    alignments = {}
    for i in range(n_docs):
        source = make_doc(
            doc_id=f"scene{i}",
            utterances=(make_utterance("the dog barked loud", "A"),
                        make_utterance("she saw the dog", "B")),
            mentions=(span_mention("m0", 0, 0, 2),
                      span_mention("m1", 1, 2, 4, antecedents=("m0",)),
                      span_mention("m2", 1, 0, 1)),
            metadata={"episode": "e1", "scene": str(i)})
        target = Document(doc_id=f"scene{i}_zh", language="zh",
                          utterances=source.utterances,
                          metadata=dict(source.metadata))
        parallel = ParallelDocument(source=source, targets={"zh": target},
                                    utterance_map={"zh": (0, 1)})
        parallels.append(parallel)
        links = {}
        for s, t in parallel.aligned_pairs("zh"):
            n = len(source.utterances[s].tokens)
            links[(s, t)] = frozenset((k, k) for k in range(n))
        alignments[source.doc_id] = AlignmentSet(links)
    parallel_path = tmp_path / "parallel.jsonl"
    pharaoh_path = tmp_path / "alignments.pharaoh"
    write_parallel_jsonl(parallels, parallel_path)
    write_pharaoh_corpus(alignments, parallels, "zh", pharaoh_path)
    return parallel_path, pharaoh_path


def test_project_identity_reports_zero_nulls(tmp_path, capsys):
    parallel_path, pharaoh_path = identity_fixture(tmp_path)
    bundle = tmp_path / "bundle.jsonl"
    out = tmp_path / "projected.jsonl"
    code = main(["project", "--parallel", str(parallel_path),
                 "--alignments", str(pharaoh_path), "--lang", "zh",
                 "--out", str(out), "--bundle", str(bundle)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "0.00" in printed
    results = read_projection_bundle(bundle)
    assert all(r.stats.null_projections == 0 for r in results)
    docs = read_document_jsonl(out)
    assert len(docs) == 3


def test_score_identical_files_all_hundred(tmp_path, capsys):
    rng = random.Random(5)
    docs = [random_document(rng, allow_speakers=False) for _ in range(4)]
    for doc in docs:
        if not doc.mentions:
            break
    key = tmp_path / "key.jsonl"
    write_document_jsonl(docs, key)
    code = main(["score", "--key", str(key), "--response", str(key)])
    assert code == 0
    out = capsys.readouterr().out
    lines = [line for line in out.splitlines()
             if line.startswith(("muc", "b_cubed", "ceaf", "mention", "conll"))]
    assert lines
    for line in lines:
        assert "100.00" in line


def test_score_conll_format(tmp_path, capsys):
    doc = make_doc(utterances=(make_utterance("a b c d e"),),
                   mentions=(span_mention("m0", 0, 0, 2),
                             span_mention("m1", 0, 4, 5, antecedents=("m0",))))
    from crosscoref.conll import write_conll
    path = tmp_path / "both.conll"
    write_conll([doc], [build_clusters(doc)], path)
    tsv = tmp_path / "scores.tsv"
    code = main(["score", "--key", str(path), "--response", str(path),
                 "--format", "conll", "--tsv", str(tsv)])
    assert code == 0
    assert "100.00" in tsv.read_text()


def test_score_exit_code_on_mismatched_docs(tmp_path, capsys):
    docs = [make_doc(doc_id="a")]
    other = [make_doc(doc_id="b")]
    key = tmp_path / "key.jsonl"
    response = tmp_path / "response.jsonl"
    write_document_jsonl(docs, key)
    write_document_jsonl(other, response)
    assert main(["score", "--key", str(key), "--response", str(response)]) == 1
    assert "error:" in capsys.readouterr().err


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["score"])  # missing required flags
    assert exc.value.code == 2


def merge_fixture(tmp_path):
    records = [
        {"doc_id": "d1", "query": "q1",
         "answer1": {"kind": "span", "target": "a"},
         "answer2": {"kind": "span", "target": "a"}},
        {"doc_id": "d1", "query": "q2",
         "answer1": {"kind": "span", "target": "q1"},
         "answer2": {"kind": "span", "target": "a"}},
        {"doc_id": "d1", "query": "q3",
         "answer1": {"kind": "span", "target": "a"},
         "answer2": {"kind": "not_mention"}},
    ]
    path = tmp_path / "triplets.jsonl"
    write_records(records, path)
    return path


def test_merge_writes_expected_queue(tmp_path, capsys):
    triplets = merge_fixture(tmp_path)
    queue = tmp_path / "queue.jsonl"
    clusters = tmp_path / "clusters.jsonl"
    code = main(["merge", "--triplets", str(triplets),
                 "--queue-out", str(queue), "--clusters-out", str(clusters)])
    assert code == 0
    queued = read_records(queue)
    assert [record["query"] for record in queued] == ["q3"]
    cluster_records = read_records(clusters)
    assert cluster_records[0]["doc_id"] == "d1"
    assert sorted(map(sorted, cluster_records[0]["clusters"])) \
        == [["a", "q1", "q2"]]


def test_adjudicate_export_and_apply(tmp_path):
    triplets = merge_fixture(tmp_path)
    queue = tmp_path / "queue.jsonl"
    assert main(["adjudicate", "export", "--triplets", str(triplets),
                 "--queue-out", str(queue)]) == 0
    assert [r["query"] for r in read_records(queue)] == ["q3"]

    decisions = tmp_path / "decisions.jsonl"
    write_records([{"doc_id": "d1", "query": "q3", "choice": "pick_first"}],
                  decisions)
    clusters = tmp_path / "final.jsonl"
    remaining = tmp_path / "remaining.jsonl"
    assert main(["adjudicate", "apply", "--triplets", str(triplets),
                 "--decisions", str(decisions),
                 "--clusters-out", str(clusters),
                 "--queue-out", str(remaining)]) == 0
    assert read_records(remaining) == []
    final = read_records(clusters)[0]["clusters"]
    assert sorted(map(sorted, final)) == [["a", "q1", "q2", "q3"]]


def test_corrections_apply_round_trip(tmp_path):
    parallel_path, pharaoh_path = identity_fixture(tmp_path, n_docs=1)
    bundle = tmp_path / "bundle.jsonl"
    assert main(["project", "--parallel", str(parallel_path),
                 "--alignments", str(pharaoh_path), "--lang", "zh",
                 "--bundle", str(bundle)]) == 0
    log = tmp_path / "corrections.jsonl"
    write_records([{
        "doc_id": "scene0_zh",
        "correction": {"action": "deletion", "mention_id": "m2",
                       "annotator": "ann", "timestamp_ms": 5},
    }], log)
    out = tmp_path / "corrected.jsonl"
    assert main(["corrections", "apply", "--bundle", str(bundle),
                 "--log", str(log), "--out", str(out)]) == 0
    docs = read_document_jsonl(out)
    assert {m.id for m in docs[0].mentions} == {"m0", "m1"}


def test_baseline_head_lemma(tmp_path):
    doc = make_doc(utterances=(make_utterance("the dog saw the dog"),),
                   mentions=(span_mention("m0", 0, 0, 2),
                             span_mention("m1", 0, 3, 5)))
    docs_path = tmp_path / "docs.jsonl"
    write_document_jsonl([doc], docs_path)
    clusters = tmp_path / "clusters.jsonl"
    assert main(["baseline", "head-lemma", "--input", str(docs_path),
                 "--clusters-out", str(clusters)]) == 0
    record = read_records(clusters)[0]
    assert sorted(map(sorted, record["clusters"])) == [["m0", "m1"]]


def test_stats_projection_and_corpus(tmp_path, capsys):
    parallel_path, pharaoh_path = identity_fixture(tmp_path)
    bundle = tmp_path / "bundle.jsonl"
    main(["project", "--parallel", str(parallel_path),
          "--alignments", str(pharaoh_path), "--lang", "zh",
          "--bundle", str(bundle)])
    capsys.readouterr()
    tsv = tmp_path / "stats.tsv"
    assert main(["stats", "projection", "--bundle", str(bundle),
                 "--tsv", str(tsv)]) == 0
    assert "null_pct" in tsv.read_text()

    source_docs = [make_doc(doc_id=f"s{i}",
                            metadata={"episode": "e1", "scene": str(i)})
                   for i in range(2)]
    target_docs = [Document(doc_id=f"t{i}", language="zh",
                            utterances=source_docs[i].utterances,
                            metadata={"episode": "e1", "scene": str(i)})
                   for i in range(2)]
    source_path = tmp_path / "source.jsonl"
    target_path = tmp_path / "zh.jsonl"
    write_document_jsonl(source_docs, source_path)
    write_document_jsonl(target_docs, target_path)
    maps = tmp_path / "maps.jsonl"
    write_records([
        {"lang": "zh", "episode": "e1", "scene": "0", "map": [0, 1]},
        {"lang": "zh", "episode": "e1", "scene": "1", "map": [0, 1]},
    ], maps)
    capsys.readouterr()
    assert main(["stats", "corpus", "--source", str(source_path),
                 "--target", f"zh={target_path}", "--maps", str(maps)]) == 0
    out = capsys.readouterr().out
    assert "final" in out


def test_replace_names_cli_round_trip(tmp_path):
    doc = Document(
        doc_id="d0", language="en",
        utterances=(Utterance(speaker="Penny", tokens=("Penny", "waved")),
                    Utterance(speaker="Sheldon", tokens=("hello", "Penny"))),
        mentions=(span_mention("m0", 0, 0, 1),),
        metadata={"episode": "e1", "scene": "0"})
    docs_path = tmp_path / "docs.jsonl"
    write_document_jsonl([doc], docs_path)
    pool_f = tmp_path / "f.txt"
    pool_f.write_text("Mary\nLinda\nSusan\n")
    pool_m = tmp_path / "m.txt"
    pool_m.write_text("James\nRobert\nDavid\n")
    groups = tmp_path / "groups.tsv"
    groups.write_text("Penny\tf\nSheldon\tm\n")
    out = tmp_path / "renamed.jsonl"
    mapping = tmp_path / "mapping.tsv"
    assert main(["replace-names", "--input", str(docs_path),
                 "--out", str(out), "--pool", f"f={pool_f}",
                 "--pool", f"m={pool_m}", "--groups", str(groups),
                 "--seed", "11", "--mapping-out", str(mapping)]) == 0
    renamed = read_document_jsonl(out)
    assert renamed[0].utterances[0].speaker != "Penny"

    # determinism under the same seed
    out2 = tmp_path / "renamed2.jsonl"
    assert main(["replace-names", "--input", str(docs_path),
                 "--out", str(out2), "--pool", f"f={pool_f}",
                 "--pool", f"m={pool_m}", "--groups", str(groups),
                 "--seed", "11", "--mapping-out", str(mapping)]) == 0
    assert out.read_bytes() == out2.read_bytes()

    restored = tmp_path / "restored.jsonl"
    assert main(["replace-names", "--input", str(out), "--out", str(restored),
                 "--invert", "--mapping", str(mapping)]) == 0
    assert read_document_jsonl(restored) == [doc]


def test_loss_check_passes(capsys):
    assert main(["loss-check"]) == 0
    out = capsys.readouterr().out
    assert "ok" in out
    assert "ontonotes" in out


def test_seed_env_var_overrides_default(tmp_path, monkeypatch):
    monkeypatch.setenv("CROSSCOREF_SEED", "777")
    from crosscoref.cli import build_parser
    args = build_parser().parse_args(["loss-check"])
    assert args.seed == 777


def test_config_file_sets_defaults(tmp_path):
    config = tmp_path / "config.ini"
    config.write_text("seed=42\njobs=2\n")
    from crosscoref.cli import build_parser, load_config
    assert load_config(config) == {"seed": "42", "jobs": "2"}
    docs_path = tmp_path / "docs.jsonl"
    write_document_jsonl([make_doc()], docs_path)
    assert main(["--config", str(config), "score", "--key", str(docs_path),
                 "--response", str(docs_path)]) == 0


def test_format_table_alignment():
    table = format_table(["a", "bbb"], [(1, 2), (333, 4)])
    lines = table.splitlines()
    assert lines[0].startswith("a")
    assert len(lines) == 4


def test_parallel_map_preserves_order():
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, jobs=4) \
        == [x * x for x in items]
