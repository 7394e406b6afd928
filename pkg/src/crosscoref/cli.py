"""Command-line interface exposing the pipeline as subcommands.

Exit codes: 0 on success, 1 on data errors (reported with file context),
2 on usage errors (argparse). Outputs are deterministic given identical
inputs and seed; the default seed can be overridden with the
CROSSCOREF_SEED environment variable or --seed. A --config file with
key=value lines supplies flag defaults (keys: seed, jobs, strict,
threshold, split_policy).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .analysis import (
    apply_mapping,
    build_replacement_plan,
    head_lemma_baseline,
    headed_mentions,
    invert_mapping,
    mapping_from_tsv,
    mapping_to_tsv,
    partition_by_speakers,
    replace_names,
)
from .conll import read_conll
from .core import CorefError, SplitPolicy
from .jsonl import read_document_jsonl, write_document_jsonl
from .merge import (
    AdjudicationDecision,
    apply_decisions,
    decision_from_record,
    merge_two_way,
    read_records,
    triplet_from_record,
    triplet_to_record,
    write_records,
)
from .metrics import EvalPair, corpus_scores, pair_from_documents
from .parallel import (
    assemble_three_way,
    read_parallel_jsonl,
    read_pharaoh_corpus,
)
from .projection import (
    apply_corrections,
    correction_from_record,
    project_document,
    projection_stats_report,
    read_projection_bundle,
    stats_report_tsv,
    write_projection_bundle,
)

DEFAULT_SEED = 1234
SEED_ENV_VAR = "CROSSCOREF_SEED"


def default_seed() -> int:
    value = os.environ.get(SEED_ENV_VAR)
    if value is not None:
        try:
            return int(value)
        except ValueError:
            print(f"warning: ignoring non-integer {SEED_ENV_VAR}={value!r}",
                  file=sys.stderr)
    return DEFAULT_SEED


def format_table(headers, rows) -> str:
    """Plain aligned-columns rendering for terminals."""
    table = [list(map(str, headers))] + [list(map(str, row)) for row in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = []
    for index, row in enumerate(table):
        lines.append("  ".join(cell.ljust(width)
                               for cell, width in zip(row, widths)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * width for width in widths))
    return "\n".join(lines)


def parallel_map(fn, items, jobs: int):
    """Order-preserving map over a thread pool; results are aggregated in
    input order so scheduling never changes the output."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def load_config(path) -> dict:
    config = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CorefError(f"{path}:{line_no}: expected key=value")
            config[key.strip()] = value.strip()
    return config


def _split_policy(name: str) -> SplitPolicy:
    return SplitPolicy(name)


# ---------------------------------------------------------------- project

def cmd_project(args) -> int:
    parallels = read_parallel_jsonl(args.parallel, strict=args.strict)
    alignments = read_pharaoh_corpus(args.alignments, parallels, args.lang)
    policy = _split_policy(args.split_policy)

    def run(parallel):
        return project_document(parallel, alignments[parallel.source.doc_id],
                                args.lang, policy)

    results = parallel_map(run, parallels, args.jobs)
    if args.bundle:
        write_projection_bundle(results, args.bundle)
    if args.out:
        write_document_jsonl([r.target_doc for r in results], args.out)
    rows = projection_stats_report(results)
    tsv = stats_report_tsv(rows)
    if args.stats_tsv:
        Path(args.stats_tsv).write_text(tsv, encoding="utf-8")
    print(format_table(
        ["group", "scenes", "mentions", "projected", "null", "null%"],
        [(r.group, r.scenes, r.source_mentions, r.projected,
          r.null_projections, f"{100 * r.null_rate:.2f}") for r in rows]))
    return 0


# ------------------------------------------------------------- corrections

def _corrections_by_doc(path, results) -> dict:
    """Group a correction log by target document.

    Records may carry doc_id (service logs do); a bare log is accepted
    when the bundle holds a single document.
    """
    by_doc: dict[str, list] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            doc_id = record.get("doc_id")
            inner = record.get("correction", record)
            if doc_id is None:
                if len(results) != 1:
                    raise CorefError(
                        f"{path}:{line_no}: correction lacks doc_id and the "
                        "bundle holds several documents")
                doc_id = results[0].target_doc.doc_id
            by_doc.setdefault(doc_id, []).append(
                correction_from_record(inner))
    return by_doc


def cmd_corrections_apply(args) -> int:
    results = read_projection_bundle(args.bundle)
    by_doc = _corrections_by_doc(args.log, results)
    corrected = []
    for result in results:
        log = by_doc.get(result.target_doc.doc_id, [])
        corrected.append(apply_corrections(result, log))
    write_document_jsonl(corrected, args.out)
    print(f"applied corrections to {len(corrected)} documents -> {args.out}")
    return 0


# ------------------------------------------------------------------ merge

def _read_triplets_by_doc(path) -> dict:
    by_doc: dict[str, list] = {}
    for record in read_records(path):
        doc_id = str(record.get("doc_id", ""))
        by_doc.setdefault(doc_id, []).append(triplet_from_record(record))
    return by_doc


def _write_states(states: dict, clusters_out, queue_out) -> None:
    if clusters_out:
        write_records(
            ({"doc_id": doc_id,
              "clusters": [sorted(map(str, c)) for c in state.clusters.clusters]}
             for doc_id, state in sorted(states.items())),
            clusters_out)
    if queue_out:
        records = []
        for doc_id, state in sorted(states.items()):
            for triplet in state.disagreements:
                record = triplet_to_record(triplet)
                record["doc_id"] = doc_id
                records.append(record)
        write_records(records, queue_out)


def cmd_merge(args) -> int:
    by_doc = _read_triplets_by_doc(args.triplets)
    states = {doc_id: merge_two_way(triplets)
              for doc_id, triplets in by_doc.items()}
    _write_states(states, args.clusters_out, args.queue_out)
    total_queued = sum(len(s.disagreements) for s in states.values())
    total_resolved = sum(len(s.resolved) for s in states.values())
    print(format_table(["documents", "resolved", "queued"],
                       [(len(states), total_resolved, total_queued)]))
    return 0


def cmd_adjudicate_export(args) -> int:
    by_doc = _read_triplets_by_doc(args.triplets)
    states = {doc_id: merge_two_way(triplets)
              for doc_id, triplets in by_doc.items()}
    _write_states(states, None, args.queue_out)
    print(f"exported {sum(len(s.disagreements) for s in states.values())} "
          f"disagreements -> {args.queue_out}")
    return 0


def cmd_adjudicate_apply(args) -> int:
    by_doc = _read_triplets_by_doc(args.triplets)
    decisions_by_doc: dict[str, list[AdjudicationDecision]] = {}
    for record in read_records(args.decisions):
        doc_id = str(record.get("doc_id", ""))
        decisions_by_doc.setdefault(doc_id, []).append(
            decision_from_record(record))
    states = {}
    for doc_id, triplets in by_doc.items():
        state = merge_two_way(triplets)
        decisions = decisions_by_doc.get(doc_id, [])
        if decisions:
            state = apply_decisions(state, decisions)
        states[doc_id] = state
    _write_states(states, args.clusters_out, args.queue_out)
    remaining = sum(len(s.disagreements) for s in states.values())
    print(f"{remaining} disagreements remain")
    return 0


# ------------------------------------------------------------------ score

def _load_pairs(key_path, response_path, fmt: str,
                policy: SplitPolicy) -> list[EvalPair]:
    if fmt == "conll":
        def load(path):
            out = {}
            for doc, clustering in read_conll(path):
                identities = {m.id: m.identity() for m in doc.mentions}
                out[doc.doc_id] = clustering.relabel(identities)
            return out
        key, response = load(key_path), load(response_path)
        missing = sorted(set(key) ^ set(response))
        if missing:
            raise CorefError(f"documents not present on both sides: {missing}")
        return [EvalPair(key=key[doc_id], response=response[doc_id])
                for doc_id in sorted(key)]

    key_docs = {d.doc_id: d for d in read_document_jsonl(key_path)}
    response_docs = {d.doc_id: d for d in read_document_jsonl(response_path)}
    missing = sorted(set(key_docs) ^ set(response_docs))
    if missing:
        raise CorefError(f"documents not present on both sides: {missing}")
    return [pair_from_documents(key_docs[doc_id], response_docs[doc_id], policy)
            for doc_id in sorted(key_docs)]


def cmd_score(args) -> int:
    pairs = _load_pairs(args.key, args.response, args.format,
                        _split_policy(args.split_policy))
    report = corpus_scores(pairs, macro=args.macro,
                           drop_singletons=args.drop_singletons)
    rows = []
    for name, score in report.rows():
        precision, recall, f1 = score.display()
        flags = ",".join(sorted(score.undefined)) or "-"
        rows.append((name, precision, recall, f1, flags))
    rows.append(("conll_f1", "-", "-", f"{100 * report.conll_f1:.2f}", "-"))
    table = format_table(["metric", "precision", "recall", "f1", "undefined"],
                         rows)
    print(table)
    if args.tsv:
        lines = ["\t".join(["metric", "precision", "recall", "f1", "undefined"])]
        lines += ["\t".join(map(str, row)) for row in rows]
        Path(args.tsv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


# ------------------------------------------------------------------ stats

def cmd_stats_projection(args) -> int:
    results = read_projection_bundle(args.bundle)
    corrections = None
    if args.corrections:
        corrections = _corrections_by_doc(args.corrections, results)
    rows = projection_stats_report(results, corrections)
    tsv = stats_report_tsv(rows)
    if args.tsv:
        Path(args.tsv).write_text(tsv, encoding="utf-8")
    headers = ["group", "scenes", "mentions", "projected", "null", "null%",
               "clusters", "surviving", "corrected", "corrected%"]
    print(format_table(headers, [
        (r.group, r.scenes, r.source_mentions, r.projected,
         r.null_projections, f"{100 * r.null_rate:.2f}",
         r.clusters_source, r.clusters_surviving,
         "-" if r.corrected is None else r.corrected,
         "-" if r.corrected is None else f"{100 * r.corrected_rate:.2f}")
        for r in rows]))
    return 0


def cmd_stats_corpus(args) -> int:
    source = read_document_jsonl(args.source, strict=args.strict)
    targets = {}
    for spec_pair in args.target:
        lang, sep, path = spec_pair.partition("=")
        if not sep:
            raise CorefError(f"--target expects lang=path, got {spec_pair!r}")
        targets[lang] = read_document_jsonl(path, strict=args.strict)
    maps: dict[str, dict] = {}
    for record in read_records(args.maps):
        lang = str(record["lang"])
        key = (str(record["episode"]), str(record["scene"]))
        maps.setdefault(lang, {})[key] = [
            None if v is None else int(v) for v in record["map"]]
    kept, report = assemble_three_way(source, targets, maps,
                                      min_aligned_fraction=args.threshold)
    print(format_table(["stage", "scenes"], report.rows()))
    if args.tsv:
        lines = ["stage\tscenes"] + [f"{name}\t{count}"
                                     for name, count in report.rows()]
        Path(args.tsv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.kept_out:
        from .parallel import write_parallel_jsonl
        write_parallel_jsonl(kept, args.kept_out)
    return 0


def cmd_stats_speakers(args) -> int:
    docs = read_document_jsonl(args.input, strict=args.strict)
    buckets = partition_by_speakers(docs)
    print(format_table(["speakers", "documents"],
                       [(bucket.value, len(members))
                        for bucket, members in buckets.items()]))
    return 0


# --------------------------------------------------------------- baseline

def cmd_baseline_head_lemma(args) -> int:
    docs = read_document_jsonl(args.input, strict=args.strict)
    lemmas_by_doc: dict[str, dict] = {}
    if args.lemmas:
        with open(args.lemmas, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                doc_id, mention_id, lemma = line.split("\t")
                lemmas_by_doc.setdefault(doc_id, {})[mention_id] = lemma
    records = []
    for doc in docs:
        mentions = headed_mentions(doc, lemmas_by_doc.get(doc.doc_id))
        clustering = head_lemma_baseline(mentions)
        records.append({"doc_id": doc.doc_id,
                        "clusters": [sorted(c) for c in clustering.clusters]})
    write_records(records, args.clusters_out)
    print(f"clustered {len(records)} documents -> {args.clusters_out}")
    return 0


# ----------------------------------------------------------- replace-names

def _read_pool(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return [line.strip() for line in handle if line.strip()]


def cmd_replace_names(args) -> int:
    docs = read_document_jsonl(args.input, strict=args.strict)
    if args.invert:
        if not args.mapping:
            raise CorefError("--invert requires --mapping")
        mapping = mapping_from_tsv(Path(args.mapping).read_text(encoding="utf-8"))
        restored = apply_mapping(docs, invert_mapping(mapping))
        write_document_jsonl(restored, args.out)
        print(f"restored {len(restored)} documents -> {args.out}")
        return 0

    pools = {}
    for spec_pair in args.pool:
        label, sep, path = spec_pair.partition("=")
        if not sep:
            raise CorefError(f"--pool expects label=path, got {spec_pair!r}")
        pools[label] = _read_pool(path)
    groups = {}
    with open(args.groups, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            speaker, group = line.split("\t")
            groups[speaker] = group
    plan = build_replacement_plan(docs, pools, groups, seed=args.seed)
    renamed, mapping = replace_names(docs, plan)
    write_document_jsonl(renamed, args.out)
    if args.mapping_out:
        Path(args.mapping_out).write_text(mapping_to_tsv(mapping),
                                          encoding="utf-8")
    print(f"renamed speakers in {len(renamed)} documents -> {args.out}")
    return 0


# -------------------------------------------------------------- loss-check

def cmd_loss_check(args) -> int:
    import random as _random

    import numpy as np

    from .loss import (
        DEFAULT_LOSS_CONFIGS,
        AntecedentBatch,
        MentionBatch,
        binary_cross_entropy,
        cluster_loss,
        mention_loss,
    )

    rng = _random.Random(args.seed)
    failures = []

    for _ in range(50):
        batch = MentionBatch(
            pos_probs=np.array([rng.random() for _ in range(rng.randint(1, 8))]),
            neg_probs=np.array([rng.random() for _ in range(rng.randint(1, 8))]))
        value, _, _ = mention_loss(batch, tau=1.0)
        if abs(value - binary_cross_entropy(batch)) > 1e-12:
            failures.append("tau=1 deviates from plain BCE")
            break
    print("tau=1 == binary cross-entropy:", "ok" if not failures else "FAIL")

    gradient_ok = True
    for _ in range(20):
        scores = np.array([rng.uniform(-3, 3) for _ in range(rng.randint(2, 6))])
        gold = (rng.randrange(len(scores)),)
        batch = AntecedentBatch(scores=(scores,), gold=(gold,))
        _, grads = cluster_loss(batch)
        h = 1e-5
        for i in range(len(scores)):
            bumped = scores.copy()
            bumped[i] += h
            up, _ = cluster_loss(AntecedentBatch((bumped,), (gold,)))
            bumped[i] -= 2 * h
            down, _ = cluster_loss(AntecedentBatch((bumped,), (gold,)))
            numeric = (up - down) / (2 * h)
            if abs(grads[0][i] - numeric) / max(abs(numeric), 1e-6) > 1e-4:
                gradient_ok = False
    print("cluster-loss gradients vs finite differences:",
          "ok" if gradient_ok else "FAIL")
    if not gradient_ok:
        failures.append("gradient check failed")

    print(format_table(["profile", "tau", "alpha_m"],
                       [(name, cfg.tau, cfg.alpha_m)
                        for name, cfg in DEFAULT_LOSS_CONFIGS.items()]))
    if failures:
        for failure in failures:
            print(f"loss-check failure: {failure}", file=sys.stderr)
        return 1
    return 0


# ------------------------------------------------------------------ serve

def cmd_serve(args) -> int:
    from .service import serve
    serve(args.data_dir, args.port, cors_origin=args.cors_origin,
          host=args.host, ui_dir=args.ui_dir)
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosscoref",
        description="Cross-lingual coreference projection, adjudication, "
                    "and scoring toolkit")
    parser.add_argument("--config", help="key=value file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=default_seed(),
                       help=f"random seed (default {DEFAULT_SEED}, or "
                            f"${SEED_ENV_VAR})")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker threads for per-document work")
        p.add_argument("--strict", action=argparse.BooleanOptionalAction,
                       default=True, help="reject invalid documents on read")

    p = sub.add_parser("project", help="project mentions through alignments")
    common(p)
    p.add_argument("--parallel", required=True,
                   help="parallel documents (JSONL)")
    p.add_argument("--alignments", required=True,
                   help="concatenated Pharaoh word alignments")
    p.add_argument("--lang", required=True, help="target language tag")
    p.add_argument("--split-policy", default="drop_split",
                   choices=[p.value for p in SplitPolicy])
    p.add_argument("--out", help="projected target documents (JSONL)")
    p.add_argument("--bundle", help="projection bundle with provenance (JSONL)")
    p.add_argument("--stats-tsv", help="write the stats report as TSV")
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("corrections", help="work with correction logs")
    corrections_sub = p.add_subparsers(dest="subcommand", required=True)
    pa = corrections_sub.add_parser("apply", help="replay a correction log")
    common(pa)
    pa.add_argument("--bundle", required=True, help="projection bundle (JSONL)")
    pa.add_argument("--log", required=True, help="correction log (JSONL)")
    pa.add_argument("--out", required=True, help="corrected documents (JSONL)")
    pa.set_defaults(fn=cmd_corrections_apply)

    p = sub.add_parser("merge", help="merge two-way annotations")
    common(p)
    p.add_argument("--triplets", required=True,
                   help="annotation triplets (JSONL, optional doc_id field)")
    p.add_argument("--clusters-out", help="agreed clusters (JSONL)")
    p.add_argument("--queue-out", help="disagreement queue (JSONL)")
    p.set_defaults(fn=cmd_merge)

    p = sub.add_parser("adjudicate", help="export or apply adjudications")
    adjudicate_sub = p.add_subparsers(dest="subcommand", required=True)
    pe = adjudicate_sub.add_parser("export", help="export the disagreement queue")
    common(pe)
    pe.add_argument("--triplets", required=True,
                    help="annotation triplets (JSONL)")
    pe.add_argument("--queue-out", required=True,
                    help="disagreement queue output (JSONL)")
    pe.set_defaults(fn=cmd_adjudicate_export)
    pa = adjudicate_sub.add_parser("apply", help="apply adjudication decisions")
    common(pa)
    pa.add_argument("--triplets", required=True,
                    help="annotation triplets (JSONL)")
    pa.add_argument("--decisions", required=True,
                    help="adjudication decisions (JSONL)")
    pa.add_argument("--clusters-out", help="final clusters output (JSONL)")
    pa.add_argument("--queue-out", help="remaining disagreements (JSONL)")
    pa.set_defaults(fn=cmd_adjudicate_apply)

    p = sub.add_parser("score", help="score a response against a key")
    common(p)
    p.add_argument("--key", required=True, help="gold clustering file")
    p.add_argument("--response", required=True, help="system clustering file")
    p.add_argument("--format", default="jsonl", choices=["jsonl", "conll"],
                   help="input file format (default jsonl)")
    p.add_argument("--split-policy", default="drop_split",
                   choices=[s.value for s in SplitPolicy],
                   help="split-antecedent handling (default drop_split)")
    p.add_argument("--drop-singletons", action="store_true",
                   help="strip singleton clusters before scoring")
    p.add_argument("--macro", action="store_true",
                   help="macro-average over documents (default: micro)")
    p.add_argument("--tsv", help="write the score table as TSV")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("stats", help="corpus and projection reports")
    stats_sub = p.add_subparsers(dest="subcommand", required=True)
    pp = stats_sub.add_parser("projection", help="projection drop rates")
    common(pp)
    pp.add_argument("--bundle", required=True,
                    help="projection bundle (JSONL)")
    pp.add_argument("--corrections", help="correction log for corrected counts")
    pp.add_argument("--tsv", help="write the report as TSV")
    pp.set_defaults(fn=cmd_stats_projection)
    pc = stats_sub.add_parser("corpus", help="three-way filtering report")
    common(pc)
    pc.add_argument("--source", required=True,
                    help="source-language documents (JSONL)")
    pc.add_argument("--target", action="append", default=[],
                    metavar="LANG=PATH", required=True)
    pc.add_argument("--maps", required=True,
                    help="utterance maps (JSONL: lang, episode, scene, map)")
    pc.add_argument("--threshold", type=float, default=0.5,
                    help="minimum fraction of fully aligned utterances")
    pc.add_argument("--kept-out", help="write surviving parallel scenes")
    pc.add_argument("--tsv", help="write the report as TSV")
    pc.set_defaults(fn=cmd_stats_corpus)
    ps = stats_sub.add_parser("speakers", help="speaker-count partition sizes")
    common(ps)
    ps.add_argument("--input", required=True, help="documents (JSONL)")
    ps.set_defaults(fn=cmd_stats_speakers)

    p = sub.add_parser("baseline", help="reference baselines")
    baseline_sub = p.add_subparsers(dest="subcommand", required=True)
    ph = baseline_sub.add_parser("head-lemma",
                                 help="cluster mentions by head lemma")
    common(ph)
    ph.add_argument("--input", required=True, help="documents (JSONL)")
    ph.add_argument("--lemmas", help="TSV of doc_id, mention_id, lemma")
    ph.add_argument("--clusters-out", required=True,
                    help="clusters output (JSONL)")
    ph.set_defaults(fn=cmd_baseline_head_lemma)

    p = sub.add_parser("replace-names", help="randomize speaker names")
    common(p)
    p.add_argument("--input", required=True, help="documents (JSONL)")
    p.add_argument("--out", required=True, help="renamed documents (JSONL)")
    p.add_argument("--pool", action="append", default=[], metavar="LABEL=PATH",
                   help="name pool file, one name per line")
    p.add_argument("--groups", help="TSV of speaker and group label")
    p.add_argument("--mapping-out", help="write scene/original/replacement TSV")
    p.add_argument("--invert", action="store_true",
                   help="apply a mapping in reverse to restore originals")
    p.add_argument("--mapping", help="mapping TSV for --invert")
    p.set_defaults(fn=cmd_replace_names)

    p = sub.add_parser("loss-check", help="self-test the loss kernel")
    common(p)
    p.set_defaults(fn=cmd_loss_check)

    p = sub.add_parser("serve", help="start the review service")
    common(p)
    p.add_argument("--data-dir", required=True,
                   help="directory with projections.jsonl / triplets.jsonl; "
                        "logs are appended here")
    p.add_argument("--port", type=int, default=8571,
                   help="listen port (default 8571)")
    p.add_argument("--host", default="127.0.0.1",
                   help="bind address (default 127.0.0.1)")
    p.add_argument("--cors-origin", default="*",
                   help="Access-Control-Allow-Origin value (default *)")
    p.add_argument("--ui-dir",
                   help="serve this directory's static files at /")
    p.set_defaults(fn=cmd_serve)

    return parser


_CONFIG_KEYS = {
    "seed": ("seed", int),
    "jobs": ("jobs", int),
    "strict": ("strict", lambda v: v.lower() in ("1", "true", "yes")),
    "threshold": ("threshold", float),
    "split_policy": ("split_policy", str),
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    # peek at --config so its values become flag defaults
    if "--config" in argv:
        index = argv.index("--config")
        try:
            config_path = argv[index + 1]
        except IndexError:
            parser.error("--config expects a path")
        try:
            config = load_config(config_path)
        except (OSError, CorefError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        defaults = {}
        for key, value in config.items():
            if key in _CONFIG_KEYS:
                dest, cast = _CONFIG_KEYS[key]
                try:
                    defaults[dest] = cast(value)
                except ValueError:
                    print(f"error: bad config value {key}={value!r}",
                          file=sys.stderr)
                    return 1
        for action in parser._subparsers._group_actions:
            if hasattr(action, "choices") and action.choices:
                for sub_parser in action.choices.values():
                    sub_parser.set_defaults(**{
                        k: v for k, v in defaults.items()
                        if k in {a.dest for a in sub_parser._actions}})
                    if sub_parser._subparsers:
                        for nested_action in sub_parser._subparsers._group_actions:
                            for nested in nested_action.choices.values():
                                nested.set_defaults(**{
                                    k: v for k, v in defaults.items()
                                    if k in {a.dest for a in nested._actions}})

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CorefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
