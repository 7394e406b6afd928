"""Parallel corpus assembly: utterance-aligned document pairs, Pharaoh
word alignments, and the three-way scene filtering pipeline.

Utterance alignment is 1:0/1:1 only; subtitle lines that merge several
source utterances must be pre-merged upstream. Word alignments are
consumed, not produced: they arrive in the standard Pharaoh text format,
one line of whitespace-separated "i-j" token index pairs per aligned
utterance pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import CorefError, Document, validate_document
from .jsonl import JsonlError, canonical_json, document_from_record, document_to_record

SceneKey = tuple[str, str]


class ParallelError(CorefError):
    pass


class PharaohError(CorefError):
    """Malformed or out-of-range alignment data; names file and line."""

    def __init__(self, message: str, path=None, line_no: int | None = None):
        self.path = path
        self.line_no = line_no
        where = f"{path}:{line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class ParallelDocument:
    """A source scene with its utterance-aligned target-language twins.

    ``utterance_map[lang][i]`` is the target utterance index aligned to
    source utterance ``i``, or None when the utterance has no counterpart.
    Non-null entries are injective (two source utterances never share a
    target line).
    """

    source: Document
    targets: dict[str, Document]
    utterance_map: dict[str, tuple]

    def __post_init__(self):
        n_source = len(self.source.utterances)
        normalized = {lang: tuple(mapping)
                      for lang, mapping in self.utterance_map.items()}
        object.__setattr__(self, "utterance_map", normalized)
        for lang, mapping in normalized.items():
            if lang not in self.targets:
                raise ParallelError(f"utterance map for unknown language {lang!r}")
            if len(mapping) != n_source:
                raise ParallelError(
                    f"{self.source.doc_id}: utterance map for {lang!r} has "
                    f"{len(mapping)} entries for {n_source} source utterances")
            n_target = len(self.targets[lang].utterances)
            non_null = [i for i in mapping if i is not None]
            if any(not (0 <= i < n_target) for i in non_null):
                raise ParallelError(
                    f"{self.source.doc_id}: utterance map for {lang!r} points "
                    "outside the target document")
            if len(set(non_null)) != len(non_null):
                raise ParallelError(
                    f"{self.source.doc_id}: utterance map for {lang!r} is "
                    "not injective")

    def aligned_pairs(self, lang: str) -> list[tuple[int, int]]:
        """(source_utt, target_utt) pairs in source order."""
        return [(s, t) for s, t in enumerate(self.utterance_map[lang])
                if t is not None]


@dataclass(frozen=True)
class AlignmentSet:
    """Per utterance pair: the set of (source_token, target_token) links."""

    links: dict

    def __post_init__(self):
        object.__setattr__(self, "links", {
            pair: frozenset(tuple(p) for p in pairs)
            for pair, pairs in self.links.items()
        })

    def for_pair(self, source_utt: int, target_utt: int) -> frozenset:
        return self.links.get((source_utt, target_utt), frozenset())


def parse_pharaoh_line(line: str) -> set[tuple[int, int]]:
    """Parse one "i-j i-j ..." line; blank means no links."""
    links = set()
    for token in line.split():
        left, dash, right = token.partition("-")
        if not dash or not left.isdigit() or not right.isdigit():
            raise PharaohError(f"bad alignment token {token!r}")
        links.add((int(left), int(right)))
    return links


def read_pharaoh_alignments(path, parallel: ParallelDocument,
                            lang: str) -> AlignmentSet:
    """Read word alignments for one language side of a parallel scene.

    The file holds one line per aligned utterance pair, in source order;
    blank lines are empty alignments. Token indices are validated against
    both utterances.
    """
    pairs = parallel.aligned_pairs(lang)
    target = parallel.targets[lang]
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if len(lines) != len(pairs):
        raise PharaohError(
            f"{len(lines)} alignment lines for {len(pairs)} aligned "
            f"utterance pairs", path)

    links = {}
    for line_no, ((s, t), line) in enumerate(zip(pairs, lines), start=1):
        try:
            parsed = parse_pharaoh_line(line)
        except PharaohError as exc:
            raise PharaohError(str(exc), path, line_no) from exc
        n_src = len(parallel.source.utterances[s].tokens)
        n_tgt = len(target.utterances[t].tokens)
        for i, j in parsed:
            if i >= n_src or j >= n_tgt:
                raise PharaohError(
                    f"OUT_OF_RANGE: link {i}-{j} for utterance pair "
                    f"({s},{t}) with {n_src} source / {n_tgt} target tokens",
                    path, line_no)
        links[(s, t)] = parsed
    return AlignmentSet(links)


def write_pharaoh_alignments(alignments: AlignmentSet,
                             parallel: ParallelDocument, lang: str,
                             path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for s, t in parallel.aligned_pairs(lang):
            pairs = sorted(alignments.for_pair(s, t))
            handle.write(" ".join(f"{i}-{j}" for i, j in pairs) + "\n")


def read_pharaoh_corpus(path, parallels: Sequence[ParallelDocument],
                        lang: str) -> dict:
    """Read one concatenated Pharaoh file covering many scenes.

    Lines are consumed in scene order, one per aligned utterance pair of
    each scene. Returns {source doc_id -> AlignmentSet}.
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    expected = sum(len(p.aligned_pairs(lang)) for p in parallels)
    if len(lines) != expected:
        raise PharaohError(
            f"{len(lines)} alignment lines for {expected} aligned "
            f"utterance pairs across {len(parallels)} scenes", path)
    out = {}
    cursor = 0
    for parallel in parallels:
        links = {}
        for line_no, (s, t) in enumerate(parallel.aligned_pairs(lang),
                                         start=cursor + 1):
            line = lines[line_no - 1]
            try:
                parsed = parse_pharaoh_line(line)
            except PharaohError as exc:
                raise PharaohError(str(exc), path, line_no) from exc
            n_src = len(parallel.source.utterances[s].tokens)
            n_tgt = len(parallel.targets[lang].utterances[t].tokens)
            for i, j in parsed:
                if i >= n_src or j >= n_tgt:
                    raise PharaohError(
                        f"OUT_OF_RANGE: link {i}-{j} for utterance pair "
                        f"({s},{t}) of {parallel.source.doc_id}",
                        path, line_no)
            links[(s, t)] = parsed
        cursor += len(parallel.aligned_pairs(lang))
        out[parallel.source.doc_id] = AlignmentSet(links)
    return out


def write_pharaoh_corpus(alignments_by_doc: Mapping[str, AlignmentSet],
                         parallels: Sequence[ParallelDocument], lang: str,
                         path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for parallel in parallels:
            alignments = alignments_by_doc[parallel.source.doc_id]
            for s, t in parallel.aligned_pairs(lang):
                pairs = sorted(alignments.for_pair(s, t))
                handle.write(" ".join(f"{i}-{j}" for i, j in pairs) + "\n")


def scene_key(doc: Document) -> SceneKey:
    """(episode, scene) key from document metadata."""
    try:
        return (doc.metadata["episode"], doc.metadata["scene"])
    except KeyError as exc:
        raise ParallelError(
            f"document {doc.doc_id!r} lacks episode/scene metadata") from exc


@dataclass
class FilterReport:
    """Scene bookkeeping for the three-way assembly pipeline.

    ``kept + dropped_empty + dropped_misaligned == three_way`` always;
    per-scene outcomes are recorded for auditability.
    """

    source_scenes: int = 0
    two_way: int = 0
    three_way: int = 0
    kept: int = 0
    dropped_empty: int = 0
    dropped_misaligned: int = 0
    reasons: dict = field(default_factory=dict)

    def rows(self) -> list[tuple[str, int]]:
        return [("source", self.source_scenes),
                ("2-way", self.two_way),
                ("3-way", self.three_way),
                ("dropped_empty", self.dropped_empty),
                ("dropped_misaligned", self.dropped_misaligned),
                ("final", self.kept)]


def _entirely_empty(doc: Document) -> bool:
    return all(not u.tokens for u in doc.utterances)


def assemble_three_way(
    source_docs: Sequence[Document],
    target_docs_by_lang: Mapping[str, Sequence[Document]],
    utterance_alignments: Mapping[str, Mapping[SceneKey, Sequence]],
    min_aligned_fraction: float = 0.5,
) -> tuple[list[ParallelDocument], FilterReport]:
    """Keep scenes that exist in every language and align well enough.

    A scene survives when (a) it is present in the source and every
    target language, (b) no language side is entirely empty, and (c) the
    fraction of source utterances with a non-null counterpart in *every*
    target reaches ``min_aligned_fraction``.
    """
    by_key_source: dict[SceneKey, Document] = {}
    for doc in source_docs:
        key = scene_key(doc)
        if key in by_key_source:
            raise ParallelError(f"duplicate source scene key {key}")
        by_key_source[key] = doc

    by_key_targets: dict[str, dict[SceneKey, Document]] = {}
    for lang, docs in target_docs_by_lang.items():
        table: dict[SceneKey, Document] = {}
        for doc in docs:
            key = scene_key(doc)
            if key in table:
                raise ParallelError(f"duplicate {lang} scene key {key}")
            table[key] = doc
        by_key_targets[lang] = table

    langs = sorted(by_key_targets)
    report = FilterReport(source_scenes=len(by_key_source))
    kept_docs = []
    for key, source in by_key_source.items():
        present = [lang for lang in langs if key in by_key_targets[lang]]
        if present:
            report.two_way += 1
        if len(present) < len(langs):
            report.reasons[key] = "not_three_way"
            continue
        report.three_way += 1

        maps = {}
        for lang in langs:
            try:
                maps[lang] = tuple(utterance_alignments[lang][key])
            except KeyError as exc:
                raise ParallelError(
                    f"missing utterance alignment for scene {key} "
                    f"in {lang!r}") from exc

        sides = [source] + [by_key_targets[lang][key] for lang in langs]
        if any(_entirely_empty(doc) for doc in sides):
            report.dropped_empty += 1
            report.reasons[key] = "dropped_empty"
            continue

        n_source = len(source.utterances)
        aligned_everywhere = sum(
            1 for i in range(n_source)
            if all(maps[lang][i] is not None for lang in langs))
        fraction = aligned_everywhere / n_source if n_source else 0.0
        if fraction < min_aligned_fraction:
            report.dropped_misaligned += 1
            report.reasons[key] = "dropped_misaligned"
            continue

        report.kept += 1
        report.reasons[key] = "kept"
        kept_docs.append(ParallelDocument(
            source=source,
            targets={lang: by_key_targets[lang][key] for lang in langs},
            utterance_map=maps,
        ))
    return kept_docs, report


def parallel_to_record(parallel: ParallelDocument) -> dict:
    return {
        "source": document_to_record(parallel.source),
        "targets": {lang: document_to_record(doc)
                    for lang, doc in sorted(parallel.targets.items())},
        "utterance_map": {lang: list(mapping)
                          for lang, mapping in sorted(parallel.utterance_map.items())},
    }


def parallel_from_record(record: dict) -> ParallelDocument:
    return ParallelDocument(
        source=document_from_record(record["source"]),
        targets={lang: document_from_record(rec)
                 for lang, rec in record["targets"].items()},
        utterance_map={lang: tuple(mapping)
                       for lang, mapping in record["utterance_map"].items()},
    )


def write_parallel_jsonl(parallels: Iterable[ParallelDocument], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for parallel in parallels:
            handle.write(canonical_json(parallel_to_record(parallel)) + "\n")


def read_parallel_jsonl(path, strict: bool = True) -> list[ParallelDocument]:
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                parallel = parallel_from_record(json.loads(line))
            except (json.JSONDecodeError, KeyError, JsonlError,
                    ParallelError) as exc:
                raise JsonlError(f"bad parallel record: {exc}", path,
                                 line_no) from exc
            if strict:
                sides = [parallel.source] + list(parallel.targets.values())
                for doc in sides:
                    violations = validate_document(doc)
                    if violations:
                        codes = ", ".join(v.code for v in violations)
                        raise JsonlError(
                            f"document {doc.doc_id!r} violates invariants: "
                            f"{codes}", path, line_no)
            out.append(parallel)
    return out
