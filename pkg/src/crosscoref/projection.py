"""Span projection through word alignments, plus human corrections.

A source mention projects to the smallest contiguous target span
containing every target token aligned to any of its source tokens.
Mentions whose aligned token set is empty (or whose utterance has no
counterpart) become *null projections*: nothing is created on the
target side, and antecedent links are contracted through the hole so
the entity clusters survive implicitly.

Human corrections (addition / deletion / modification) repair the
automatic output; the correction log is append-only and replayable.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import (
    CorefError,
    Document,
    Mention,
    MentionKind,
    SplitPolicy,
    build_clusters,
    validate_document,
    with_mentions,
)
from .jsonl import JsonlError, canonical_json, document_from_record, document_to_record
from .parallel import AlignmentSet, ParallelDocument

logger = logging.getLogger(__name__)


class ProjectionStatus(enum.Enum):
    PROJECTED = "projected"
    NULL_PROJECTION = "null_projection"


class ProjectionError(CorefError):
    pass


class CorrectionError(CorefError):
    pass


@dataclass(frozen=True)
class ProvenanceEntry:
    source_id: str
    status: ProjectionStatus


@dataclass(frozen=True)
class ProjectionStats:
    source_mentions: int
    projected: int
    null_projections: int
    clusters_source: int
    clusters_surviving: int

    def __post_init__(self):
        if self.projected + self.null_projections != self.source_mentions:
            raise ProjectionError("projected + null projections must equal "
                                  "source mention count")

    @property
    def null_rate(self) -> float:
        if self.source_mentions == 0:
            return 0.0
        return self.null_projections / self.source_mentions


@dataclass(frozen=True)
class ProjectionResult:
    """Projected target document plus per-mention provenance.

    Projected mentions keep their source mention id, so ``provenance``
    maps that shared id to its status; every source mention appears
    exactly once. The source document rides along because corrections
    re-derive link structure from it.
    """

    target_doc: Document
    provenance: dict
    stats: ProjectionStats
    source_doc: Document
    language: str


def project_span(start: int, end: int, links) -> tuple[int, int] | None:
    """Project [start, end) through token alignment links.

    Returns the contiguous hull [min, max+1) of all target tokens aligned
    to source tokens in the span, or None when no token aligns (a null
    projection).
    """
    aligned = [j for i, j in links if start <= i < end]
    if not aligned:
        return None
    return (min(aligned), max(aligned) + 1)


def project_document(parallel: ParallelDocument, alignments: AlignmentSet,
                     lang: str,
                     split_policy: SplitPolicy = SplitPolicy.DROP_SPLIT,
                     ) -> ProjectionResult:
    """Project every source mention into the target language.

    SPAN mentions go through ``project_span`` on their aligned utterance
    pair (null when the utterance has no counterpart, is an empty
    placeholder, or no token aligns). SPEAKER mentions copy over whenever
    the target utterance exists. Antecedent links are rewritten over the
    surviving mentions by contracting through dropped ones. The entity
    clusters are thereby implicitly projected; ``split_policy`` only
    affects the cluster counts in ``stats``.
    """
    if lang not in parallel.targets:
        raise ProjectionError(f"no target document for language {lang!r}")
    source = parallel.source
    target = parallel.targets[lang]
    mapping = parallel.utterance_map[lang]
    for s, t in alignments.links:
        if s >= len(mapping) or mapping[s] != t:
            raise ProjectionError(
                f"alignment for unmapped utterance pair ({s},{t})")

    provenance: dict[str, ProvenanceEntry] = {}
    spans: dict[str, tuple[int, int, int]] = {}
    taken_spans: set[tuple[int, int, int]] = set()
    survivors: list[Mention] = []
    for mention in source.mentions:
        t = mapping[mention.utt_index]
        projected: tuple[int, int, int] | None = None
        if t is not None:
            if mention.kind is MentionKind.SPEAKER:
                projected = (t, None, None)
            elif not target.utterances[t].empty:
                links = alignments.for_pair(mention.utt_index, t)
                hull = project_span(mention.start, mention.end, links)
                if hull is not None:
                    candidate = (t, hull[0], hull[1])
                    # two sources may hull to one span; only one can exist
                    if candidate not in taken_spans:
                        projected = candidate
        if projected is None:
            provenance[mention.id] = ProvenanceEntry(
                mention.id, ProjectionStatus.NULL_PROJECTION)
            continue
        provenance[mention.id] = ProvenanceEntry(
            mention.id, ProjectionStatus.PROJECTED)
        spans[mention.id] = projected
        if mention.kind is MentionKind.SPAN:
            taken_spans.add(projected)
        survivors.append(mention)

    surviving_ids = {m.id for m in survivors}
    source_by_id = source.mentions_by_id()
    mentions = []
    for mention in survivors:
        utt, start, end = spans[mention.id]
        mentions.append(Mention(
            id=mention.id,
            kind=mention.kind,
            utt_index=utt,
            start=start,
            end=end,
            antecedents=contract_links(mention, surviving_ids, source_by_id),
            flags=mention.flags,
        ))

    target_doc = with_mentions(target, mentions)
    problems = validate_document(target_doc)
    if problems:
        codes = ", ".join(v.code for v in problems)
        raise ProjectionError(f"projected document is invalid: {codes}")

    source_clusters = build_clusters(source, split_policy)
    surviving_clusters = sum(
        1 for cluster in source_clusters.clusters if cluster & surviving_ids)
    stats = ProjectionStats(
        source_mentions=len(source.mentions),
        projected=len(survivors),
        null_projections=len(source.mentions) - len(survivors),
        clusters_source=len(source_clusters),
        clusters_surviving=surviving_clusters,
    )
    return ProjectionResult(target_doc=target_doc, provenance=provenance,
                            stats=stats, source_doc=source, language=lang)


def contract_links(mention: Mention, surviving: set, by_id: Mapping[str, Mention],
                   ) -> tuple[str, ...]:
    """Rewrite antecedent links over the surviving mention set.

    A link to a dropped mention follows that mention's own links until it
    reaches survivors (the nearest surviving transitive antecedents);
    links that dead-end disappear.
    """
    out: list[str] = []
    seen_out = set()

    def resolve(ant_id: str, visited: frozenset):
        if ant_id in visited:
            return
        if ant_id in surviving:
            if ant_id not in seen_out:
                seen_out.add(ant_id)
                out.append(ant_id)
            return
        ancestor = by_id.get(ant_id)
        if ancestor is None:
            return
        for nxt in ancestor.antecedents:
            resolve(nxt, visited | {ant_id})

    for ant in mention.antecedents:
        resolve(ant, frozenset({mention.id}))
    return tuple(out)


class CorrectionAction(enum.Enum):
    ADDITION = "addition"
    DELETION = "deletion"
    MODIFICATION = "modification"


@dataclass(frozen=True)
class Correction:
    """One human repair of a projected annotation.

    ``mention_id`` names the target mention for DELETION/MODIFICATION and
    the source mention for ADDITION (projection keeps ids aligned, so the
    two spaces coincide). ``span`` is (utt, start, end) in the target
    document; a missing or empty span on a MODIFICATION means "remove"
    and is normalized to DELETION at construction.
    """

    action: CorrectionAction
    mention_id: str
    span: tuple[int, int, int] | None = None
    annotator: str = ""
    timestamp_ms: int = 0

    def __post_init__(self):
        span = self.span
        if span is not None:
            span = tuple(int(v) for v in span)
            if span[1] >= span[2]:
                span = None
            object.__setattr__(self, "span", span)
        if self.action is CorrectionAction.ADDITION and span is None:
            raise CorrectionError(
                f"ADDITION for {self.mention_id!r} carries no span")
        if self.action is CorrectionAction.MODIFICATION and span is None:
            object.__setattr__(self, "action", CorrectionAction.DELETION)


def correction_to_record(c: Correction) -> dict:
    return {
        "action": c.action.value,
        "mention_id": c.mention_id,
        "span": list(c.span) if c.span is not None else None,
        "annotator": c.annotator,
        "timestamp_ms": c.timestamp_ms,
    }


def correction_from_record(record: dict) -> Correction:
    try:
        span = record.get("span")
        return Correction(
            action=CorrectionAction(record["action"]),
            mention_id=str(record["mention_id"]),
            span=tuple(span) if span is not None else None,
            annotator=str(record.get("annotator", "")),
            timestamp_ms=int(record.get("timestamp_ms", 0)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise CorrectionError(f"bad correction record: {exc}") from exc


def write_correction_log(corrections: Iterable[Correction], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for c in corrections:
            handle.write(canonical_json(correction_to_record(c)) + "\n")


def read_correction_log(path) -> list[Correction]:
    """Read a correction log; accepts both bare correction records and
    the review service's wrapped form {"task_id": ..., "correction": ...}."""
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                if "correction" in record:
                    record = record["correction"]
                out.append(correction_from_record(record))
            except (json.JSONDecodeError, CorrectionError) as exc:
                raise CorrectionError(f"{path}:{line_no}: {exc}") from exc
    return out


def apply_corrections(result: ProjectionResult,
                      log: Sequence[Correction]) -> Document:
    """Replay a correction log over a projection result.

    Corrections are ordered by (timestamp, log position) and the latest
    one wins per mention, so replaying a log twice equals replaying it
    once. ADDITION resurrects a null projection with the annotated span
    (inheriting the source mention's cluster membership through link
    contraction), DELETION drops a mention and contracts links through
    it, MODIFICATION rewrites boundaries. The corrected document is
    revalidated before it is returned.
    """
    ordered = sorted(enumerate(log), key=lambda p: (p[1].timestamp_ms, p[0]))
    winners: dict[str, Correction] = {}
    for _, correction in ordered:
        previous = winners.get(correction.mention_id)
        if (previous is not None
                and correction.action is CorrectionAction.ADDITION
                and previous.action is CorrectionAction.ADDITION):
            logger.warning("duplicate ADDITION for %s; keeping the latest",
                           correction.mention_id)
        winners[correction.mention_id] = correction

    source_by_id = result.source_doc.mentions_by_id()
    known = set(result.provenance) | set(source_by_id)
    base_spans = {m.id: (m.utt_index, m.start, m.end)
                  for m in result.target_doc.mentions}
    surviving = set(base_spans)
    spans = dict(base_spans)

    for mention_id, correction in winners.items():
        if mention_id not in known:
            raise CorrectionError(
                f"correction for unknown mention {mention_id!r}: "
                f"{correction_to_record(correction)}")
        if correction.action is CorrectionAction.DELETION:
            surviving.discard(mention_id)
        elif correction.action is CorrectionAction.ADDITION:
            if mention_id in base_spans:
                logger.warning("ADDITION for already-projected mention %s "
                               "overrides its span", mention_id)
            surviving.add(mention_id)
            spans[mention_id] = correction.span
        else:  # MODIFICATION
            if mention_id not in surviving:
                raise CorrectionError(
                    f"MODIFICATION for absent mention {mention_id!r}")
            spans[mention_id] = correction.span

    source_order = {m.id: i for i, m in enumerate(result.source_doc.mentions)}
    mentions = []
    for mention_id in sorted(surviving, key=lambda i: source_order.get(i, 1 << 30)):
        source_mention = source_by_id.get(mention_id)
        kind = source_mention.kind if source_mention else MentionKind.SPAN
        utt, start, end = spans[mention_id]
        if kind is MentionKind.SPEAKER:
            start = end = None
        antecedents = ()
        flags = frozenset()
        if source_mention is not None:
            antecedents = contract_links(source_mention, surviving, source_by_id)
            flags = source_mention.flags
        mentions.append(Mention(id=mention_id, kind=kind, utt_index=utt,
                                start=start, end=end,
                                antecedents=antecedents, flags=flags))

    corrected = with_mentions(result.target_doc, mentions)
    problems = validate_document(corrected)
    if problems:
        codes = ", ".join(f"{v.code}({v.mention_id})" for v in problems)
        raise CorrectionError(f"corrected document is invalid: {codes}")
    return corrected


def projection_result_to_record(result: ProjectionResult) -> dict:
    return {
        "language": result.language,
        "source": document_to_record(result.source_doc),
        "target": document_to_record(result.target_doc),
        "provenance": {
            mid: entry.status.value
            for mid, entry in sorted(result.provenance.items())
        },
        "stats": {
            "source_mentions": result.stats.source_mentions,
            "projected": result.stats.projected,
            "null_projections": result.stats.null_projections,
            "clusters_source": result.stats.clusters_source,
            "clusters_surviving": result.stats.clusters_surviving,
        },
    }


def projection_result_from_record(record: dict) -> ProjectionResult:
    try:
        stats = ProjectionStats(**record["stats"])
        return ProjectionResult(
            target_doc=document_from_record(record["target"]),
            provenance={
                mid: ProvenanceEntry(mid, ProjectionStatus(status))
                for mid, status in record["provenance"].items()
            },
            stats=stats,
            source_doc=document_from_record(record["source"]),
            language=str(record["language"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProjectionError(f"bad projection record: {exc}") from exc


def write_projection_bundle(results: Iterable[ProjectionResult], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for result in results:
            handle.write(canonical_json(projection_result_to_record(result)) + "\n")


def read_projection_bundle(path) -> list[ProjectionResult]:
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(projection_result_from_record(json.loads(line)))
            except (json.JSONDecodeError, ProjectionError) as exc:
                raise JsonlError(f"bad projection record: {exc}", path,
                                 line_no) from exc
    return out


@dataclass(frozen=True)
class StatsRow:
    group: str
    scenes: int
    source_mentions: int
    projected: int
    null_projections: int
    clusters_source: int
    clusters_surviving: int
    corrected: int | None = None

    @property
    def null_rate(self) -> float:
        if self.source_mentions == 0:
            return 0.0
        return self.null_projections / self.source_mentions

    @property
    def corrected_rate(self) -> float:
        if not self.projected or self.corrected is None:
            return 0.0
        return self.corrected / self.projected


def projection_stats_report(results: Sequence[ProjectionResult],
                            corrections: Mapping[str, Sequence[Correction]] | None = None,
                            ) -> list[StatsRow]:
    """Aggregate projection statistics per target language plus a total row.

    ``corrections`` optionally maps target doc_id to its correction log;
    when given, the rows carry correction counts and rates.
    """
    groups: dict[str, list[ProjectionResult]] = {}
    for result in results:
        groups.setdefault(result.language, []).append(result)

    def make_row(name: str, members: Sequence[ProjectionResult]) -> StatsRow:
        corrected = None
        if corrections is not None:
            corrected = sum(len(corrections.get(r.target_doc.doc_id, ()))
                            for r in members)
        return StatsRow(
            group=name,
            scenes=len(members),
            source_mentions=sum(r.stats.source_mentions for r in members),
            projected=sum(r.stats.projected for r in members),
            null_projections=sum(r.stats.null_projections for r in members),
            clusters_source=sum(r.stats.clusters_source for r in members),
            clusters_surviving=sum(r.stats.clusters_surviving for r in members),
            corrected=corrected,
        )

    rows = [make_row(lang, members) for lang, members in sorted(groups.items())]
    rows.append(make_row("all", list(results)))
    return rows


def stats_report_tsv(rows: Sequence[StatsRow]) -> str:
    """Render report rows as TSV with percentage columns to two decimals."""
    headers = ["group", "scenes", "source_mentions", "projected",
               "null_projections", "null_pct", "clusters_source",
               "clusters_surviving", "corrected", "corrected_pct"]
    lines = ["\t".join(headers)]
    for row in rows:
        lines.append("\t".join([
            row.group, str(row.scenes), str(row.source_mentions),
            str(row.projected), str(row.null_projections),
            f"{100.0 * row.null_rate:.2f}",
            str(row.clusters_source), str(row.clusters_surviving),
            "-" if row.corrected is None else str(row.corrected),
            "-" if row.corrected is None else f"{100.0 * row.corrected_rate:.2f}",
        ]))
    return "\n".join(lines) + "\n"
