"""Analysis transforms: head-lemma baseline clustering, speaker-count
partitioning, and deterministic speaker-name randomization."""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import Clustering, CorefError, Document, MentionKind, Utterance
from .parallel import scene_key


class AnalysisError(CorefError):
    pass


@dataclass(frozen=True)
class HeadedMention:
    """A mention with its (externally supplied) head token and lemma."""

    id: str
    head_token: str
    head_lemma: str


def fallback_head(tokens: Sequence[str]) -> str:
    """Declared heuristic when no parser output is available: the last
    alphabetic token of the span, lowercased (last token if none is)."""
    for token in reversed(tokens):
        if any(ch.isalpha() for ch in token):
            return token.lower()
    return tokens[-1].lower() if tokens else ""


def headed_mentions(doc: Document,
                    lemmas: Mapping[str, str] | None = None) -> list[HeadedMention]:
    """HeadedMentions for every span mention, using ``lemmas`` (mention
    id -> lemma) when provided and the fallback heuristic otherwise."""
    out = []
    for m in doc.mentions:
        if m.kind is not MentionKind.SPAN:
            continue
        tokens = doc.utterances[m.utt_index].tokens[m.start:m.end]
        head = fallback_head(tokens)
        lemma = lemmas.get(m.id, head) if lemmas else head
        out.append(HeadedMention(id=m.id, head_token=head, head_lemma=lemma))
    return out


def head_lemma_baseline(mentions: Sequence[HeadedMention]) -> Clustering:
    """Link any two mentions sharing a head lemma; nothing else links."""
    groups: dict[str, set] = {}
    for m in mentions:
        groups.setdefault(m.head_lemma, set()).add(m.id)
    return Clustering.from_sets(groups.values())


class SpeakerBucket(enum.Enum):
    AT_MOST_ONE = "<=1"
    TWO = "2"
    MORE_THAN_TWO = ">2"


def speaker_bucket(doc: Document) -> SpeakerBucket:
    count = len(doc.speakers())
    if count <= 1:
        return SpeakerBucket.AT_MOST_ONE
    if count == 2:
        return SpeakerBucket.TWO
    return SpeakerBucket.MORE_THAN_TWO


def partition_by_speakers(docs: Iterable[Document]) -> dict:
    """Bucket documents by how many distinct named speakers they have."""
    buckets: dict[SpeakerBucket, list[Document]] = {b: [] for b in SpeakerBucket}
    for doc in docs:
        buckets[speaker_bucket(doc)].append(doc)
    return buckets


@dataclass(frozen=True)
class NameReplacementPlan:
    """Per-scene injective speaker renaming, sampled from group pools.

    ``assignments`` maps scene key -> {original speaker -> replacement};
    ``pools`` maps group label -> candidate names; ``speaker_groups``
    maps speaker -> group label. Sampling is a pure function of ``seed``
    and the scene key.
    """

    assignments: dict
    pools: dict = field(default_factory=dict)
    speaker_groups: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        for key, mapping in self.assignments.items():
            values = list(mapping.values())
            if len(set(values)) != len(values):
                raise AnalysisError(
                    f"replacement for scene {key} is not injective")


def _scene_rng(seed: int, key) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{key!r}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _first_name(speaker: str) -> str:
    return speaker.split()[0] if speaker.split() else speaker


def build_replacement_plan(docs: Sequence[Document],
                           pools: Mapping[str, Sequence[str]],
                           speaker_groups: Mapping[str, str],
                           seed: int) -> NameReplacementPlan:
    """Sample a per-scene replacement name for every speaker.

    Candidates that would collide with anything already visible in the
    scene (other replacements, original speaker names, or any token of
    the scene text) are skipped so the mapping stays invertible. A group
    without a pool, or a pool exhausted within a scene, is an error.
    """
    assignments: dict = {}
    for doc in docs:
        key = scene_key(doc)
        rng = _scene_rng(seed, key)
        scene_tokens = {t for u in doc.utterances for t in u.tokens}
        originals = sorted(doc.speakers())
        forbidden = set(scene_tokens)
        forbidden.update(_first_name(s) for s in originals)
        forbidden.update(originals)
        mapping: dict[str, str] = {}
        for speaker in originals:
            group = speaker_groups.get(speaker)
            if group is None:
                raise AnalysisError(f"speaker {speaker!r} has no group label")
            pool = list(pools.get(group, ()))
            if not pool:
                raise AnalysisError(f"group {group!r} has no name pool")
            candidates = [n for n in pool if n not in forbidden]
            if not candidates:
                raise AnalysisError(
                    f"pool for group {group!r} exhausted in scene {key}")
            replacement = rng.choice(sorted(candidates))
            mapping[speaker] = replacement
            forbidden.add(replacement)
        assignments[key] = mapping
    return NameReplacementPlan(assignments=assignments,
                               pools={g: list(p) for g, p in pools.items()},
                               speaker_groups=dict(speaker_groups),
                               seed=seed)


def _rename_document(doc: Document, mapping: Mapping[str, str]) -> Document:
    token_map = {_first_name(orig): _first_name(repl)
                 for orig, repl in mapping.items()}
    utterances = []
    for utt in doc.utterances:
        speaker = mapping.get(utt.speaker, utt.speaker)
        tokens = tuple(token_map.get(t, t) for t in utt.tokens)
        changed = speaker != utt.speaker or tokens != utt.tokens
        utterances.append(
            utt if not changed else
            Utterance(speaker=speaker, tokens=tokens, empty=utt.empty))
    renamed = Document(doc_id=doc.doc_id, language=doc.language,
                       utterances=tuple(utterances), mentions=doc.mentions,
                       metadata=dict(doc.metadata))
    return renamed


def replace_names(docs: Sequence[Document], plan: NameReplacementPlan,
                  ) -> tuple[list[Document], dict]:
    """Apply a replacement plan to a corpus.

    Speaker labels are swapped per scene, and single-token case-sensitive
    occurrences of each original first name in the scene's utterances are
    swapped to the replacement's first name. Token counts, span offsets,
    and cluster structure are untouched. Returns the renamed corpus and
    the scene -> {original -> replacement} mapping, which ``invert_mapping``
    turns into the exact inverse transform.
    """
    out = []
    mapping_used: dict = {}
    for doc in docs:
        key = scene_key(doc)
        mapping = plan.assignments.get(key, {})
        mapping_used[key] = dict(mapping)
        out.append(_rename_document(doc, mapping))
    return out, mapping_used


def invert_mapping(mapping: Mapping) -> dict:
    return {key: {repl: orig for orig, repl in scene_map.items()}
            for key, scene_map in mapping.items()}


def apply_mapping(docs: Sequence[Document], mapping: Mapping) -> list[Document]:
    """Apply a raw scene mapping (e.g. an inverted one) to a corpus."""
    out = []
    for doc in docs:
        key = scene_key(doc)
        out.append(_rename_document(doc, mapping.get(key, {})))
    return out


def mapping_to_tsv(mapping: Mapping) -> str:
    lines = ["episode\tscene\toriginal\treplacement"]
    for key in sorted(mapping):
        episode, scene = key
        for orig, repl in sorted(mapping[key].items()):
            lines.append(f"{episode}\t{scene}\t{orig}\t{repl}")
    return "\n".join(lines) + "\n"


def mapping_from_tsv(text: str) -> dict:
    mapping: dict = {}
    lines = [line for line in text.splitlines() if line.strip()]
    for line in lines[1:]:
        episode, scene, orig, repl = line.split("\t")
        mapping.setdefault((episode, scene), {})[orig] = repl
    return mapping
