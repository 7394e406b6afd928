"""Shared fixture builders: small hand-rolled documents plus seeded
random generators used by the property suites."""

from __future__ import annotations

import random

import pytest

from crosscoref.core import (
    Clustering,
    Document,
    Mention,
    MentionFlag,
    MentionKind,
    Utterance,
)
from crosscoref.parallel import AlignmentSet, ParallelDocument

WORDS = ("the dog barked at a cat and she laughed really hard then "
         "he left with them because it was late").split()


def make_utterance(text: str, speaker: str = "A") -> Utterance:
    return Utterance(speaker=speaker, tokens=tuple(text.split()))


def make_doc(doc_id="doc", language="en", utterances=None, mentions=(),
             metadata=None) -> Document:
    if utterances is None:
        utterances = (make_utterance("the dog barked", "A"),
                      make_utterance("she saw the dog", "B"))
    return Document(doc_id=doc_id, language=language,
                    utterances=tuple(utterances), mentions=tuple(mentions),
                    metadata=metadata or {"episode": "e1", "scene": "s1"})


def span_mention(mid, utt, start, end, antecedents=(), flags=()) -> Mention:
    return Mention(id=mid, kind=MentionKind.SPAN, utt_index=utt, start=start,
                   end=end, antecedents=tuple(antecedents),
                   flags=frozenset(flags))


def speaker_mention(mid, utt, antecedents=(), flags=()) -> Mention:
    return Mention(id=mid, kind=MentionKind.SPEAKER, utt_index=utt,
                   antecedents=tuple(antecedents), flags=frozenset(flags))


def random_document(rng: random.Random, max_utts=6, max_mentions=12,
                    language="en", doc_id=None, allow_flags=True,
                    allow_splits=True, allow_speakers=True,
                    allow_empty_utts=True) -> Document:
    """A structurally valid random document with random antecedent links
    (always pointing at earlier mentions)."""
    n_utts = rng.randint(1, max_utts)
    utterances = []
    for _ in range(n_utts):
        if allow_empty_utts and rng.random() < 0.08:
            utterances.append(Utterance(speaker=rng.choice("ABC"), tokens=(),
                                        empty=True))
            continue
        n_tokens = rng.randint(1, 9)
        tokens = tuple(rng.choice(WORDS) for _ in range(n_tokens))
        utterances.append(Utterance(speaker=rng.choice(("A", "B", "C", "")),
                                    tokens=tokens))

    mentions = []
    used_spans = set()
    n_mentions = rng.randint(0, max_mentions)
    for index in range(n_mentions):
        mid = f"m{index}"
        if allow_speakers and rng.random() < 0.1:
            mentions.append(Mention(id=mid, kind=MentionKind.SPEAKER,
                                    utt_index=rng.randrange(n_utts)))
            continue
        candidates = [i for i, u in enumerate(utterances) if u.tokens]
        if not candidates:
            break
        utt = rng.choice(candidates)
        n_tokens = len(utterances[utt].tokens)
        start = rng.randrange(n_tokens)
        end = rng.randint(start + 1, min(n_tokens, start + 4))
        if (utt, start, end) in used_spans:
            continue
        used_spans.add((utt, start, end))

        antecedents = []
        if mentions and rng.random() < 0.6:
            n_links = 1
            if allow_splits and rng.random() < 0.15 and len(mentions) > 1:
                n_links = 2
            antecedents = [m.id for m in rng.sample(mentions,
                                                    min(n_links, len(mentions)))]
        flags = set()
        if allow_flags:
            if rng.random() < 0.05:
                flags.add(MentionFlag.NOT_MENTION)
                antecedents = []
            if rng.random() < 0.05:
                flags.add(MentionFlag.PLURAL)
            if not antecedents and rng.random() < 0.3:
                flags.add(MentionFlag.NO_ANTECEDENT)
        mentions.append(Mention(id=mid, kind=MentionKind.SPAN, utt_index=utt,
                                start=start, end=end,
                                antecedents=tuple(antecedents),
                                flags=frozenset(flags)))
    return Document(doc_id=doc_id or f"doc{rng.randrange(10**6)}",
                    language=language, utterances=tuple(utterances),
                    mentions=tuple(mentions),
                    metadata={"episode": "e1", "scene": f"s{rng.randrange(999)}"})


def random_clustering(rng: random.Random, n_items: int,
                      require_link=False) -> Clustering:
    """Random partition of item0..item{n-1}; with ``require_link`` at
    least one cluster has two members (so MUC is defined)."""
    items = [f"item{i}" for i in range(n_items)]
    rng.shuffle(items)
    clusters = []
    index = 0
    while index < len(items):
        size = min(rng.randint(1, 4), len(items) - index)
        clusters.append(frozenset(items[index:index + size]))
        index += size
    if require_link and all(len(c) == 1 for c in clusters) and len(items) >= 2:
        merged = clusters[0] | clusters[1]
        clusters = [merged] + clusters[2:]
    return Clustering.from_sets(clusters)


def random_parallel(rng: random.Random, lang="zh", identity=False,
                    ) -> tuple[ParallelDocument, AlignmentSet]:
    """A parallel scene with random (possibly crossing, many-to-one)
    word alignments; with ``identity`` the target mirrors the source and
    every token aligns to itself."""
    source = random_document(rng, allow_empty_utts=not identity)
    if identity:
        target_utts = tuple(
            Utterance(speaker=u.speaker, tokens=u.tokens, empty=u.empty)
            for u in source.utterances)
        mapping = tuple(range(len(source.utterances)))
    else:
        target_utts = []
        mapping = []
        for utt in source.utterances:
            if rng.random() < 0.15:
                mapping.append(None)
                continue
            if rng.random() < 0.1:
                target_utts.append(Utterance(speaker=utt.speaker, tokens=(),
                                             empty=True))
            else:
                n_tokens = rng.randint(1, 10)
                target_utts.append(Utterance(
                    speaker=utt.speaker,
                    tokens=tuple(rng.choice(WORDS) for _ in range(n_tokens))))
            mapping.append(len(target_utts) - 1)
        target_utts = tuple(target_utts)
        mapping = tuple(mapping)

    target = Document(doc_id=f"{source.doc_id}_{lang}", language=lang,
                      utterances=target_utts, mentions=(),
                      metadata=dict(source.metadata))
    parallel = ParallelDocument(source=source, targets={lang: target},
                                utterance_map={lang: mapping})

    links = {}
    for s, t in parallel.aligned_pairs(lang):
        n_src = len(source.utterances[s].tokens)
        n_tgt = len(target.utterances[t].tokens)
        if n_src == 0 or n_tgt == 0:
            links[(s, t)] = frozenset()
            continue
        if identity:
            links[(s, t)] = frozenset((i, i) for i in range(n_src))
        else:
            n_links = rng.randint(0, n_src + 2)
            links[(s, t)] = frozenset(
                (rng.randrange(n_src), rng.randrange(n_tgt))
                for _ in range(n_links))
    return parallel, AlignmentSet(links)


@pytest.fixture
def rng():
    return random.Random(20240817)
