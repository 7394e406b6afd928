"""Dialogue documents, mention annotations, and cluster construction.

A Document is one scene of multiparty dialogue: an ordered list of
utterances (speaker + tokens) plus mention annotations. Mentions are
token-indexed spans (end-exclusive) or references to an utterance's
speaker, and carry antecedent links from which entity clusters are
built by transitive closure.

All types are immutable values; every operation here is a pure function.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class MentionKind(enum.Enum):
    SPAN = "span"
    SPEAKER = "speaker"


class MentionFlag(enum.Enum):
    PLURAL = "plural"
    UNCERTAIN = "uncertain"
    NOT_MENTION = "not_mention"
    NO_ANTECEDENT = "no_antecedent"


class SplitPolicy(enum.Enum):
    """How to treat mentions carrying more than one antecedent link."""

    DROP_SPLIT = "drop_split"          # contribute no edges; scoring default
    FIRST_ANTECEDENT = "first_antecedent"  # keep only the first link


class CorefError(Exception):
    """Base class for data errors raised by this package."""


class AntecedentError(CorefError):
    """A mention's antecedent link cannot be used to build clusters."""

    def __init__(self, code: str, mention_id: str, antecedent_id: str):
        self.code = code
        self.mention_id = mention_id
        self.antecedent_id = antecedent_id
        super().__init__(
            f"{code}: mention {mention_id!r} -> antecedent {antecedent_id!r}"
        )


@dataclass(frozen=True)
class Utterance:
    """One dialogue turn. ``speaker`` may be "" for narration.

    ``tokens`` may be empty only for placeholder utterances (e.g. a
    missing subtitle line), which must be flagged ``empty=True``.
    """

    speaker: str
    tokens: tuple[str, ...]
    empty: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class Mention:
    """A token span (kind=SPAN) or speaker reference (kind=SPEAKER).

    Spans are token-indexed and end-exclusive. ``antecedents`` holds the
    ids of earlier mentions this one corefers with; more than one id
    encodes a split antecedent ("we" -> two people).
    """

    id: str
    kind: MentionKind
    utt_index: int
    start: int | None = None
    end: int | None = None
    antecedents: tuple[str, ...] = ()
    flags: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple(self.antecedents))
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def is_span(self) -> bool:
        return self.kind is MentionKind.SPAN

    def span(self) -> tuple[int, int, int]:
        """(utt_index, start, end); only meaningful for SPAN mentions."""
        return (self.utt_index, self.start, self.end)

    def identity(self) -> tuple:
        """Position-based identity used when comparing annotations that
        do not share mention ids (evaluation, CoNLL round-trips)."""
        if self.kind is MentionKind.SPAN:
            return (self.utt_index, self.start, self.end, self.kind.value)
        return (self.utt_index, None, None, self.kind.value)


@dataclass(frozen=True)
class Document:
    """One scene: ordered utterances plus mention annotations."""

    doc_id: str
    language: str
    utterances: tuple[Utterance, ...]
    mentions: tuple[Mention, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        object.__setattr__(self, "mentions", tuple(self.mentions))

    def mentions_by_id(self) -> dict[str, Mention]:
        return {m.id: m for m in self.mentions}

    def speakers(self) -> set[str]:
        """Distinct non-empty speaker labels."""
        return {u.speaker for u in self.utterances if u.speaker}


@dataclass(frozen=True)
class Clustering:
    """A partition of mention identifiers into entity clusters.

    Clusters are pairwise disjoint, non-empty sets; singletons are
    allowed. Construction canonicalizes cluster order so that equal
    partitions compare equal.
    """

    clusters: tuple[frozenset, ...]

    def __post_init__(self):
        canon = tuple(
            sorted((frozenset(c) for c in self.clusters),
                   key=lambda c: sorted(map(repr, c)))
        )
        seen = set()
        for cluster in canon:
            if not cluster:
                raise CorefError("empty cluster in Clustering")
            if seen & cluster:
                raise CorefError("overlapping clusters in Clustering")
            seen |= cluster
        object.__setattr__(self, "clusters", canon)

    @classmethod
    def from_sets(cls, sets) -> "Clustering":
        return cls(tuple(frozenset(s) for s in sets))

    @property
    def covers(self) -> frozenset:
        return frozenset().union(*self.clusters) if self.clusters else frozenset()

    def as_sets(self) -> set[frozenset]:
        return set(self.clusters)

    def sizes(self) -> tuple[int, ...]:
        """Cluster size multiset, sorted ascending."""
        return tuple(sorted(len(c) for c in self.clusters))

    def cluster_of(self, member) -> frozenset | None:
        for cluster in self.clusters:
            if member in cluster:
                return cluster
        return None

    def relabel(self, mapping) -> "Clustering":
        """Apply ``mapping`` to every member (e.g. ids -> span identities)."""
        return Clustering.from_sets(
            frozenset(mapping[m] for m in c) for c in self.clusters
        )

    def __len__(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class Violation:
    """A single invariant violation found by validate_document."""

    code: str
    message: str
    mention_id: str | None = None
    utt_index: int | None = None


class _UnionFind:
    """Union-find with path compression; supports late element insertion."""

    def __init__(self, elements=()):
        self.parent = {e: e for e in elements}

    def add(self, e):
        self.parent.setdefault(e, e)

    def __contains__(self, e):
        return e in self.parent

    def find(self, e):
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def components(self) -> list[set]:
        groups: dict = {}
        for e in self.parent:
            groups.setdefault(self.find(e), set()).add(e)
        return list(groups.values())


def build_clusters(doc: Document,
                   split_policy: SplitPolicy = SplitPolicy.DROP_SPLIT) -> Clustering:
    """Form entity clusters as the transitive closure of antecedent links.

    Every antecedent link is an undirected edge; connected mentions share
    a cluster. NOT_MENTION mentions are excluded entirely (and edges into
    them are dropped). Mentions without usable links become singletons,
    including NO_ANTECEDENT chain starts. Split antecedents (more than
    one link) contribute no edges under DROP_SPLIT and only their first
    link under FIRST_ANTECEDENT.

    Raises AntecedentError for dangling or self-referential links.
    """
    by_id = doc.mentions_by_id()
    excluded = {m.id for m in doc.mentions if MentionFlag.NOT_MENTION in m.flags}

    uf = _UnionFind(m.id for m in doc.mentions if m.id not in excluded)
    for mention in doc.mentions:
        for ant in mention.antecedents:
            if ant not in by_id:
                raise AntecedentError("DANGLING_ANTECEDENT", mention.id, ant)
            if ant == mention.id:
                raise AntecedentError("SELF_ANTECEDENT", mention.id, ant)
        if mention.id in excluded:
            continue
        if len(mention.antecedents) > 1:
            if split_policy is SplitPolicy.DROP_SPLIT:
                continue
            links = mention.antecedents[:1]
        else:
            links = mention.antecedents
        for ant in links:
            if ant in excluded:
                continue
            uf.union(mention.id, ant)

    return Clustering.from_sets(uf.components())


def validate_document(doc: Document) -> list[Violation]:
    """Check every document invariant; returns [] iff the document is valid.

    Violations are data, not errors: each carries a machine-readable code
    (UTT_INDEX_OUT_OF_RANGE, SPAN_OUT_OF_RANGE, DUPLICATE_ID,
    DUPLICATE_SPAN, EMPTY_TOKENS_UNFLAGGED, DANGLING_ANTECEDENT,
    SELF_ANTECEDENT) and its location.
    """
    violations = []
    n_utts = len(doc.utterances)

    for i, utt in enumerate(doc.utterances):
        if not utt.tokens and not utt.empty:
            violations.append(Violation(
                "EMPTY_TOKENS_UNFLAGGED",
                f"utterance {i} has no tokens but is not flagged empty",
                utt_index=i))

    seen_ids: set[str] = set()
    seen_spans: set[tuple[int, int, int]] = set()
    ids = {m.id for m in doc.mentions}
    for m in doc.mentions:
        if m.id in seen_ids:
            violations.append(Violation(
                "DUPLICATE_ID", f"mention id {m.id!r} occurs more than once",
                mention_id=m.id))
        seen_ids.add(m.id)

        if not (0 <= m.utt_index < n_utts):
            violations.append(Violation(
                "UTT_INDEX_OUT_OF_RANGE",
                f"mention {m.id!r} references utterance {m.utt_index} "
                f"of {n_utts}",
                mention_id=m.id, utt_index=m.utt_index))
        elif m.kind is MentionKind.SPAN:
            n_tokens = len(doc.utterances[m.utt_index].tokens)
            if (m.start is None or m.end is None
                    or not (0 <= m.start < m.end <= n_tokens)):
                violations.append(Violation(
                    "SPAN_OUT_OF_RANGE",
                    f"mention {m.id!r} span [{m.start},{m.end}) invalid for "
                    f"{n_tokens}-token utterance {m.utt_index}",
                    mention_id=m.id, utt_index=m.utt_index))
            else:
                span = (m.utt_index, m.start, m.end)
                if span in seen_spans:
                    violations.append(Violation(
                        "DUPLICATE_SPAN",
                        f"mention {m.id!r} duplicates span {span}",
                        mention_id=m.id, utt_index=m.utt_index))
                seen_spans.add(span)

        for ant in m.antecedents:
            if ant == m.id:
                violations.append(Violation(
                    "SELF_ANTECEDENT", f"mention {m.id!r} links to itself",
                    mention_id=m.id))
            elif ant not in ids:
                violations.append(Violation(
                    "DANGLING_ANTECEDENT",
                    f"mention {m.id!r} links to unknown id {ant!r}",
                    mention_id=m.id))

    return violations


def with_mentions(doc: Document, mentions) -> Document:
    """Copy of ``doc`` with a new mention tuple."""
    return replace(doc, mentions=tuple(mentions))
