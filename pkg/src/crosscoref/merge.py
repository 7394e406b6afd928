"""Merging two-way annotations and adjudicating the disagreements.

Each annotated query carries two independent answers. Exactly-agreeing
triplets seed clusters by transitive closure; queries whose differing
answers nonetheless land in the same cluster are absorbed until a
fixpoint; whatever remains queues for a third person, whose decision is
final.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Clustering, CorefError, _UnionFind
from .jsonl import canonical_json
from .metrics import EvalPair, MetricScore, conll_f1, muc


class MergeError(CorefError):
    pass


class AnswerKind(enum.Enum):
    SPAN = "span"
    NOT_MENTION = "not_mention"
    NO_ANTECEDENT = "no_antecedent"


@dataclass(frozen=True)
class Answer:
    """One annotator's answer for a query: an antecedent (an existing
    markable id or a freshly drawn span), or one of the two sentinels."""

    kind: AnswerKind
    target: str | None = None
    span: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.span is not None:
            object.__setattr__(self, "span", tuple(int(v) for v in self.span))
        if self.kind is AnswerKind.SPAN:
            if (self.target is None) == (self.span is None):
                raise MergeError("SPAN answer needs exactly one of target/span")
        elif self.target is not None or self.span is not None:
            raise MergeError(f"{self.kind.value} answer carries no payload")

    def node(self):
        """Cluster-universe node; fresh spans unify by exact equality."""
        if self.target is not None:
            return self.target
        return ("span",) + self.span

    @classmethod
    def span_of(cls, target: str) -> "Answer":
        return cls(AnswerKind.SPAN, target=target)

    @classmethod
    def new_span(cls, utt: int, start: int, end: int) -> "Answer":
        return cls(AnswerKind.SPAN, span=(utt, start, end))

    @classmethod
    def not_mention(cls) -> "Answer":
        return cls(AnswerKind.NOT_MENTION)

    @classmethod
    def no_antecedent(cls) -> "Answer":
        return cls(AnswerKind.NO_ANTECEDENT)


@dataclass(frozen=True)
class AnnotationTriplet:
    query: str
    answer1: Answer
    answer2: Answer

    def agreed(self) -> bool:
        return self.answer1 == self.answer2


class Choice(enum.Enum):
    PICK_FIRST = "pick_first"
    PICK_SECOND = "pick_second"
    RELABEL = "relabel"


@dataclass(frozen=True)
class AdjudicationDecision:
    query: str
    choice: Choice
    relabel: Answer | None = None

    def __post_init__(self):
        if (self.choice is Choice.RELABEL) != (self.relabel is not None):
            raise MergeError("RELABEL decisions carry an answer; others do not")

    def resolve(self, triplet: AnnotationTriplet) -> Answer:
        if self.choice is Choice.PICK_FIRST:
            return triplet.answer1
        if self.choice is Choice.PICK_SECOND:
            return triplet.answer2
        return self.relabel


@dataclass(frozen=True)
class MergeState:
    """Outcome of the merge: agreed clusters, resolved query set, and the
    disagreement queue (in document order). The full triplet list is kept
    so decisions can be folded in and the merge re-run."""

    clusters: Clustering
    resolved: frozenset
    disagreements: tuple[AnnotationTriplet, ...]
    triplets: tuple[AnnotationTriplet, ...]


def _validate_triplets(triplets: Sequence[AnnotationTriplet]) -> None:
    seen = set()
    for t in triplets:
        if t.query in seen:
            raise MergeError(f"duplicate query {t.query!r}")
        seen.add(t.query)
        for answer in (t.answer1, t.answer2):
            if answer.kind is AnswerKind.SPAN and answer.target == t.query:
                raise MergeError(f"query {t.query!r} references itself")


def merge_two_way(triplets: Sequence[AnnotationTriplet],
                  phase2_order: Sequence[str] | None = None) -> MergeState:
    """Build agreed clusters from two-way annotations.

    Phase 1 takes the transitive closure over exactly-agreeing triplets
    (agreed sentinels resolve the query without adding edges; an agreed
    NOT_MENTION stays out of every cluster). Phase 2 repeatedly absorbs
    any still-open query whose two span answers already sit in one
    cluster, until nothing changes; the result does not depend on the
    processing order (``phase2_order`` exists to let tests prove that).
    Phase 3 queues the remainder, in input order, for adjudication.
    """
    triplets = tuple(triplets)
    _validate_triplets(triplets)

    uf = _UnionFind()
    resolved: set[str] = set()
    non_mentions: set[str] = set()

    for t in triplets:
        if not t.agreed():
            continue
        answer = t.answer1
        resolved.add(t.query)
        if answer.kind is AnswerKind.SPAN:
            node = answer.node()
            uf.add(t.query)
            uf.add(node)
            uf.union(t.query, node)
        elif answer.kind is AnswerKind.NO_ANTECEDENT:
            uf.add(t.query)
        else:
            non_mentions.add(t.query)

    pending = [t for t in triplets if t.query not in resolved]
    if phase2_order is not None:
        position = {query: i for i, query in enumerate(phase2_order)}
        pending.sort(key=lambda t: position.get(t.query, len(position)))

    changed = True
    while changed:
        changed = False
        still_open = []
        for t in pending:
            a1, a2 = t.answer1, t.answer2
            if a1.kind is AnswerKind.SPAN and a2.kind is AnswerKind.SPAN:
                n1, n2 = a1.node(), a2.node()
                if n1 in uf and n2 in uf and uf.find(n1) == uf.find(n2):
                    uf.add(t.query)
                    uf.union(t.query, n1)
                    resolved.add(t.query)
                    changed = True
                    continue
            still_open.append(t)
        pending = still_open

    order = {t.query: i for i, t in enumerate(triplets)}
    disagreements = tuple(sorted(pending, key=lambda t: order[t.query]))
    return MergeState(
        clusters=Clustering.from_sets(uf.components()),
        resolved=frozenset(resolved),
        disagreements=disagreements,
        triplets=triplets,
    )


def apply_decisions(state: MergeState,
                    decisions: Sequence[AdjudicationDecision]) -> MergeState:
    """Fold adjudication decisions in and re-run the merge.

    Each decision rewrites its queued triplet into an exact agreement;
    deciding a query that is not queued is an error. The resolved set
    only grows.
    """
    queued = {t.query: t for t in state.disagreements}
    replacements: dict[str, AnnotationTriplet] = {}
    for decision in decisions:
        triplet = queued.get(decision.query)
        if triplet is None:
            raise MergeError(
                f"decision for non-queued query {decision.query!r}")
        answer = decision.resolve(triplet)
        replacements[decision.query] = AnnotationTriplet(
            decision.query, answer, answer)

    updated = tuple(replacements.get(t.query, t) for t in state.triplets)
    return merge_two_way(updated)


def annotator_clustering(triplets: Sequence[AnnotationTriplet],
                         which: int) -> Clustering:
    """Clusters implied by one annotator's answers alone (1 or 2)."""
    if which not in (1, 2):
        raise MergeError("annotator index is 1 or 2")
    single = [
        AnnotationTriplet(t.query,
                          t.answer1 if which == 1 else t.answer2,
                          t.answer1 if which == 1 else t.answer2)
        for t in triplets
    ]
    return merge_two_way(single).clusters


def answer_category(answer: Answer):
    """Categorical outcome for agreement statistics: the two sentinels,
    or the identity of the chosen antecedent."""
    if answer.kind is AnswerKind.SPAN:
        return ("span", answer.node())
    return (answer.kind.value,)


def cohen_kappa(pairs: Sequence[tuple]) -> float:
    """Cohen's kappa over paired categorical decisions.

    When expected agreement is 1 (both marginals degenerate), returns 1.0
    for perfect observed agreement and 0.0 otherwise.
    """
    n = len(pairs)
    if n == 0:
        return 0.0
    observed = sum(1 for a, b in pairs if a == b) / n
    marginal_a: dict = {}
    marginal_b: dict = {}
    for a, b in pairs:
        marginal_a[a] = marginal_a.get(a, 0) + 1
        marginal_b[b] = marginal_b.get(b, 0) + 1
    expected = sum(marginal_a[c] * marginal_b.get(c, 0) for c in marginal_a) / (n * n)
    if expected == 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)


@dataclass(frozen=True)
class AgreementReport:
    """Per-annotator scores against the final clusters, plus kappa over
    the categorical per-query decisions."""

    annotator_muc: tuple[MetricScore, MetricScore]
    annotator_conll: tuple[float, float]
    kappa: float


def agreement_report(triplets: Sequence[AnnotationTriplet],
                     final: Clustering) -> AgreementReport:
    scores = []
    conll = []
    for which in (1, 2):
        clusters = annotator_clustering(triplets, which)
        pair = EvalPair(key=final, response=clusters)
        scores.append(muc(pair))
        conll.append(conll_f1(pair))
    pairs = [(answer_category(t.answer1), answer_category(t.answer2))
             for t in triplets]
    return AgreementReport(
        annotator_muc=(scores[0], scores[1]),
        annotator_conll=(conll[0], conll[1]),
        kappa=cohen_kappa(pairs),
    )


def answer_to_record(answer: Answer) -> dict:
    record: dict = {"kind": answer.kind.value}
    if answer.target is not None:
        record["target"] = answer.target
    if answer.span is not None:
        record["span"] = list(answer.span)
    return record


def answer_from_record(record: dict) -> Answer:
    try:
        span = record.get("span")
        return Answer(
            kind=AnswerKind(record["kind"]),
            target=record.get("target"),
            span=tuple(span) if span is not None else None,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise MergeError(f"bad answer record: {exc}") from exc


def triplet_to_record(triplet: AnnotationTriplet) -> dict:
    return {"query": triplet.query,
            "answer1": answer_to_record(triplet.answer1),
            "answer2": answer_to_record(triplet.answer2)}


def triplet_from_record(record: dict) -> AnnotationTriplet:
    try:
        return AnnotationTriplet(
            query=str(record["query"]),
            answer1=answer_from_record(record["answer1"]),
            answer2=answer_from_record(record["answer2"]),
        )
    except KeyError as exc:
        raise MergeError(f"bad triplet record: {exc}") from exc


def decision_to_record(decision: AdjudicationDecision) -> dict:
    record: dict = {"query": decision.query, "choice": decision.choice.value}
    if decision.relabel is not None:
        record["relabel"] = answer_to_record(decision.relabel)
    return record


def decision_from_record(record: dict) -> AdjudicationDecision:
    try:
        relabel = record.get("relabel")
        return AdjudicationDecision(
            query=str(record["query"]),
            choice=Choice(record["choice"]),
            relabel=answer_from_record(relabel) if relabel is not None else None,
        )
    except (KeyError, ValueError) as exc:
        raise MergeError(f"bad decision record: {exc}") from exc


def write_records(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(canonical_json(record) + "\n")


def read_records(path) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MergeError(f"{path}:{line_no}: malformed JSON") from exc
    return out
