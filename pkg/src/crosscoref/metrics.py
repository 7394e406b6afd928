"""Coreference evaluation: MUC, B-cubed, CEAF (entity similarity), the
CoNLL average of the three, and mention-detection precision/recall.

Clusterings are compared over a shared mention universe; when the two
sides come from different annotation runs, mentions are identified by
exact span equality (utterance, start, end, kind) rather than by id.
Singletons count by default; strip them for OntoNotes-convention
comparisons. Undefined ratios (0/0) score 0 and are flagged, never NaN.

Corpus-level scores micro-average by default: numerators and
denominators are summed over documents before dividing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Clustering, Document, SplitPolicy, build_clusters


@dataclass(frozen=True)
class MetricScore:
    """Precision/recall/F1 as fractions in [0,1]; display multiplies by
    100. ``undefined`` names components that were 0/0."""

    precision: float
    recall: float
    f1: float
    undefined: frozenset = frozenset()

    @classmethod
    def from_counts(cls, p_num: float, p_den: float,
                    r_num: float, r_den: float) -> "MetricScore":
        undefined = set()
        if p_den == 0:
            undefined.add("precision")
        if r_den == 0:
            undefined.add("recall")
        precision = p_num / p_den if p_den else 0.0
        recall = r_num / r_den if r_den else 0.0
        f1 = _f1(precision, recall)
        return cls(precision, recall, f1, frozenset(undefined))

    def display(self) -> tuple[str, str, str]:
        return (f"{100.0 * self.precision:.2f}",
                f"{100.0 * self.recall:.2f}",
                f"{100.0 * self.f1:.2f}")


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalPair:
    """Gold (key) vs system (response) clusterings over one document."""

    key: Clustering
    response: Clustering


def pair_from_documents(key_doc: Document, response_doc: Document,
                        split_policy: SplitPolicy = SplitPolicy.DROP_SPLIT,
                        ) -> EvalPair:
    """Build an EvalPair from two annotated documents of the same text.

    Clusters come from each document's antecedent links and members are
    remapped to span identities so the ids need not line up.
    """
    def identified(doc: Document) -> Clustering:
        identities = {m.id: m.identity() for m in doc.mentions}
        return build_clusters(doc, split_policy).relabel(identities)

    return EvalPair(key=identified(key_doc), response=identified(response_doc))


def strip_singletons(clustering: Clustering) -> Clustering:
    return Clustering.from_sets(c for c in clustering.clusters if len(c) > 1)


def _membership(clustering: Clustering) -> dict:
    table: dict = {}
    for cluster in clustering.clusters:
        for member in cluster:
            table[member] = cluster
    return table


# ---------------------------------------------------------------- MUC

def _vilain(clusters: Sequence[frozenset], other_membership: Mapping) -> tuple[int, int]:
    """Link counts: sum over clusters of |S| - |partition of S by the
    other side| (unmatched members are their own parts)."""
    num = 0
    den = 0
    for cluster in clusters:
        if len(cluster) < 2:
            continue
        parts = set()
        unmatched = 0
        for member in cluster:
            other = other_membership.get(member)
            if other is None:
                unmatched += 1
            else:
                parts.add(other)
        num += len(cluster) - (len(parts) + unmatched)
        den += len(cluster) - 1
    return num, den


def muc_counts(pair: EvalPair) -> tuple[float, float, float, float]:
    r_num, r_den = _vilain(pair.key.clusters, _membership(pair.response))
    p_num, p_den = _vilain(pair.response.clusters, _membership(pair.key))
    return p_num, p_den, r_num, r_den


def muc(pair: EvalPair) -> MetricScore:
    """Link-based score (Vilain-style partition counting). All-singleton
    sides have no links: the ratio is undefined and reported as 0."""
    return MetricScore.from_counts(*muc_counts(pair))


# ---------------------------------------------------------------- B-cubed

def _b3_side(clusters: Sequence[frozenset], other_membership: Mapping,
             ) -> tuple[float, int]:
    terms = []
    den = 0
    for cluster in clusters:
        size = len(cluster)
        for member in cluster:
            other = other_membership.get(member)
            overlap = len(cluster & other) if other is not None else 1
            terms.append(overlap / size)
            den += 1
    # fsum: the result depends only on the multiset of terms, not order
    return math.fsum(terms), den


def b_cubed_counts(pair: EvalPair) -> tuple[float, float, float, float]:
    r_num, r_den = _b3_side(pair.key.clusters, _membership(pair.response))
    p_num, p_den = _b3_side(pair.response.clusters, _membership(pair.key))
    return p_num, p_den, r_num, r_den


def b_cubed(pair: EvalPair) -> MetricScore:
    """Mention-based average overlap. A mention missing from the other
    side counts as a singleton over there (twinless-as-singleton)."""
    return MetricScore.from_counts(*b_cubed_counts(pair))


# ---------------------------------------------------------------- CEAF

def entity_similarity(a: frozenset, b: frozenset) -> float:
    """2|A∩B| / (|A|+|B|); 1.0 iff the clusters are identical."""
    if not a or not b:
        return 0.0
    return 2.0 * len(a & b) / (len(a) + len(b))


def ceaf_total(key: Clustering, response: Clustering) -> float:
    """Best one-to-one cluster matching score, via optimal assignment."""
    if not key.clusters or not response.clusters:
        return 0.0
    matrix = np.zeros((len(key.clusters), len(response.clusters)))
    for i, k in enumerate(key.clusters):
        for j, r in enumerate(response.clusters):
            matrix[i, j] = entity_similarity(k, r)
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    return math.fsum(matrix[rows, cols])


def ceaf_phi4_counts(pair: EvalPair) -> tuple[float, float, float, float]:
    total = ceaf_total(pair.key, pair.response)
    return total, float(len(pair.response.clusters)), total, float(len(pair.key.clusters))


def ceaf_phi4(pair: EvalPair) -> MetricScore:
    """Entity-based score under optimal one-to-one cluster alignment;
    self-similarity is 1, so the denominators are the cluster counts."""
    return MetricScore.from_counts(*ceaf_phi4_counts(pair))


# ---------------------------------------------------------------- mention detection

def mention_prf_counts(pair: EvalPair) -> tuple[float, float, float, float]:
    key_mentions = pair.key.covers
    response_mentions = pair.response.covers
    hits = len(key_mentions & response_mentions)
    return hits, len(response_mentions), hits, len(key_mentions)


def mention_prf(pair: EvalPair) -> MetricScore:
    """Exact-match mention detection precision/recall."""
    return MetricScore.from_counts(*mention_prf_counts(pair))


# ---------------------------------------------------------------- bundles

_COUNTERS = {
    "muc": muc_counts,
    "b_cubed": b_cubed_counts,
    "ceaf": ceaf_phi4_counts,
    "mention": mention_prf_counts,
}


@dataclass(frozen=True)
class EvalReport:
    muc: MetricScore
    b_cubed: MetricScore
    ceaf: MetricScore
    mention: MetricScore
    conll_f1: float

    def rows(self) -> list[tuple[str, MetricScore]]:
        return [("muc", self.muc), ("b_cubed", self.b_cubed),
                ("ceaf_phi4", self.ceaf), ("mention", self.mention)]


def conll_f1(pair: EvalPair) -> float:
    """Arithmetic mean of the MUC, B-cubed, and CEAF F1s."""
    return (muc(pair).f1 + b_cubed(pair).f1 + ceaf_phi4(pair).f1) / 3.0


def evaluate(pair: EvalPair, drop_singletons: bool = False) -> EvalReport:
    if drop_singletons:
        pair = EvalPair(key=strip_singletons(pair.key),
                        response=strip_singletons(pair.response))
    scores = {name: MetricScore.from_counts(*fn(pair))
              for name, fn in _COUNTERS.items()}
    conll = (scores["muc"].f1 + scores["b_cubed"].f1 + scores["ceaf"].f1) / 3.0
    return EvalReport(muc=scores["muc"], b_cubed=scores["b_cubed"],
                      ceaf=scores["ceaf"], mention=scores["mention"],
                      conll_f1=conll)


def corpus_scores(pairs: Sequence[EvalPair], macro: bool = False,
                  drop_singletons: bool = False) -> EvalReport:
    """Aggregate scores over many documents.

    Micro (default): counts are summed before dividing, matching the
    usual corpus-scorer behavior. Macro: per-document scores averaged.
    """
    if drop_singletons:
        pairs = [EvalPair(key=strip_singletons(p.key),
                          response=strip_singletons(p.response))
                 for p in pairs]
    if macro:
        if not pairs:
            return evaluate(EvalPair(Clustering(()), Clustering(())))
        reports = [evaluate(p) for p in pairs]
        def mean_score(pick) -> MetricScore:
            ps = [pick(r).precision for r in reports]
            rs = [pick(r).recall for r in reports]
            fs = [pick(r).f1 for r in reports]
            flags = frozenset().union(*(pick(r).undefined for r in reports))
            return MetricScore(sum(ps) / len(ps), sum(rs) / len(rs),
                               sum(fs) / len(fs), flags)
        muc_s = mean_score(lambda r: r.muc)
        b3_s = mean_score(lambda r: r.b_cubed)
        ceaf_s = mean_score(lambda r: r.ceaf)
        mention_s = mean_score(lambda r: r.mention)
        conll = sum(r.conll_f1 for r in reports) / len(reports)
        return EvalReport(muc_s, b3_s, ceaf_s, mention_s, conll)

    totals = {name: [0.0, 0.0, 0.0, 0.0] for name in _COUNTERS}
    for pair in pairs:
        for name, fn in _COUNTERS.items():
            for i, value in enumerate(fn(pair)):
                totals[name][i] += value
    scores = {name: MetricScore.from_counts(*counts)
              for name, counts in totals.items()}
    conll = (scores["muc"].f1 + scores["b_cubed"].f1 + scores["ceaf"].f1) / 3.0
    return EvalReport(muc=scores["muc"], b_cubed=scores["b_cubed"],
                      ceaf=scores["ceaf"], mention=scores["mention"],
                      conll_f1=conll)
