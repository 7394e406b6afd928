"""
Merging two-way annotations and adjudicating disagreements
==========================================================

Dev/test scenes are annotated twice. Exactly-agreeing answers seed
clusters; answers that differ but land in the same cluster are absorbed
at the fixpoint; the rest queue for a third person whose call is final.
"""

from crosscoref.merge import (
    AdjudicationDecision,
    AnnotationTriplet,
    Answer,
    Choice,
    agreement_report,
    apply_decisions,
    merge_two_way,
)

triplets = [
    # both picked the same antecedent: exact agreement
    AnnotationTriplet("q1", Answer.span_of("a"), Answer.span_of("a")),
    # different answers, but q1 and a are already co-clustered: absorbed
    AnnotationTriplet("q2", Answer.span_of("q1"), Answer.span_of("a")),
    # both said "not a mention": resolved, in no cluster
    AnnotationTriplet("q3", Answer.not_mention(), Answer.not_mention()),
    # genuine disagreement: queued
    AnnotationTriplet("q4", Answer.span_of("b"), Answer.no_antecedent()),
]

state = merge_two_way(triplets)
print("clusters:", [sorted(map(str, c)) for c in state.clusters.clusters])
print("resolved:", sorted(state.resolved))
print("queue:", [t.query for t in state.disagreements])

final = apply_decisions(state, [
    AdjudicationDecision("q4", Choice.PICK_FIRST),
])
print("\nafter adjudication:")
print("clusters:", [sorted(map(str, c)) for c in final.clusters.clusters])
print("queue:", [t.query for t in final.disagreements])

report = agreement_report(triplets, final.clusters)
print("\nannotator MUC F1 vs final:",
      [round(score.f1, 4) for score in report.annotator_muc])
print("kappa over categorical decisions:", round(report.kappa, 4))
