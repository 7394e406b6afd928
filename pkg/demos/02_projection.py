"""
Annotation projection through word alignments
=============================================

Source-language mention spans transfer to the target language via
token-level alignments: the projected span is the contiguous hull of
all aligned target tokens. Unaligned mentions become null projections;
antecedent links contract through the holes so clusters survive.
Human corrections then repair the automatic output.
"""

from crosscoref.core import Document, Mention, MentionKind, Utterance, build_clusters
from crosscoref.parallel import AlignmentSet, ParallelDocument
from crosscoref.projection import (
    Correction,
    CorrectionAction,
    apply_corrections,
    project_document,
    project_span,
    projection_stats_report,
    stats_report_tsv,
)

# project_span on its own: span [2,5) aligned to scattered targets
print("hull:", project_span(2, 5, {(2, 5), (3, 3), (4, 4)}))   # (3, 6)
print("null:", project_span(0, 1, set()))                      # None

source = Document(
    doc_id="en/scene", language="en",
    utterances=(
        Utterance(speaker="Penny", tokens=("the", "dog", "saw", "it")),
        Utterance(speaker="Sheldon", tokens=("it", "ran",)),
    ),
    mentions=(
        Mention(id="dog", kind=MentionKind.SPAN, utt_index=0, start=0, end=2),
        Mention(id="it1", kind=MentionKind.SPAN, utt_index=0, start=3, end=4,
                antecedents=("dog",)),
        Mention(id="it2", kind=MentionKind.SPAN, utt_index=1, start=0, end=1,
                antecedents=("it1",)),
    ),
    metadata={"episode": "e01", "scene": "1"},
)
target = Document(
    doc_id="zh/scene", language="zh",
    utterances=(
        Utterance(speaker="Penny", tokens=("狗", "看见", "了")),
        Utterance(speaker="Sheldon", tokens=("跑", "了")),
    ),
    metadata=dict(source.metadata),
)
parallel = ParallelDocument(source=source, targets={"zh": target},
                            utterance_map={"zh": (0, 1)})

# Chinese drops the pronouns: only "the dog" aligns in utterance 0 and
# nothing from the source span "it" aligns anywhere (pro-drop).
alignments = AlignmentSet({
    (0, 0): {(0, 0), (1, 0), (2, 1)},
    (1, 1): {(1, 0)},
})

result = project_document(parallel, alignments, "zh")
print("\nprojected mentions:", [(m.id, m.span()) for m in result.target_doc.mentions])
print("null projections:", sorted(
    mid for mid, entry in result.provenance.items()
    if entry.status.value == "null_projection"))
print("clusters on the target side:",
      [sorted(c) for c in build_clusters(result.target_doc).clusters])
print(stats_report_tsv(projection_stats_report([result])))

# A reviewer recovers the dropped pronoun: the cluster regains a member.
log = [Correction(CorrectionAction.ADDITION, "it1", span=(0, 2, 3),
                  annotator="reviewer", timestamp_ms=1_000)]
corrected = apply_corrections(result, log)
print("after correction:",
      [sorted(c) for c in build_clusters(corrected).clusters])
