"""
Documents, mentions, and cluster construction
=============================================

A Document is one scene of dialogue: utterances with speakers, plus
mention annotations over token spans. Entity clusters are never stored;
they are derived from antecedent links by transitive closure.
"""

from crosscoref import (
    Document,
    Mention,
    MentionFlag,
    MentionKind,
    SplitPolicy,
    Utterance,
    build_clusters,
    validate_document,
)

# Two utterances; token spans are end-exclusive.
scene = Document(
    doc_id="demo/clusters",
    language="en",
    utterances=(
        Utterance(speaker="Penny", tokens=("the", "dog", "barked")),
        Utterance(speaker="Sheldon", tokens=("she", "heard", "the", "dog")),
    ),
    mentions=(
        Mention(id="dog1", kind=MentionKind.SPAN, utt_index=0, start=0, end=2),
        Mention(id="she", kind=MentionKind.SPAN, utt_index=1, start=0, end=1,
                flags=frozenset({MentionFlag.NO_ANTECEDENT})),
        Mention(id="dog2", kind=MentionKind.SPAN, utt_index=1, start=2, end=4,
                antecedents=("dog1",)),
        # the speaker of utterance 0 as a markable
        Mention(id="penny", kind=MentionKind.SPEAKER, utt_index=0),
    ),
    metadata={"episode": "e01", "scene": "2"},
)

print("violations:", validate_document(scene))  # [] -> well formed

clusters = build_clusters(scene)
print("clusters:")
for cluster in clusters.clusters:
    print("  ", sorted(cluster))

# Split antecedents ("we" -> Penny + Sheldon) contribute no edges under
# the scoring default, and only their first link otherwise.
with_split = Document(
    doc_id="demo/split", language="en",
    utterances=(Utterance(speaker="", tokens=("we", "left", "them", "alone")),),
    mentions=(
        Mention(id="a", kind=MentionKind.SPAN, utt_index=0, start=1, end=2),
        Mention(id="b", kind=MentionKind.SPAN, utt_index=0, start=2, end=3),
        Mention(id="we", kind=MentionKind.SPAN, utt_index=0, start=0, end=1,
                antecedents=("a", "b")),
    ),
)
print("drop_split:", build_clusters(with_split, SplitPolicy.DROP_SPLIT).sizes())
print("first_antecedent:",
      build_clusters(with_split, SplitPolicy.FIRST_ANTECEDENT).sizes())
