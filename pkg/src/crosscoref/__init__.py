"""Cross-lingual coreference data engineering for multiparty dialogue.

Core pieces: dialogue documents with mention annotations (`core`),
JSONL/CoNLL/Pharaoh interchange (`jsonl`, `conll`, `parallel`), span
projection through word alignments plus human corrections
(`projection`), two-way annotation merging with adjudication (`merge`),
the standard coreference metrics (`metrics`), head-lemma baseline and
corpus transforms (`analysis`), the noise-tolerant loss kernel (`loss`),
and a small review HTTP service (`service`) behind the `crosscoref` CLI.
"""

from .core import (
    Clustering,
    CorefError,
    Document,
    Mention,
    MentionFlag,
    MentionKind,
    SplitPolicy,
    Utterance,
    build_clusters,
    validate_document,
)
from .metrics import EvalPair, MetricScore, b_cubed, ceaf_phi4, conll_f1, evaluate, mention_prf, muc

__all__ = [
    "Clustering",
    "CorefError",
    "Document",
    "EvalPair",
    "Mention",
    "MentionFlag",
    "MentionKind",
    "MetricScore",
    "SplitPolicy",
    "Utterance",
    "b_cubed",
    "build_clusters",
    "ceaf_phi4",
    "conll_f1",
    "evaluate",
    "mention_prf",
    "muc",
    "validate_document",
]

__version__ = "0.1.0"
