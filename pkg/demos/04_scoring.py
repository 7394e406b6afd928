"""
Coreference scoring: MUC, B-cubed, CEAF, and their CoNLL average
================================================================

The textbook example: gold puts {a,b,c} in one entity, the system finds
{a,b} and leaves {c} alone. Each metric punishes that differently.
"""

from crosscoref import Clustering, EvalPair, b_cubed, ceaf_phi4, conll_f1, muc
from crosscoref.metrics import corpus_scores, evaluate, mention_prf

pair = EvalPair(key=Clustering.from_sets([{"a", "b", "c"}]),
                response=Clustering.from_sets([{"a", "b"}, {"c"}]))

for name, metric in (("MUC", muc), ("B3", b_cubed), ("CEAF", ceaf_phi4),
                     ("mention", mention_prf)):
    score = metric(pair)
    print(f"{name:8s} P={score.precision:.4f} R={score.recall:.4f} "
          f"F1={score.f1:.4f}")
print(f"CoNLL F1 = {conll_f1(pair):.6f}   (mean of the three F1s)")

# Scoring against yourself is always perfect.
same = EvalPair(pair.key, pair.key)
print("\nself-score:", evaluate(same).conll_f1)

# Corpus scores micro-average across documents: numerators and
# denominators are summed before dividing (macro averages the F1s).
micro = corpus_scores([pair, same])
macro = corpus_scores([pair, same], macro=True)
print(f"micro CoNLL {micro.conll_f1:.4f} vs macro CoNLL {macro.conll_f1:.4f}")

# Undefined ratios (0/0) report 0 with an explicit flag, never NaN.
empty = EvalPair(key=pair.key, response=Clustering(()))
report = evaluate(empty)
print("\nempty response -> conll", report.conll_f1,
      "undefined:", sorted(report.ceaf.undefined))
