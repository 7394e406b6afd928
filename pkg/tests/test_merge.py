import pytest

from crosscoref.merge import (
    AdjudicationDecision,
    AnnotationTriplet,
    Answer,
    Choice,
    MergeError,
    agreement_report,
    annotator_clustering,
    answer_category,
    apply_decisions,
    cohen_kappa,
    decision_from_record,
    decision_to_record,
    merge_two_way,
    triplet_from_record,
    triplet_to_record,
)


def span(target):
    return Answer.span_of(target)


def trip(query, a1, a2):
    return AnnotationTriplet(query, a1, a2)


def test_agreed_seed_then_same_cluster_absorption():
    triplets = [
        trip("q1", span("a"), span("a")),
        trip("q2", span("q1"), span("a")),
    ]
    state = merge_two_way(triplets)
    assert state.clusters.as_sets() == {frozenset({"a", "q1", "q2"})}
    assert state.disagreements == ()
    assert state.resolved == frozenset({"q1", "q2"})


def test_agreed_not_mention_resolves_clusterless():
    state = merge_two_way([
        trip("q1", Answer.not_mention(), Answer.not_mention())])
    assert state.resolved == frozenset({"q1"})
    assert state.clusters.as_sets() == set()
    assert state.disagreements == ()


def test_agreed_no_antecedent_seeds_singleton():
    state = merge_two_way([
        trip("q1", Answer.no_antecedent(), Answer.no_antecedent())])
    assert state.clusters.as_sets() == {frozenset({"q1"})}


def test_answers_in_different_clusters_queue_for_adjudication():
    triplets = [
        trip("q1", span("a"), span("a")),
        trip("q2", span("b"), span("b")),
        trip("q3", span("a"), span("b")),
    ]
    state = merge_two_way(triplets)
    assert [t.query for t in state.disagreements] == ["q3"]
    assert state.clusters.as_sets() == {frozenset({"a", "q1"}),
                                        frozenset({"b", "q2"})}


def test_new_span_answers_unify_by_exact_span():
    triplets = [
        trip("q1", Answer.new_span(0, 2, 4), Answer.new_span(0, 2, 4)),
        trip("q2", span("q1"), Answer.new_span(0, 2, 4)),
    ]
    state = merge_two_way(triplets)
    assert state.disagreements == ()
    assert state.clusters.as_sets() == {
        frozenset({"q1", "q2", ("span", 0, 2, 4)})}


def test_mixed_sentinel_disagreement_queues():
    state = merge_two_way([
        trip("q1", Answer.not_mention(), Answer.no_antecedent())])
    assert [t.query for t in state.disagreements] == ["q1"]
    assert state.resolved == frozenset()


def test_self_reference_raises():
    with pytest.raises(MergeError):
        merge_two_way([trip("q1", span("q1"), span("a"))])


def test_duplicate_query_raises():
    with pytest.raises(MergeError):
        merge_two_way([trip("q1", span("a"), span("a")),
                       trip("q1", span("b"), span("b"))])


def test_all_agreeing_triplets_leave_empty_queue(rng):
    for _ in range(50):
        triplets = []
        for i in range(rng.randint(1, 20)):
            roll = rng.random()
            if roll < 0.3:
                answer = Answer.not_mention()
            elif roll < 0.5:
                answer = Answer.no_antecedent()
            elif triplets and roll < 0.8:
                answer = span(rng.choice(triplets).query)
            else:
                answer = span(f"m{i}")
            triplets.append(trip(f"q{i}", answer, answer))
        state = merge_two_way(triplets)
        assert state.disagreements == ()
        assert state.resolved == {t.query for t in triplets}


def random_triplets(rng, n_queries=None):
    n = n_queries or rng.randint(1, 60)
    markables = [f"m{i}" for i in range(rng.randint(1, 8))]
    triplets = []
    for i in range(n):
        candidates = markables + [t.query for t in triplets]

        def answer():
            roll = rng.random()
            if roll < 0.12:
                return Answer.not_mention()
            if roll < 0.24:
                return Answer.no_antecedent()
            if roll < 0.3:
                return Answer.new_span(0, rng.randrange(5), rng.randrange(5, 9))
            return span(rng.choice(candidates))

        first = answer()
        second = first if rng.random() < 0.55 else answer()
        triplets.append(trip(f"q{i}", first, second))
    return triplets


def test_phase2_fixpoint_is_order_invariant(rng):
    for _ in range(100):
        triplets = random_triplets(rng)
        baseline = merge_two_way(triplets)
        queries = [t.query for t in triplets]
        for _ in range(5):
            order = list(queries)
            rng.shuffle(order)
            shuffled = merge_two_way(triplets, phase2_order=order)
            assert shuffled.clusters == baseline.clusters
            assert shuffled.disagreements == baseline.disagreements
            assert shuffled.resolved == baseline.resolved


def test_pick_first_joins_first_answer_cluster():
    triplets = [
        trip("q1", span("a"), span("a")),
        trip("q2", span("b"), span("b")),
        trip("q3", span("a"), span("b")),
    ]
    state = merge_two_way(triplets)
    decided = apply_decisions(state, [
        AdjudicationDecision("q3", Choice.PICK_FIRST)])
    assert decided.clusters.as_sets() == {frozenset({"a", "q1", "q3"}),
                                          frozenset({"b", "q2"})}
    assert decided.disagreements == ()


def test_relabel_to_not_mention_resolves_clusterless():
    state = merge_two_way([trip("q1", span("a"), span("b"))])
    decided = apply_decisions(state, [
        AdjudicationDecision("q1", Choice.RELABEL,
                             relabel=Answer.not_mention())])
    assert decided.disagreements == ()
    assert "q1" in decided.resolved
    assert all("q1" not in c for c in decided.clusters.clusters)


def test_decisions_resolve_all_disagreements():
    triplets = [
        trip("q1", span("a"), span("b")),
        trip("q2", span("a"), Answer.not_mention()),
        trip("q3", Answer.no_antecedent(), span("a")),
    ]
    state = merge_two_way(triplets)
    assert len(state.disagreements) == 3
    decided = apply_decisions(state, [
        AdjudicationDecision("q1", Choice.PICK_FIRST),
        AdjudicationDecision("q2", Choice.PICK_SECOND),
        AdjudicationDecision("q3", Choice.RELABEL,
                             relabel=span("q1")),
    ])
    assert decided.disagreements == ()
    assert decided.resolved == frozenset({"q1", "q2", "q3"})
    assert decided.clusters.as_sets() == {frozenset({"a", "q1", "q3"})}


def test_decision_for_non_queued_query_raises():
    state = merge_two_way([trip("q1", span("a"), span("a"))])
    with pytest.raises(MergeError):
        apply_decisions(state, [AdjudicationDecision("q1", Choice.PICK_FIRST)])


def test_resolution_is_monotone(rng):
    for _ in range(30):
        triplets = random_triplets(rng, n_queries=20)
        state = merge_two_way(triplets)
        if not state.disagreements:
            continue
        target = rng.choice(state.disagreements)
        decided = apply_decisions(state, [
            AdjudicationDecision(target.query, Choice.PICK_FIRST)])
        assert state.resolved <= decided.resolved
        assert target.query in decided.resolved


# -------------------------------------------------------------- agreement

def test_identical_annotator_scores_perfect_muc():
    triplets = [
        trip("q1", span("a"), span("a")),
        trip("q2", span("q1"), span("q1")),
    ]
    state = merge_two_way(triplets)
    report = agreement_report(triplets, state.clusters)
    assert report.annotator_muc[0].f1 == 1.0
    assert report.annotator_muc[1].f1 == 1.0
    assert report.annotator_conll[0] == 1.0
    assert report.kappa == 1.0


def test_total_categorical_disagreement_gives_nonpositive_kappa():
    pairs = [(("not_mention",), ("no_antecedent",)),
             (("no_antecedent",), ("not_mention",))] * 5
    assert cohen_kappa(pairs) <= 0


def test_kappa_matches_hand_computed_confusion_table():
    # confusion over categories A/B/C:
    #   (A,A) x3  (B,B) x2  (C,C) x1  (A,B) x2  (B,C) x1  (C,A) x1
    # po = 6/10; ann1 marginals A5 B3 C2; ann2 marginals A4 B4 C2
    # pe = (5*4 + 3*4 + 2*2)/100 = 0.36; kappa = 0.24/0.64 = 0.375
    a = lambda: span("a")          # category A
    b = Answer.not_mention         # category B
    c = Answer.no_antecedent       # category C
    pattern = [(a, a), (a, a), (a, a), (b, b), (b, b), (c, c),
               (a, b), (a, b), (b, c), (c, a)]
    triplets = [trip(f"q{i}", first(), second())
                for i, (first, second) in enumerate(pattern)]
    pairs = [(answer_category(t.answer1), answer_category(t.answer2))
             for t in triplets]
    assert cohen_kappa(pairs) == pytest.approx(0.375, abs=1e-12)

    state = merge_two_way(triplets)
    report = agreement_report(triplets, state.clusters)
    assert report.kappa == pytest.approx(0.375, abs=1e-12)


def test_annotator_clustering_uses_one_answer_column():
    triplets = [trip("q1", span("a"), Answer.not_mention())]
    first = annotator_clustering(triplets, 1)
    second = annotator_clustering(triplets, 2)
    assert first.as_sets() == {frozenset({"a", "q1"})}
    assert second.as_sets() == set()


def test_record_round_trips():
    triplet = trip("q1", Answer.new_span(0, 1, 2), span("a"))
    assert triplet_from_record(triplet_to_record(triplet)) == triplet
    decision = AdjudicationDecision("q1", Choice.RELABEL,
                                    relabel=Answer.not_mention())
    assert decision_from_record(decision_to_record(decision)) == decision
