import math

import pytest
from hypothesis import given, strategies as st

from graph2text.graphs import parse_penman
from graph2text.metrics import bleu_details, evaluate_bleu, relation_recall

DOCTOR_AMR = """\
(r / recommend-01
    :ARG0 (i / i)
    :ARG1 (g / go-02
        :ARG0 (y / you)
        :purpose (s / see-01
            :ARG0 y
            :ARG1 (p / person
                :ARG0-of (h / have-rel-role-91
                    :ARG1 y
                    :ARG2 (d / doctor)))
            :mod (t / too)))
    :ARG2 y)
"""


class TestBleu:
    def test_identical_corpora_score_100(self):
        refs = [["the", "cat", "sat"], ["a", "dog", "ran", "off"]]
        assert evaluate_bleu(refs, refs) == 100.0

    def test_worked_five_vs_six_token_example(self):
        ref = ["the", "cat", "sat", "on", "the", "mat"]
        hyp = ["the", "cat", "sat", "on", "mat"]
        details = bleu_details([ref], [hyp])
        assert details.precisions == (5 / 5, 3 / 4, 2 / 3, 1 / 2)
        assert details.brevity_penalty == math.exp(1.0 - 6 / 5)
        # independent computation straight from the definition
        independent = 100.0 * math.exp(1.0 - 6 / 5) * (1.0 * (3 / 4) * (2 / 3) * (1 / 2)) ** 0.25
        assert abs(details.score - independent) < 1e-9
        assert abs(details.score - 57.9) < 0.05

    def test_short_hypothesis_scores_zero(self):
        assert evaluate_bleu([["a", "b", "c", "d", "e"]], [["a", "b", "c"]]) == 0.0

    def test_no_overlap_scores_zero(self):
        assert evaluate_bleu([["x", "y", "z", "w"]], [["a", "b", "c", "d"]]) == 0.0

    def test_reordering_pairs_consistently_keeps_score(self):
        refs = [["a", "b", "c", "d"], ["e", "f", "g", "h", "i"], ["j", "k", "l", "m"]]
        hyps = [["a", "b", "c", "x"], ["e", "f", "g", "h"], ["j", "k", "l", "m"]]
        base = evaluate_bleu(refs, hyps)
        perm = [2, 0, 1]
        assert evaluate_bleu([refs[i] for i in perm], [hyps[i] for i in perm]) == base

    def test_count_mismatch_rejected(self):
        with pytest.raises(ValueError, match="references"):
            evaluate_bleu([["a"]], [["a"], ["b"]])

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            evaluate_bleu([], [])

    def test_clipping(self):
        # "the the the" can only claim as many matches as the reference has
        details = bleu_details([["the", "cat", "the", "mat"]], [["the", "the", "the", "the"]])
        assert details.precisions[0] == 2 / 4

    @given(st.lists(st.lists(st.sampled_from("abcde"), min_size=4, max_size=9), min_size=1, max_size=5))
    def test_self_evaluation_is_100(self, corpus):
        assert evaluate_bleu(corpus, corpus) == 100.0


class TestRelationRecall:
    def test_preserved_when_all_words_in_order(self):
        g = parse_penman("(v / see-01 :ARG0 (a / cat) :ARG1 (b / bird))")
        report = relation_recall([g], [["the", "cat", "sees", "a", "bird"]])
        # "see" itself is absent ("sees" does not count), so not preserved
        assert report.per_example[0] == (0, 1)
        report = relation_recall([g], [["the", "cat", "did", "see", "a", "bird"]])
        assert report.per_example[0] == (1, 1)
        assert report.recall == 1.0

    def test_doctor_example(self):
        g = parse_penman(DOCTOR_AMR)
        baseline = "i should go to see your doctor too".split()
        ours = "i recommend you to go to see your doctor too".split()
        base_report = relation_recall([g], [baseline])
        ours_report = relation_recall([g], [ours])
        # interactions: (i, recommend, go) and (you, see, person)
        assert base_report.total == 2
        base_kept = base_report.per_example[0][0]
        ours_kept = ours_report.per_example[0][0]
        assert base_kept == 0  # "recommend" absent; "person" absent
        assert ours_kept == 1  # i ... recommend ... go preserved

    def test_subject_must_precede_object(self):
        g = parse_penman("(v / see-01 :ARG0 (a / cat) :ARG1 (b / bird))")
        report = relation_recall([g], [["bird", "see", "cat"]])
        assert report.per_example[0] == (0, 1)

    def test_zero_interaction_graph_skipped(self):
        g = parse_penman("(a / thing :mod (b / red))")
        report = relation_recall([g], [["anything"]])
        assert report.per_example[0] is None
        assert report.recall is None

    def test_count_mismatch_rejected(self):
        g = parse_penman("(a / thing)")
        with pytest.raises(ValueError, match="graphs"):
            relation_recall([g], [])

    def test_monotone_under_appending_words(self):
        g = parse_penman(
            "(v / see-01 :ARG0 (a / cat) :ARG1 (b / bird) "
            ":ARG1 (c / bug))"
        )
        hyp = ["cat", "see", "bird"]
        before = relation_recall([g], [hyp]).per_example[0]
        after = relation_recall([g], [hyp + ["cat", "see", "bug"]]).per_example[0]
        assert after[0] >= before[0]
        assert after[0] == 2
