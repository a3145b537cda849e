import pytest

from graph2text.alignment import (
    Alignment,
    AlignmentError,
    coverage_report,
    load_alignments,
    match_kg_nodes,
    node_words,
)
from graph2text.graphs import parse_triple_set

VEIL_SENTENCE = "above the veil is an australian novel and it was then later followed by into the battle".split()


class TestAlignmentType:
    def test_duplicate_index_rejected(self):
        with pytest.raises(AlignmentError, match="duplicate token index"):
            Alignment({"a": (1, 1)})

    def test_negative_rejected(self):
        with pytest.raises(AlignmentError, match="negative"):
            Alignment({"a": (-1,)})

    def test_empty_list_rejected(self):
        with pytest.raises(AlignmentError, match="empty token list"):
            Alignment({"a": ()})


class TestLoadAlignments:
    def test_single(self):
        assert load_alignments("b\t1").entries == {"b": (1,)}

    def test_multi_index(self):
        assert load_alignments("n\t3,4,5").entries == {"n": (3, 4, 5)}

    def test_duplicate_node(self):
        with pytest.raises(AlignmentError, match="duplicate node id"):
            load_alignments("b\t1\nb\t2")

    def test_malformed_line(self):
        with pytest.raises(AlignmentError, match="expected"):
            load_alignments("b 1")

    def test_bad_index(self):
        with pytest.raises(AlignmentError, match="bad index list"):
            load_alignments("b\tx")


class TestNodeWords:
    def test_underscores_split(self):
        assert node_words("Above_the_Veil") == ["above", "the", "veil"]

    def test_abbreviation_stripped(self):
        assert node_words("New_York_(NY)") == ["new", "york"]
        assert node_words("New York (NY)") == ["new", "york"]


class TestMatchKgNodes:
    def test_full_prefix_match(self):
        g = parse_triple_set(["Above_the_Veil | followedBy | Into_the_Battle"])
        aligned, coverage = match_kg_nodes(g, VEIL_SENTENCE)
        assert aligned.get("Above_the_Veil") == (0, 1, 2)
        assert aligned.get("Into_the_Battle") == (14, 15, 16)
        assert coverage == 1.0

    def test_abbreviation_case(self):
        g = parse_triple_set(["New_York_(NY) | a | b"])
        aligned, _ = match_kg_nodes(g, ["he", "lives", "in", "new", "york"])
        assert aligned.get("New_York_(NY)") == (3, 4)

    def test_unmatched_absent(self):
        g = parse_triple_set(["Paris | a | london"])
        aligned, coverage = match_kg_nodes(g, ["london", "calling"])
        assert "Paris" not in aligned
        assert coverage == 0.5

    def test_longest_prefix_beats_position(self):
        # 2-word prefix appears earlier than the later full 3-word match
        g = parse_triple_set(["big_red_dog | a | b"])
        sentence = ["big", "red", "car", "near", "the", "big", "red", "dog"]
        aligned, _ = match_kg_nodes(g, sentence)
        assert aligned.get("big_red_dog") == (5, 6, 7)

    def test_earliest_position_tie_break(self):
        g = parse_triple_set(["red | a | b"])
        aligned, _ = match_kg_nodes(g, ["red", "fish", "red", "car"])
        assert aligned.get("red") == (0,)

    def test_case_insensitive(self):
        g = parse_triple_set(["Veil | a | b"])
        aligned, _ = match_kg_nodes(g, ["the", "VEIL"])
        assert aligned.get("Veil") == (1,)

    def test_empty_sentence_rejected(self):
        g = parse_triple_set(["a | r | b"])
        with pytest.raises(AlignmentError, match="empty sentence"):
            match_kg_nodes(g, [])


class TestCoverageReport:
    def test_all_matched(self):
        g = parse_triple_set(["red | r | fish"])
        report = coverage_report([(g, ["red", "fish"])])
        assert report.mean == 1.0

    def test_exact_mean_of_mixed_corpus(self):
        g1 = parse_triple_set(["Above_the_Veil | followedBy | Into_the_Battle"])
        g2 = parse_triple_set(["Paris | in | France", "Paris | near | Orleans"])
        report = coverage_report([(g1, VEIL_SENTENCE), (g2, ["paris", "is", "in", "france"])])
        assert report.per_example == (1.0, 2 / 3)
        assert report.mean == (1.0 + 2 / 3) / 2

    def test_empty_corpus_rejected(self):
        with pytest.raises(AlignmentError, match="no examples"):
            coverage_report([])

    def test_histogram_and_text(self):
        g = parse_triple_set(["red | r | fish"])
        report = coverage_report([(g, ["red", "fish"]), (g, ["nothing", "here"])])
        assert report.histogram[9] == 1  # the fully matched example
        assert report.histogram[0] == 1  # the fully unmatched one
        text = report.to_text()
        assert "coverage_mean=0.500000" in text
        assert "examples=2" in text
