import json
from collections import Counter

import numpy as np
import pytest

from graph2text.data import (
    Corpus,
    DataError,
    PreprocessConfig,
    Vocab,
    load_corpus,
    load_jsonl,
    preprocess,
    save_corpus,
)
from graph2text.synthetic import overfit_records


class TestVocab:
    def test_reserved_first_then_frequency(self):
        counts = Counter({"cat": 5, "dog": 3, "rare": 1})
        vocab = Vocab.build(counts, ("<unk>", "<bos>"), min_count=2)
        assert vocab.tokens[:2] == ["<unk>", "<bos>"]
        assert vocab.id("cat") == 2
        assert vocab.id("rare") == vocab.unk

    def test_no_unk_raises(self):
        vocab = Vocab.build(Counter({"a": 1}), (), min_count=1, unk_token=None)
        with pytest.raises(DataError, match="not in vocabulary"):
            vocab.id("missing")

    def test_save_load_round_trip(self, tmp_path):
        vocab = Vocab.build(Counter({"x": 2, "y": 1}), ("<unk>",), min_count=1)
        vocab.save(tmp_path / "v.vocab")
        again = Vocab.load(tmp_path / "v.vocab")
        assert again.tokens == vocab.tokens
        assert again.unk == vocab.unk


class TestPreprocess:
    def test_synthetic_pipeline(self):
        records = overfit_records(8, seed=1)
        corpus = preprocess(records, PreprocessConfig(task="amr", features_cap=100, min_count=1))
        assert len(corpus.examples) == 8
        ex = corpus.examples[0]
        n = ex.graph.n_nodes
        assert ex.features.shape == (n, n)
        assert len(ex.enc_ids) == n
        assert len(ex.sent_ids) == len(ex.sentence)
        assert len(ex.graph_ids) == len(ex.linearized)
        # every arc label resolvable
        for _, label, _ in ex.arcs.arcs:
            corpus.label_vocab.id(label)

    def test_kg_records_use_matcher(self):
        records = [
            {
                "id": "kg0",
                "triples": ["Above_the_Veil | followedBy | Into_the_Battle"],
                "sentence": "above the veil is followed by into the battle".split(),
            }
        ]
        corpus = preprocess(records, PreprocessConfig(task="kg", min_count=1, features_cap=10))
        ex = corpus.examples[0]
        assert ex.alignment.get("Above_the_Veil") == (0, 1, 2)
        assert len(ex.arcs) == 5  # relation arc + four compound arcs

    def test_amr_without_alignments_has_empty_view1(self):
        records = [{"id": "x", "graph": "(a / cat :ARG0 (b / dog))", "sentence": ["cat", "dog"]}]
        corpus = preprocess(records, PreprocessConfig(task="amr", min_count=1, features_cap=10))
        assert len(corpus.examples[0].arcs) == 0
        assert corpus.examples[0].arcs.skipped_edges == 1

    def test_record_without_graph_rejected(self):
        with pytest.raises(DataError, match="neither"):
            preprocess([{"id": "x", "sentence": ["a"]}], PreprocessConfig(task="amr"))

    def test_unknown_task_rejected(self):
        with pytest.raises(DataError, match="unknown task"):
            PreprocessConfig(task="tables")

    def test_no_edge_labels_flag(self):
        records = overfit_records(3, seed=2)
        corpus = preprocess(records, PreprocessConfig(task="amr", min_count=1, features_cap=50, no_edge_labels=True))
        ex = corpus.examples[0]
        assert all(label == "<rel>" for _, label, _ in ex.arcs.arcs)
        assert all(not t.startswith(":") for t in ex.linearized.texts)

    def test_random_linearization_differs_but_reparses(self):
        from graph2text.graphs import isomorphic
        from graph2text.views import reparse_linearized

        records = overfit_records(5, seed=3)
        plain = preprocess(records, PreprocessConfig(task="amr", min_count=1, features_cap=50))
        rand = preprocess(
            records, PreprocessConfig(task="amr", min_count=1, features_cap=50, random_linearization=True, seed=4)
        )
        for p_ex, r_ex in zip(plain.examples, rand.examples):
            assert isomorphic(reparse_linearized(r_ex.linearized), p_ex.graph)


class TestCorpusDirRoundTrip:
    def test_save_load_preserves_everything(self, tmp_path):
        records = overfit_records(6, seed=5)
        corpus = preprocess(records, PreprocessConfig(task="amr", min_count=1, features_cap=64))
        save_corpus(corpus, tmp_path / "data")
        again = load_corpus(tmp_path / "data")
        assert again.sentence_vocab.tokens == corpus.sentence_vocab.tokens
        assert again.graph_vocab.tokens == corpus.graph_vocab.tokens
        assert again.label_vocab.tokens == corpus.label_vocab.tokens
        assert again.feature_vocab.entries == corpus.feature_vocab.entries
        assert len(again.examples) == len(corpus.examples)
        for a, b in zip(corpus.examples, again.examples):
            assert a.ex_id == b.ex_id
            assert a.graph == b.graph
            assert a.sentence == b.sentence
            assert a.arcs == b.arcs
            assert a.linearized == b.linearized
            assert np.array_equal(a.features, b.features)
            assert np.array_equal(a.sent_ids, b.sent_ids)
            assert np.array_equal(a.graph_ids, b.graph_ids)

    def test_meta_contents(self, tmp_path):
        corpus = preprocess(overfit_records(2, seed=6), PreprocessConfig(task="amr", min_count=1, features_cap=32))
        save_corpus(corpus, tmp_path / "d")
        meta = json.loads((tmp_path / "d" / "meta.json").read_text())
        assert meta["task"] == "amr"
        assert meta["examples"] == 2


class TestLoadJsonl:
    def test_bad_json_reported_with_line(self, tmp_path):
        path = tmp_path / "x.jsonl"
        path.write_text('{"id": "a"}\nnot json\n')
        with pytest.raises(DataError, match=":2:"):
            load_jsonl(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("\n")
        with pytest.raises(DataError, match="no records"):
            load_jsonl(path)
