"""Dataset plumbing: JSONL ingestion, vocabularies, cached example views."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .alignment import Alignment, match_kg_nodes
from .graphs import LabeledGraph, parse_penman, parse_triple_set, simplify, strip_sense
from .views import (
    FeatureVocabulary,
    GraphToken,
    GroundedArcSet,
    LinearizedGraph,
    TokenKind,
    build_feature_vocab,
    feature_index_matrix,
    ground_triples,
    linearize_covering,
)

SENT_RESERVED = ("<unk>", "<bos>", "<eos>")
GRAPH_RESERVED = ("<unk>", "<bos>")


class DataError(ValueError):
    pass


@dataclass
class Vocab:
    """Ordered token vocabulary with an optional UNK fallback."""

    tokens: list[str]
    unk: int | None = None
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise DataError("duplicate token in vocabulary")

    @classmethod
    def build(
        cls,
        counts: Counter[str],
        reserved: Sequence[str] = (),
        min_count: int = 1,
        unk_token: str | None = "<unk>",
    ) -> "Vocab":
        tokens = list(reserved)
        have = set(tokens)
        for tok, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            if c >= min_count and tok not in have:
                tokens.append(tok)
                have.add(tok)
        unk = tokens.index(unk_token) if unk_token in have else None
        return cls(tokens, unk)

    def id(self, token: str) -> int:
        got = self.index.get(token)
        if got is not None:
            return got
        if self.unk is not None:
            return self.unk
        raise DataError(f"token {token!r} not in vocabulary")

    def ids(self, tokens: Iterable[str]) -> np.ndarray:
        return np.asarray([self.id(t) for t in tokens], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.tokens)

    def save(self, path: Path) -> None:
        path.write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path, unk_token: str | None = "<unk>") -> "Vocab":
        tokens = path.read_text(encoding="utf-8").splitlines()
        unk = tokens.index(unk_token) if unk_token in tokens else None
        return cls(tokens, unk)


@dataclass
class AlignedExample:
    """One training example with both views and encoded id arrays cached."""

    ex_id: str
    graph: LabeledGraph
    sentence: tuple[str, ...]
    alignment: Alignment
    arcs: GroundedArcSet
    linearized: LinearizedGraph
    features: np.ndarray  # (N, N) feature vocabulary indices
    enc_ids: np.ndarray
    sent_ids: np.ndarray
    graph_ids: np.ndarray


@dataclass
class PreprocessConfig:
    task: str = "amr"
    features_cap: int = 20000
    min_count: int = 2
    no_edge_labels: bool = False
    random_linearization: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.task not in ("amr", "kg"):
            raise DataError(f"unknown task {self.task!r}")
        if self.features_cap < 3:
            raise DataError("features_cap must be at least 3")


@dataclass
class Corpus:
    examples: list[AlignedExample]
    sentence_vocab: Vocab
    graph_vocab: Vocab
    label_vocab: Vocab
    feature_vocab: FeatureVocabulary
    config: PreprocessConfig


def load_jsonl(path: str | Path) -> list[dict]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON ({exc})") from None
    if not records:
        raise DataError(f"{path}: no records")
    return records


def record_graph(record: dict, task: str) -> LabeledGraph:
    if "graph" in record:
        g = parse_penman(record["graph"])
        if task == "amr":
            g = simplify(g)
        return g
    if "triples" in record:
        return parse_triple_set(record["triples"])
    raise DataError(f"record {record.get('id', '?')!r} has neither 'graph' nor 'triples'")


def record_alignment(record: dict, graph: LabeledGraph, sentence: Sequence[str], task: str) -> Alignment:
    raw = record.get("alignments")
    if raw is not None:
        # entries for nodes the simplifier dropped (e.g. :wiki constants)
        # are discarded
        known = set(graph.node_ids)
        return Alignment({str(k): tuple(int(i) for i in v) for k, v in raw.items() if str(k) in known})
    if task == "kg" and sentence:
        aligned, _ = match_kg_nodes(graph, sentence)
        return aligned
    return Alignment({})


def _lin_seed(base: int, index: int) -> int:
    return (base * 1_000_003 + index) & 0x7FFFFFFF


def build_views(
    graph: LabeledGraph,
    alignment: Alignment,
    sentence: Sequence[str],
    cfg: PreprocessConfig,
    index: int,
) -> tuple[GroundedArcSet, LinearizedGraph]:
    arcs = ground_triples(graph, alignment, len(sentence), edge_labels=not cfg.no_edge_labels)
    order = "random" if cfg.random_linearization else "input"
    lin = linearize_covering(graph, order=order, seed=_lin_seed(cfg.seed, index), edge_labels=not cfg.no_edge_labels)
    return arcs, lin


def preprocess(records: Sequence[dict], cfg: PreprocessConfig) -> Corpus:
    """Parse records, build both views, then vocabularies and id arrays."""
    parsed = []
    for index, record in enumerate(records):
        ex_id = str(record.get("id", index))
        sentence = tuple(str(t) for t in record.get("sentence", ()))
        graph = record_graph(record, cfg.task)
        alignment = record_alignment(record, graph, sentence, cfg.task)
        arcs, lin = build_views(graph, alignment, sentence, cfg, index)
        parsed.append((ex_id, graph, sentence, alignment, arcs, lin))

    sent_counts: Counter[str] = Counter()
    graph_counts: Counter[str] = Counter()
    label_counts: Counter[str] = Counter()
    for _, graph, sentence, _, arcs, lin in parsed:
        sent_counts.update(sentence)
        graph_counts.update(lin.texts)
        graph_counts.update(strip_sense(label) for _, label in graph.nodes)
        label_counts.update(label for _, label, _ in arcs.arcs)
    sentence_vocab = Vocab.build(sent_counts, SENT_RESERVED, min_count=cfg.min_count)
    graph_vocab = Vocab.build(graph_counts, GRAPH_RESERVED, min_count=1)
    label_vocab = Vocab.build(label_counts, (), min_count=1, unk_token=None)
    if len(label_vocab) == 0:
        label_vocab = Vocab(["<norel>"], None)
    feature_vocab = build_feature_vocab((g for _, g, _, _, _, _ in parsed), cfg.features_cap)

    examples = []
    for ex_id, graph, sentence, alignment, arcs, lin in parsed:
        examples.append(
            encode_example(ex_id, graph, sentence, alignment, arcs, lin, sentence_vocab, graph_vocab, feature_vocab)
        )
    return Corpus(examples, sentence_vocab, graph_vocab, label_vocab, feature_vocab, cfg)


def encode_example(
    ex_id: str,
    graph: LabeledGraph,
    sentence: Sequence[str],
    alignment: Alignment,
    arcs: GroundedArcSet,
    lin: LinearizedGraph,
    sentence_vocab: Vocab,
    graph_vocab: Vocab,
    feature_vocab: FeatureVocabulary,
) -> AlignedExample:
    features = np.asarray(feature_index_matrix(graph, feature_vocab), dtype=np.int64)
    return AlignedExample(
        ex_id=ex_id,
        graph=graph,
        sentence=tuple(sentence),
        alignment=alignment,
        arcs=arcs,
        linearized=lin,
        features=features,
        enc_ids=graph_vocab.ids(strip_sense(label) for _, label in graph.nodes),
        sent_ids=sentence_vocab.ids(sentence),
        graph_ids=graph_vocab.ids(lin.texts),
    )


# -- directory round trip -------------------------------------------------

_KIND_CODE = {
    TokenKind.NODE: "n",
    TokenKind.EDGE: "e",
    TokenKind.OPEN: "(",
    TokenKind.CLOSE: ")",
}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def save_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = corpus.config
    meta = {
        "task": cfg.task,
        "features_cap": cfg.features_cap,
        "min_count": cfg.min_count,
        "no_edge_labels": cfg.no_edge_labels,
        "random_linearization": cfg.random_linearization,
        "seed": cfg.seed,
        "examples": len(corpus.examples),
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    corpus.sentence_vocab.save(out / "sentence.vocab")
    corpus.graph_vocab.save(out / "graph.vocab")
    corpus.label_vocab.save(out / "labels.vocab")
    feature_lines = "\n".join(corpus.feature_vocab.texts) + "\n"
    (out / "features.vocab").write_text(feature_lines, encoding="utf-8")
    with open(out / "examples.jsonl", "w", encoding="utf-8") as fh:
        for ex in corpus.examples:
            record = {
                "id": ex.ex_id,
                "nodes": [[nid, label] for nid, label in ex.graph.nodes],
                "edges": [[s, l, t] for s, l, t in ex.graph.edges],
                "root": ex.graph.root,
                "sentence": list(ex.sentence),
                "alignments": {nid: list(toks) for nid, toks in ex.alignment.entries.items()},
                "arcs": [[h, l, m] for h, l, m in ex.arcs.arcs],
                "skipped_edges": ex.arcs.skipped_edges,
                "linearized": [[_KIND_CODE[t.kind], t.text] for t in ex.linearized.tokens],
            }
            fh.write(json.dumps(record) + "\n")


def load_corpus(data_dir: str | Path) -> Corpus:
    data = Path(data_dir)
    meta = json.loads((data / "meta.json").read_text(encoding="utf-8"))
    cfg = PreprocessConfig(
        task=meta["task"],
        features_cap=meta["features_cap"],
        min_count=meta["min_count"],
        no_edge_labels=meta["no_edge_labels"],
        random_linearization=meta["random_linearization"],
        seed=meta["seed"],
    )
    sentence_vocab = Vocab.load(data / "sentence.vocab")
    graph_vocab = Vocab.load(data / "graph.vocab")
    label_vocab = Vocab.load(data / "labels.vocab", unk_token=None)
    feature_texts = (data / "features.vocab").read_text(encoding="utf-8").splitlines()
    feature_vocab = FeatureVocabulary(
        {t: i for i, t in enumerate(feature_texts)}, cfg.features_cap, feature_texts.index("UNK")
    )
    examples = []
    for record in load_jsonl(data / "examples.jsonl"):
        graph = LabeledGraph(
            tuple((n, l) for n, l in record["nodes"]),
            tuple((s, l, t) for s, l, t in record["edges"]),
            record["root"],
        )
        sentence = tuple(record["sentence"])
        alignment = Alignment({k: tuple(v) for k, v in record["alignments"].items()})
        arcs = GroundedArcSet(
            tuple((h, l, m) for h, l, m in record["arcs"]),
            len(sentence),
            record["skipped_edges"],
        )
        lin = LinearizedGraph(tuple(GraphToken(_CODE_KIND[k], text) for k, text in record["linearized"]))
        examples.append(
            encode_example(record["id"], graph, sentence, alignment, arcs, lin, sentence_vocab, graph_vocab, feature_vocab)
        )
    return Corpus(examples, sentence_vocab, graph_vocab, label_vocab, feature_vocab, cfg)
