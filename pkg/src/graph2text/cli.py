"""Command-line interface: preprocess, train, generate, evaluate, views, gradcheck.

Every subcommand echoes its effective configuration to stderr as
"# key = value" lines so a run can be reproduced; data output goes to
stdout. Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from .alignment import AlignmentError
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .data import (
    Corpus,
    DataError,
    PreprocessConfig,
    Vocab,
    load_corpus,
    load_jsonl,
    preprocess,
    record_alignment,
    record_graph,
    save_corpus,
)
from .graphs import GraphError, parse_penman_blocks, parse_triple_blocks, simplify
from .metrics import evaluate_bleu, relation_recall
from .model import ConfigError, Model, ModelConfig
from .tensor import NonFiniteError, ShapeError
from .training import TrainConfig, TrainingError, full_model_grad_check, save_loss_log, train
from .views import feature_index_matrix, ground_triples, linearize_covering, path_feature_texts

_MODEL_KEYS = {
    "d_h",
    "heads",
    "layers",
    "d_ff",
    "arc_mlp",
    "label_mlp",
    "dropout",
    "alpha",
    "beta",
    "encoder_positions",
    "dtype",
}
_TRAIN_KEYS = {
    "steps",
    "token_budget",
    "lr",
    "schedule",
    "warmup",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "seed",
    "random_linearization",
    "baseline_only",
}


def _echo_config(command: str, values: dict) -> None:
    print(f"# command = {command}", file=sys.stderr)
    for key in sorted(values):
        print(f"# {key} = {values[key]}", file=sys.stderr)


def _read_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise DataError(f"{path}: config must be a flat JSON object")
    unknown = set(raw) - _MODEL_KEYS - _TRAIN_KEYS
    if unknown:
        raise DataError(f"{path}: unknown config keys {sorted(unknown)}")
    return raw


def _load_graphs(path: str, fmt: str):
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "penman":
        return [simplify(g) for g in parse_penman_blocks(text)]
    return parse_triple_blocks(text)


# -- subcommands -----------------------------------------------------------


def cmd_preprocess(args) -> int:
    cfg = PreprocessConfig(
        task=args.task,
        features_cap=args.features_cap,
        min_count=args.min_count,
        no_edge_labels=args.no_edge_labels,
        random_linearization=args.random_linearization,
        seed=args.seed,
    )
    _echo_config("preprocess", {"input": args.input, "out": args.out, **dataclasses.asdict(cfg)})
    corpus = preprocess(load_jsonl(args.input), cfg)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus.examples)} examples to {args.out}")
    return 0


def _resolved_configs(args, corpus: Corpus) -> tuple[ModelConfig, TrainConfig]:
    file_cfg = _read_config_file(args.config)
    model_kwargs = {k: v for k, v in file_cfg.items() if k in _MODEL_KEYS}
    train_kwargs = {k: v for k, v in file_cfg.items() if k in _TRAIN_KEYS}
    for key in _MODEL_KEYS | _TRAIN_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            (model_kwargs if key in _MODEL_KEYS else train_kwargs)[key] = flag
    train_kwargs.setdefault("random_linearization", corpus.config.random_linearization)
    model_cfg = ModelConfig(
        sentence_vocab=len(corpus.sentence_vocab),
        graph_vocab=len(corpus.graph_vocab),
        label_vocab=len(corpus.label_vocab),
        feature_vocab=len(corpus.feature_vocab),
        no_edge_labels=corpus.config.no_edge_labels,
        **model_kwargs,
    )
    train_cfg = TrainConfig(**train_kwargs)
    return model_cfg, train_cfg


def cmd_train(args) -> int:
    corpus = load_corpus(args.data)
    model_cfg, train_cfg = _resolved_configs(args, corpus)
    _echo_config(
        "train",
        {"data": args.data, "out": args.out, **dataclasses.asdict(model_cfg), **dataclasses.asdict(train_cfg)},
    )
    model, reports = train(corpus, model_cfg, train_cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out / "model.bin", model.state_arrays())
    save_loss_log(out / "losses.csv", reports)
    config_blob = {
        "model": dataclasses.asdict(model_cfg),
        "train": dataclasses.asdict(train_cfg),
        "task": corpus.config.task,
    }
    (out / "config.json").write_text(json.dumps(config_blob, indent=2) + "\n", encoding="utf-8")
    for name in ("sentence.vocab", "graph.vocab", "labels.vocab", "features.vocab", "meta.json"):
        shutil.copy(Path(args.data) / name, out / name)
    last = reports[-1]
    print(f"trained {len(reports)} steps; final l_base={last.l_base:.4f} l_final={last.l_final:.4f}")
    return 0


def _load_model_dir(ckpt_path: str) -> tuple[Model, Corpus, dict]:
    ckpt = Path(ckpt_path)
    mdir = ckpt.parent
    blob = json.loads((mdir / "config.json").read_text(encoding="utf-8"))
    model_cfg = ModelConfig(**blob["model"])
    model = Model(model_cfg, seed=0)
    model.load_state(load_checkpoint(ckpt))
    corpus = load_corpus_vocabs_only(mdir)
    return model, corpus, blob


def load_corpus_vocabs_only(mdir: Path) -> Corpus:
    """Corpus shell (vocabs + config, no examples) for inference."""
    meta = json.loads((mdir / "meta.json").read_text(encoding="utf-8"))
    cfg = PreprocessConfig(
        task=meta["task"],
        features_cap=meta["features_cap"],
        min_count=meta["min_count"],
        no_edge_labels=meta["no_edge_labels"],
        random_linearization=meta["random_linearization"],
        seed=meta["seed"],
    )
    from .views import FeatureVocabulary

    feature_texts = (mdir / "features.vocab").read_text(encoding="utf-8").splitlines()
    return Corpus(
        examples=[],
        sentence_vocab=Vocab.load(mdir / "sentence.vocab"),
        graph_vocab=Vocab.load(mdir / "graph.vocab"),
        label_vocab=Vocab.load(mdir / "labels.vocab", unk_token=None),
        feature_vocab=FeatureVocabulary(
            {t: i for i, t in enumerate(feature_texts)}, cfg.features_cap, feature_texts.index("UNK")
        ),
        config=cfg,
    )


def cmd_generate(args) -> int:
    model, corpus, blob = _load_model_dir(args.model)
    _echo_config(
        "generate",
        {"model": args.model, "input": args.input, "beam": args.beam, "max_len": args.max_len},
    )
    from .graphs import strip_sense

    for record in load_jsonl(args.input):
        graph = record_graph(record, corpus.config.task)
        enc_ids = corpus.graph_vocab.ids(strip_sense(label) for _, label in graph.nodes)
        features = np.asarray(feature_index_matrix(graph, corpus.feature_vocab), dtype=np.int64)
        result = model.generate(enc_ids, features, beam=args.beam, max_len=args.max_len)
        words = [corpus.sentence_vocab.tokens[i] for i in result.tokens]
        print(" ".join(words))
        if result.truncated:
            print(f"warning: output for {record.get('id', '?')!r} hit max length", file=sys.stderr)
    return 0


def _read_token_lines(path: str) -> list[list[str]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [line.split() for line in lines]


def cmd_evaluate(args) -> int:
    _echo_config("evaluate", {"refs": args.refs, "hyps": args.hyps, "relation_recall": args.relation_recall})
    refs = _read_token_lines(args.refs)
    hyps = _read_token_lines(args.hyps)
    score = evaluate_bleu(refs, hyps)
    print(f"BLEU = {score:.2f}")
    if args.relation_recall:
        records = load_jsonl(args.relation_recall)
        graphs = [record_graph(r, "amr" if "graph" in r else "kg") for r in records]
        report = relation_recall(graphs, hyps)
        if report.recall is None:
            print("relation_recall = undefined (no interactions)")
        else:
            print(f"relation_recall = {report.recall:.4f} ({report.preserved}/{report.total})")
    return 0


def cmd_views(args) -> int:
    _echo_config(
        "views",
        {
            "op": args.view_op,
            "input": args.input,
            "format": getattr(args, "format", None),
            "order": getattr(args, "order", None),
        },
    )
    if args.view_op == "linearize":
        for g in _load_graphs(args.input, args.format):
            lin = linearize_covering(
                g, order=args.order, seed=args.seed, edge_labels=not args.no_edge_labels
            )
            print(" ".join(lin.texts))
    elif args.view_op == "ground":
        first = True
        for record in load_jsonl(args.input):
            task = "amr" if "graph" in record else "kg"
            graph = record_graph(record, task)
            sentence = tuple(str(t) for t in record.get("sentence", ()))
            alignment = record_alignment(record, graph, sentence, task)
            arcs = ground_triples(graph, alignment, len(sentence), edge_labels=not args.no_edge_labels)
            if not first:
                print()
            first = False
            for head, label, mod in arcs.arcs:
                print(f"{head}\t{label}\t{mod}")
    else:  # paths
        if (args.src is None) != (args.dst is None):
            raise DataError("--src and --dst must be given together")
        first = True
        for g in _load_graphs(args.input, args.format):
            if not first:
                print()
            first = False
            if args.src and args.dst:
                from .views import path_feature as pf

                print(pf(g, args.src, args.dst).text)
            else:
                texts = path_feature_texts(g)
                ids = g.node_ids
                for i in range(len(ids)):
                    for j in range(len(ids)):
                        if i != j:
                            print(f"{ids[i]}\t{ids[j]}\t{texts[(i, j)]}")
    return 0


def cmd_gradcheck(args) -> int:
    _echo_config("gradcheck", {"dims": args.dims, "eps": args.eps})
    err = full_model_grad_check(d_h=args.dims, eps=args.eps)
    print(f"full-model max relative error = {err:.3e}")
    if err > 1e-4:
        print("gradcheck FAILED (threshold 1e-4)", file=sys.stderr)
        return 1
    print("gradcheck passed (threshold 1e-4)")
    return 0


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graph2text", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="build vocabularies and cached views")
    p.add_argument("--input", required=True)
    p.add_argument("--task", choices=("amr", "kg"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--features-cap", type=int, default=20000, dest="features_cap")
    p.add_argument("--min-count", type=int, default=2, dest="min_count")
    p.add_argument("--no-edge-labels", action="store_true", dest="no_edge_labels")
    p.add_argument("--random-linearization", action="store_true", dest="random_linearization")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="run the multi-task training loop")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--schedule", choices=("constant", "inverse_sqrt"), default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--token-budget", type=int, default=None, dest="token_budget")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--heads", type=int, default=None)
    p.add_argument("--d-h", type=int, default=None, dest="d_h")
    p.add_argument("--d-ff", type=int, default=None, dest="d_ff")
    p.add_argument("--arc-mlp", type=int, default=None, dest="arc_mlp")
    p.add_argument("--label-mlp", type=int, default=None, dest="label_mlp")
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--dtype", choices=("float32", "float64"), default=None)
    p.add_argument("--baseline-only", action="store_const", const=True, default=None, dest="baseline_only")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="generate sentences for input graphs")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--max-len", type=int, default=64, dest="max_len")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score hypotheses against references")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", required=True)
    p.add_argument("--relation-recall", default=None, dest="relation_recall")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("views", help="print view constructions for inspection")
    vsub = p.add_subparsers(dest="view_op", required=True)
    v = vsub.add_parser("linearize")
    v.add_argument("--input", required=True)
    v.add_argument("--format", choices=("penman", "triples"), default="penman")
    v.add_argument("--order", choices=("input", "random"), default="input")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--no-edge-labels", action="store_true", dest="no_edge_labels")
    v.set_defaults(func=cmd_views)
    v = vsub.add_parser("ground")
    v.add_argument("--input", required=True)
    v.add_argument("--no-edge-labels", action="store_true", dest="no_edge_labels")
    v.set_defaults(func=cmd_views)
    v = vsub.add_parser("paths")
    v.add_argument("--input", required=True)
    v.add_argument("--format", choices=("penman", "triples"), default="penman")
    v.add_argument("--src", default=None)
    v.add_argument("--dst", default=None)
    v.set_defaults(func=cmd_views)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full model")
    p.add_argument("--dims", type=int, default=4)
    p.add_argument("--eps", type=float, default=1e-5)
    p.set_defaults(func=cmd_gradcheck)

    return parser


_RUNTIME_ERRORS = (
    DataError,
    GraphError,
    AlignmentError,
    ConfigError,
    CheckpointError,
    TrainingError,
    NonFiniteError,
    ShapeError,
    ValueError,
    KeyError,
    OSError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
