"""Training loop, batching, and corpus-level evaluation helpers."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import tensor as T
from .data import AlignedExample, Corpus, Vocab
from .model import LossReport, Model, ModelConfig, arc_nll_terms
from .optim import OptimizerState, adam_step, constant_schedule, inverse_sqrt_schedule
from .tensor import NonFiniteError, Tensor
from .views import linearize_covering


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    steps: int = 1000
    token_budget: int = 4096
    lr: float = 1e-3
    schedule: str = "inverse_sqrt"
    warmup: int = 4000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    random_linearization: bool = False
    baseline_only: bool = False

    def __post_init__(self):
        if self.steps <= 0:
            raise ValueError("steps must be positive")
        if self.token_budget <= 0:
            raise ValueError("token budget must be positive")
        if self.schedule not in ("constant", "inverse_sqrt"):
            raise ValueError(f"unknown schedule {self.schedule!r}")


def make_batches(examples: Sequence[AlignedExample], token_budget: int, seed: int) -> list[list[int]]:
    """Shuffle by seed, then fill batches greedily by target length."""
    order = np.random.default_rng(seed).permutation(len(examples))
    batches: list[list[int]] = []
    current: list[int] = []
    used = 0
    for idx in order:
        idx = int(idx)
        length = len(examples[idx].sentence)
        if current and used + length > token_budget:
            batches.append(current)
            current, used = [], 0
        current.append(idx)
        used += length
    if current:
        batches.append(current)
    return batches


def _example_parts(
    model: Model,
    ex: AlignedExample,
    label_ids,
    rng: np.random.Generator | None,
    *,
    want_arcs: bool,
    want_graph: bool,
):
    """Per-example NLL sums and counts for each active loss."""
    encoded, _ = model.encode(ex.enc_ids, ex.features, rng=rng)
    states, logits = model.decode_sentence(encoded, ex.sent_ids, rng=rng)
    base = T.cross_entropy(logits, model.sentence_targets(ex.sent_ids), reduction="sum")
    base_count = len(ex.sent_ids) + 1
    arc_sum, arc_count = None, 0
    if want_arcs and len(ex.arcs) > 0 and states.shape[0] >= 2:
        use_labels = not model.cfg.no_edge_labels
        phi_arc, phi_label = model.biaffine_scores(states, rng=rng)
        arc_sum, arc_count = arc_nll_terms(phi_arc, phi_label, ex.arcs, label_ids, use_labels=use_labels)
    graph_sum, graph_count = None, 0
    if want_graph and len(ex.graph_ids) > 0:
        glogits = model.decode_graph(states, ex.graph_ids, rng=rng)
        graph_sum = T.cross_entropy(glogits, ex.graph_ids, reduction="sum")
        graph_count = len(ex.graph_ids)
    return base, base_count, arc_sum, arc_count, graph_sum, graph_count


def _reduce(parts: list[Tensor]) -> Tensor:
    total = parts[0]
    for p in parts[1:]:
        total = T.add(total, p)
    return total


def batch_losses(
    model: Model,
    batch: Sequence[AlignedExample],
    label_ids,
    rng: np.random.Generator | None,
    *,
    want_arcs: bool,
    want_graph: bool,
) -> tuple[Tensor, LossReport]:
    """Combined loss tensor for one batch plus the float report.

    Each loss is a per-token (or per-arc) mean over the whole batch.
    Heads whose coefficient is zero are skipped entirely, so their
    branches contribute neither values nor gradients.
    """
    cfg = model.cfg
    base_parts, arc_parts, graph_parts = [], [], []
    base_total = arc_total = graph_total = 0
    for ex in batch:
        try:
            base, bc, arc, ac, graph, gc = _example_parts(
                model, ex, label_ids, rng, want_arcs=want_arcs, want_graph=want_graph
            )
        except NonFiniteError as exc:
            raise TrainingError(f"non-finite loss on example {ex.ex_id!r}: {exc}") from exc
        base_parts.append(base)
        base_total += bc
        if arc is not None and ac:
            arc_parts.append(arc)
            arc_total += ac
        if graph is not None and gc:
            graph_parts.append(graph)
            graph_total += gc
    l_base = T.mul(_reduce(base_parts), 1.0 / base_total)
    l_auto1 = T.mul(_reduce(arc_parts), 1.0 / arc_total) if arc_parts else T.constant(0.0)
    l_auto2 = T.mul(_reduce(graph_parts), 1.0 / graph_total) if graph_parts else T.constant(0.0)
    alpha = 0.0 if not want_arcs else cfg.alpha
    beta = 0.0 if not want_graph else cfg.beta
    combined = l_base
    if want_arcs and arc_parts:
        combined = T.add(combined, T.mul(l_auto1, cfg.alpha))
    if want_graph and graph_parts:
        combined = T.add(combined, T.mul(l_auto2, cfg.beta))
    report = LossReport.compose(
        l_base.item(),
        l_auto1.item(),
        l_auto2.item(),
        alpha,
        beta,
        base_tokens=base_total,
        arc_count=arc_total,
        graph_tokens=graph_total,
    )
    return combined, report


def relinearize(ex: AlignedExample, graph_vocab: Vocab, *, edge_labels: bool, seed: int) -> None:
    """Refresh the cached linearization with a new random child order."""
    lin = linearize_covering(ex.graph, order="random", seed=seed, edge_labels=edge_labels)
    ex.linearized = lin
    ex.graph_ids = graph_vocab.ids(lin.texts)


def train(
    corpus: Corpus,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    *,
    model: Model | None = None,
    stop_check: Callable[[Model, list[LossReport]], bool] | None = None,
    stop_every: int = 0,
) -> tuple[Model, list[LossReport]]:
    """Run the multi-task training loop; deterministic given the seed.

    stop_check, if given, is consulted every stop_every steps and may end
    training early (used by the overfit harness).
    """
    if model is None:
        model = Model(model_cfg, seed=train_cfg.seed)
    params = model.parameters()
    state = OptimizerState.for_params(
        params,
        lr=train_cfg.lr,
        beta1=train_cfg.adam_beta1,
        beta2=train_cfg.adam_beta2,
        eps=train_cfg.adam_eps,
    )
    if train_cfg.schedule == "constant":
        schedule = constant_schedule(train_cfg.lr)
    else:
        schedule = inverse_sqrt_schedule(train_cfg.lr, train_cfg.warmup)
    want_arcs = not train_cfg.baseline_only and model_cfg.alpha > 0
    want_graph = not train_cfg.baseline_only and model_cfg.beta > 0
    rng = np.random.default_rng(train_cfg.seed + 1) if model_cfg.dropout > 0 else None
    label_ids = corpus.label_vocab.index
    reports: list[LossReport] = []
    step = 0
    epoch = 0
    while step < train_cfg.steps:
        if train_cfg.random_linearization:
            for idx, ex in enumerate(corpus.examples):
                relinearize(
                    ex,
                    corpus.graph_vocab,
                    edge_labels=not model_cfg.no_edge_labels,
                    seed=(train_cfg.seed + 7919 * epoch) * 65537 + idx,
                )
        for batch_ids in make_batches(corpus.examples, train_cfg.token_budget, train_cfg.seed + epoch):
            step += 1
            model.zero_grad()
            batch = [corpus.examples[i] for i in batch_ids]
            combined, report = batch_losses(model, batch, label_ids, rng, want_arcs=want_arcs, want_graph=want_graph)
            combined.backward()
            adam_step(params, state, lr=schedule(step))
            reports.append(report)
            if stop_check is not None and stop_every and step % stop_every == 0 and stop_check(model, reports):
                return model, reports
            if step >= train_cfg.steps:
                break
        epoch += 1
    return model, reports


def save_loss_log(path: str | Path, reports: Sequence[LossReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "l_base", "l_auto1", "l_auto2", "l_final"])
        for step, r in enumerate(reports, start=1):
            writer.writerow([step, repr(r.l_base), repr(r.l_auto1), repr(r.l_auto2), repr(r.l_final)])


# -- corpus evaluation helpers ---------------------------------------------


def corpus_base_loss(model: Model, examples: Sequence[AlignedExample]) -> float:
    """Teacher-forced per-token sentence NLL over a corpus."""
    total, count = 0.0, 0
    with T.no_grad():
        for ex in examples:
            encoded, _ = model.encode(ex.enc_ids, ex.features)
            _, logits = model.decode_sentence(encoded, ex.sent_ids)
            nll = T.cross_entropy(logits, model.sentence_targets(ex.sent_ids), reduction="sum")
            total += nll.item()
            count += len(ex.sent_ids) + 1
    return total / count


def arc_accuracy(model: Model, examples: Sequence[AlignedExample], label_ids) -> float:
    """Labeled argmax accuracy over all grounded arcs."""
    correct, total = 0, 0
    use_labels = not model.cfg.no_edge_labels
    with T.no_grad():
        for ex in examples:
            if len(ex.arcs) == 0 or len(ex.sent_ids) < 2:
                continue
            encoded, _ = model.encode(ex.enc_ids, ex.features)
            states, _ = model.decode_sentence(encoded, ex.sent_ids)
            phi_arc, phi_label = model.biaffine_scores(states)
            for head, label, mod in ex.arcs.arcs:
                total += 1
                if int(np.argmax(phi_arc.data[mod])) != head:
                    continue
                if use_labels and int(np.argmax(phi_label.data[mod, head])) != label_ids[label]:
                    continue
                correct += 1
    return correct / total if total else 1.0


def graph_token_accuracy(model: Model, examples: Sequence[AlignedExample]) -> float:
    """Teacher-forced argmax accuracy of the graph decoder."""
    correct, total = 0, 0
    with T.no_grad():
        for ex in examples:
            if len(ex.graph_ids) == 0:
                continue
            encoded, _ = model.encode(ex.enc_ids, ex.features)
            states, _ = model.decode_sentence(encoded, ex.sent_ids)
            logits = model.decode_graph(states, ex.graph_ids)
            pred = np.argmax(logits.data, axis=-1)
            correct += int((pred == ex.graph_ids).sum())
            total += len(ex.graph_ids)
    return correct / total if total else 1.0


def generate_tokens(
    model: Model,
    ex: AlignedExample,
    sentence_vocab: Vocab,
    *,
    beam: int = 1,
    max_len: int = 64,
) -> tuple[list[str], bool]:
    result = model.generate(ex.enc_ids, ex.features, beam=beam, max_len=max_len)
    return [sentence_vocab.tokens[i] for i in result.tokens], result.truncated


def full_model_grad_check(
    d_h: int = 4,
    heads: int = 2,
    layers: int = 1,
    eps: float = 1e-5,
    seed: int = 3,
) -> float:
    """Finite-difference check of the whole model with all losses active.

    Uses a 3-node graph with a 4-token sentence, 64-bit values, and odd
    nonzero loss coefficients so every parameter receives gradient.
    Returns the max relative error over all parameter coordinates.
    """
    from .data import PreprocessConfig, preprocess
    from .optim import grad_check

    records = [
        {
            "id": "toy",
            "graph": "(v / want-01 :ARG0 (a / boy) :ARG1 (o / lunch))",
            "sentence": ["the", "boy", "wants", "lunch"],
            "alignments": {"a": [1], "v": [2], "o": [3]},
        }
    ]
    corpus = preprocess(records, PreprocessConfig(task="amr", features_cap=32, min_count=1))
    cfg = ModelConfig(
        sentence_vocab=len(corpus.sentence_vocab),
        graph_vocab=len(corpus.graph_vocab),
        label_vocab=len(corpus.label_vocab),
        feature_vocab=len(corpus.feature_vocab),
        d_h=d_h,
        heads=heads,
        layers=layers,
        d_ff=2 * d_h,
        arc_mlp=d_h,
        label_mlp=d_h,
        dropout=0.0,
        alpha=0.37,
        beta=0.59,
        dtype="float64",
    )
    model = Model(cfg, seed=seed)
    label_ids = corpus.label_vocab.index

    def loss() -> Tensor:
        combined, _ = batch_losses(model, corpus.examples, label_ids, None, want_arcs=True, want_graph=True)
        return combined

    return grad_check(loss, model.parameters(), eps=eps)
