"""Structure-aware transformer with two detachable reconstruction heads.

The encoder attends over graph nodes with per-pair relation-path vectors
mixed into both the attention logits and the value sums. A standard
decoder generates the sentence; a biaffine scorer over its states
reconstructs grounded arcs, and a second decoder regenerates the
linearized graph. Both heads exist only for the training losses and never
run at inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import tensor as T
from .tensor import Parameter, Tensor
from .views import GroundedArcSet

SENT_UNK, SENT_BOS, SENT_EOS = 0, 1, 2
GRAPH_UNK, GRAPH_BOS = 0, 1

# Parameters under these prefixes may be deleted from a checkpoint without
# changing generation output.
RECONSTRUCTION_PREFIXES = ("biaffine.", "gdec.")


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    sentence_vocab: int
    graph_vocab: int
    label_vocab: int
    feature_vocab: int
    d_h: int = 64
    heads: int = 4
    layers: int = 2
    d_ff: int = 128
    arc_mlp: int = 64
    label_mlp: int = 32
    dropout: float = 0.1
    alpha: float = 0.05
    beta: float = 0.15
    encoder_positions: bool = False
    no_edge_labels: bool = False
    dtype: str = "float64"

    def __post_init__(self):
        if self.d_h % self.heads != 0:
            raise ConfigError(f"d_h={self.d_h} not divisible by heads={self.heads}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("loss coefficients must be non-negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"unsupported dtype {self.dtype!r}")
        for field_name in ("sentence_vocab", "graph_vocab", "label_vocab", "feature_vocab"):
            if getattr(self, field_name) < 1:
                raise ConfigError(f"{field_name} must be positive")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64

    @property
    def d_head(self) -> int:
        return self.d_h // self.heads


@dataclass
class EncoderLayerTrace:
    logits: np.ndarray  # (heads, N, N) pre-softmax
    weights: np.ndarray  # (heads, N, N) attention rows
    states: np.ndarray  # (N, d_h) layer output
    gamma: np.ndarray  # (N, N, d_h) relation vectors used


@dataclass
class DecoderTrace:
    """Sentence-decoder record: one state row per target word."""

    states: np.ndarray
    tokens: tuple[int, ...]

    def __post_init__(self):
        if self.states.shape[0] != len(self.tokens):
            raise ValueError(f"{self.states.shape[0]} state rows for {len(self.tokens)} tokens")


@dataclass
class GraphDecoderTrace:
    """Graph-decoder record: one state row per linearized-graph token."""

    states: np.ndarray
    tokens: tuple[int, ...]

    def __post_init__(self):
        if self.states.shape[0] != len(self.tokens):
            raise ValueError(f"{self.states.shape[0]} state rows for {len(self.tokens)} tokens")


@dataclass(frozen=True)
class LossReport:
    l_base: float
    l_auto1: float
    l_auto2: float
    l_final: float
    base_tokens: int = 0
    arc_count: int = 0
    graph_tokens: int = 0

    @classmethod
    def compose(
        cls,
        l_base: float,
        l_auto1: float,
        l_auto2: float,
        alpha: float,
        beta: float,
        base_tokens: int = 0,
        arc_count: int = 0,
        graph_tokens: int = 0,
    ) -> "LossReport":
        l_final = l_base + alpha * l_auto1 + beta * l_auto2
        return cls(l_base, l_auto1, l_auto2, l_final, base_tokens, arc_count, graph_tokens)


@dataclass(frozen=True)
class GenerationResult:
    tokens: tuple[int, ...]
    truncated: bool


class Model:
    """Parameter container plus the forward passes for all components."""

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        self.cfg = cfg
        self.params: dict[str, Parameter] = {}
        self._build(np.random.default_rng(seed))

    # -- construction -------------------------------------------------

    def _add(self, name: str, values: np.ndarray) -> Parameter:
        p = Parameter(name, values.astype(self.cfg.np_dtype))
        self.params[name] = p
        return p

    def _xavier(self, rng, shape: tuple[int, ...]) -> np.ndarray:
        fan_in = shape[0]
        fan_out = int(np.prod(shape[1:]))
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, shape)

    def _embed(self, rng, rows: int, dim: int) -> np.ndarray:
        return rng.normal(0.0, dim**-0.5, (rows, dim))

    def _add_attention(self, rng, prefix: str, relational: bool) -> None:
        d = self.cfg.d_h
        for nm in ("wq", "wk", "wv"):
            self._add(prefix + nm, self._xavier(rng, (d, d)))
            self._add(prefix + "b" + nm[1], np.zeros(d))
        if relational:
            self._add(prefix + "wr1", self._xavier(rng, (d, d)))
            self._add(prefix + "wr2", self._xavier(rng, (d, d)))
        else:
            self._add(prefix + "wo", self._xavier(rng, (d, d)))
            self._add(prefix + "bo", np.zeros(d))

    def _add_ln(self, prefix: str) -> None:
        self._add(prefix + "g", np.ones(self.cfg.d_h))
        self._add(prefix + "b", np.zeros(self.cfg.d_h))

    def _add_ff(self, rng, prefix: str) -> None:
        d, dff = self.cfg.d_h, self.cfg.d_ff
        self._add(prefix + "w1", self._xavier(rng, (d, dff)))
        self._add(prefix + "b1", np.zeros(dff))
        self._add(prefix + "w2", self._xavier(rng, (dff, d)))
        self._add(prefix + "b2", np.zeros(d))

    def _add_mlp2(self, rng, prefix: str, out_dim: int) -> None:
        d = self.cfg.d_h
        self._add(prefix + "w1", self._xavier(rng, (d, out_dim)))
        self._add(prefix + "b1", np.zeros(out_dim))
        self._add(prefix + "w2", self._xavier(rng, (out_dim, out_dim)))
        self._add(prefix + "b2", np.zeros(out_dim))

    def _build(self, rng) -> None:
        cfg = self.cfg
        d = cfg.d_h
        self._add("encoder.embed", self._embed(rng, cfg.graph_vocab, d))
        self._add("encoder.rel_embed", self._embed(rng, cfg.feature_vocab, d))
        for layer in range(cfg.layers):
            p = f"encoder.l{layer}."
            self._add_attention(rng, p + "attn.", relational=True)
            self._add_ln(p + "ln1.")
            self._add_ff(rng, p + "ff.")
            self._add_ln(p + "ln2.")
        self._add("sdec.embed", self._embed(rng, cfg.sentence_vocab, d))
        for layer in range(cfg.layers):
            p = f"sdec.l{layer}."
            self._add_attention(rng, p + "self.", relational=False)
            self._add_ln(p + "ln1.")
            self._add_attention(rng, p + "cross.", relational=False)
            self._add_ln(p + "ln2.")
            self._add_ff(rng, p + "ff.")
            self._add_ln(p + "ln3.")
        self._add("sdec.out.w", self._xavier(rng, (d, cfg.sentence_vocab)))
        self._add("sdec.out.b", np.zeros(cfg.sentence_vocab))
        self._add_mlp2(rng, "biaffine.arc_head.", cfg.arc_mlp)
        self._add_mlp2(rng, "biaffine.arc_mod.", cfg.arc_mlp)
        self._add_mlp2(rng, "biaffine.label_head.", cfg.label_mlp)
        self._add_mlp2(rng, "biaffine.label_mod.", cfg.label_mlp)
        self._add("biaffine.u_arc", self._xavier(rng, (cfg.arc_mlp, cfg.arc_mlp)))
        self._add("biaffine.v_arc", self._xavier(rng, (cfg.arc_mlp, 1)))
        self._add("biaffine.u_label", self._xavier(rng, (cfg.label_mlp, cfg.label_vocab, cfg.label_mlp)))
        self._add("biaffine.v_label", self._xavier(rng, (2 * cfg.label_mlp, cfg.label_vocab)))
        self._add("biaffine.b_label", np.zeros(cfg.label_vocab))
        self._add("gdec.embed", self._embed(rng, cfg.graph_vocab, d))
        for layer in range(cfg.layers):
            p = f"gdec.l{layer}."
            self._add_attention(rng, p + "self.", relational=False)
            self._add_ln(p + "ln1.")
            self._add_attention(rng, p + "cross.", relational=False)
            self._add_ln(p + "ln2.")
            self._add_ff(rng, p + "ff.")
            self._add_ln(p + "ln3.")
        self._add("gdec.out.w", self._xavier(rng, (d, cfg.graph_vocab)))
        self._add("gdec.out.b", np.zeros(cfg.graph_vocab))

    # -- shared pieces -------------------------------------------------

    def _t(self, name: str) -> Tensor:
        return self.params[name].tensor

    def _split_heads(self, x: Tensor, length: int) -> Tensor:
        cfg = self.cfg
        return T.transpose(T.reshape(x, (length, cfg.heads, cfg.d_head)), (1, 0, 2))

    def _merge_heads(self, x: Tensor, length: int) -> Tensor:
        cfg = self.cfg
        return T.reshape(T.transpose(x, (1, 0, 2)), (length, cfg.d_h))

    def _positions(self, length: int) -> Tensor:
        table = T.sinusoid_positions(length, self.cfg.d_h, dtype=self.cfg.np_dtype)
        return T.constant(table, dtype=self.cfg.np_dtype)

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def trainable_parameters(self, include_heads: bool = True) -> list[Parameter]:
        if include_heads:
            return self.parameters()
        return [p for p in self.parameters() if not p.name.startswith(RECONSTRUCTION_PREFIXES)]

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    # -- encoder --------------------------------------------------------

    def encode(
        self,
        token_ids: Sequence[int],
        feature_ids,
        *,
        rng: np.random.Generator | None = None,
        collect_trace: bool = False,
    ) -> tuple[Tensor, list[EncoderLayerTrace]]:
        """Relation-aware encoding of the graph-node token sequence.

        feature_ids must be a full (N, N) matrix of path-feature indices
        over ordered token pairs, SELF on the diagonal.
        """
        cfg = self.cfg
        n = len(token_ids)
        feats = np.asarray(feature_ids, dtype=np.int64)
        if feats.shape != (n, n):
            raise T.ShapeError(f"feature matrix shape {feats.shape} does not match {n} tokens")
        x = T.embedding(self._t("encoder.embed"), np.asarray(token_ids, dtype=np.int64))
        if cfg.encoder_positions:
            x = T.add(T.mul(x, math.sqrt(cfg.d_h)), self._positions(n))
        x = T.dropout(x, cfg.dropout, rng)
        gamma = T.embedding(self._t("encoder.rel_embed"), feats)  # (N, N, d_h)
        traces: list[EncoderLayerTrace] = []
        scale = 1.0 / math.sqrt(cfg.d_head)
        for layer in range(cfg.layers):
            p = f"encoder.l{layer}.attn."
            q = self._split_heads(T.affine(x, self._t(p + "wq"), self._t(p + "bq")), n)
            k = self._split_heads(T.affine(x, self._t(p + "wk"), self._t(p + "bk")), n)
            v = self._split_heads(T.affine(x, self._t(p + "wv"), self._t(p + "bv")), n)
            g2 = T.transpose(T.reshape(T.matmul(gamma, self._t(p + "wr2")), (n, n, cfg.heads, cfg.d_head)), (2, 0, 1, 3))
            g1 = T.transpose(T.reshape(T.matmul(gamma, self._t(p + "wr1")), (n, n, cfg.heads, cfg.d_head)), (2, 0, 1, 3))
            logits = T.mul(T.rel_scores(q, k, g2), scale)
            weights = T.softmax(logits)
            mixed = T.rel_context(T.dropout(weights, cfg.dropout, rng), v, g1)
            ctx = self._merge_heads(mixed, n)
            ln1 = f"encoder.l{layer}.ln1."
            x = T.layer_norm(T.add(x, T.dropout(ctx, cfg.dropout, rng)), self._t(ln1 + "g"), self._t(ln1 + "b"))
            ffp = f"encoder.l{layer}.ff."
            ff = T.affine(T.relu(T.affine(x, self._t(ffp + "w1"), self._t(ffp + "b1"))), self._t(ffp + "w2"), self._t(ffp + "b2"))
            ln2 = f"encoder.l{layer}.ln2."
            x = T.layer_norm(T.add(x, T.dropout(ff, cfg.dropout, rng)), self._t(ln2 + "g"), self._t(ln2 + "b"))
            if collect_trace:
                traces.append(EncoderLayerTrace(logits.data.copy(), weights.data.copy(), x.data.copy(), gamma.data.copy()))
        return x, traces

    # -- decoders --------------------------------------------------------

    def _plain_attention(
        self,
        prefix: str,
        x: Tensor,
        memory: Tensor,
        mask: np.ndarray | None,
        rng: np.random.Generator | None,
    ) -> Tensor:
        cfg = self.cfg
        q_len, m_len = x.shape[0], memory.shape[0]
        q = self._split_heads(T.affine(x, self._t(prefix + "wq"), self._t(prefix + "bq")), q_len)
        k = self._split_heads(T.affine(memory, self._t(prefix + "wk"), self._t(prefix + "bk")), m_len)
        v = self._split_heads(T.affine(memory, self._t(prefix + "wv"), self._t(prefix + "bv")), m_len)
        logits = T.scaled_dot(q, k, 1.0 / math.sqrt(cfg.d_head))
        if mask is not None:
            logits = T.add(logits, T.constant(mask[None, :, :], dtype=cfg.np_dtype))
        weights = T.dropout(T.softmax(logits), cfg.dropout, rng)
        ctx = self._merge_heads(T.matmul(weights, v), q_len)
        return T.affine(ctx, self._t(prefix + "wo"), self._t(prefix + "bo"))

    def _decoder_stack(
        self,
        component: str,
        input_ids: Sequence[int],
        memory: Tensor,
        rng: np.random.Generator | None,
    ) -> Tensor:
        cfg = self.cfg
        length = len(input_ids)
        emb = T.embedding(self._t(component + ".embed"), np.asarray(input_ids, dtype=np.int64))
        x = T.add(T.mul(emb, math.sqrt(cfg.d_h)), self._positions(length))
        x = T.dropout(x, cfg.dropout, rng)
        mask = T.causal_mask(length, dtype=cfg.np_dtype)
        for layer in range(cfg.layers):
            p = f"{component}.l{layer}."
            attn = self._plain_attention(p + "self.", x, x, mask, rng)
            x = T.layer_norm(T.add(x, T.dropout(attn, cfg.dropout, rng)), self._t(p + "ln1.g"), self._t(p + "ln1.b"))
            cross = self._plain_attention(p + "cross.", x, memory, None, rng)
            x = T.layer_norm(T.add(x, T.dropout(cross, cfg.dropout, rng)), self._t(p + "ln2.g"), self._t(p + "ln2.b"))
            ff = T.affine(T.relu(T.affine(x, self._t(p + "ff.w1"), self._t(p + "ff.b1"))), self._t(p + "ff.w2"), self._t(p + "ff.b2"))
            x = T.layer_norm(T.add(x, T.dropout(ff, cfg.dropout, rng)), self._t(p + "ln3.g"), self._t(p + "ln3.b"))
        return x

    def decode_sentence(
        self,
        encoder_states: Tensor,
        target_ids: Sequence[int],
        *,
        rng: np.random.Generator | None = None,
    ) -> tuple[Tensor, Tensor]:
        """Teacher-forced sentence decoding.

        Returns (S, logits): S has one state per target word (the state
        that predicts it); logits has one extra row for the end symbol.
        `DecoderTrace(S.data, tuple(target_ids))` records the pair.
        """
        if len(target_ids) == 0:
            raise ValueError("empty target in training mode")
        input_ids = [SENT_BOS, *target_ids]
        states = self._decoder_stack("sdec", input_ids, encoder_states, rng)
        logits = T.affine(states, self._t("sdec.out.w"), self._t("sdec.out.b"))
        s = T.narrow(states, 0, 0, len(target_ids))
        return s, logits

    def sentence_targets(self, target_ids: Sequence[int]) -> np.ndarray:
        return np.asarray([*target_ids, SENT_EOS], dtype=np.int64)

    def decode_graph(
        self,
        sentence_states: Tensor,
        graph_ids: Sequence[int],
        *,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Teacher-forced linearized-graph decoding; logits per position."""
        if len(graph_ids) == 0:
            raise ValueError("empty linearization")
        input_ids = [GRAPH_BOS, *graph_ids[:-1]]
        states = self._decoder_stack("gdec", input_ids, sentence_states, rng)
        return T.affine(states, self._t("gdec.out.w"), self._t("gdec.out.b"))

    # -- biaffine head ----------------------------------------------------

    def _mlp2(self, prefix: str, x: Tensor, rng: np.random.Generator | None) -> Tensor:
        h = T.relu(T.affine(x, self._t(prefix + "w1"), self._t(prefix + "b1")))
        h = T.dropout(h, self.cfg.dropout, rng)
        return T.relu(T.affine(h, self._t(prefix + "w2"), self._t(prefix + "b2")))

    def biaffine_scores(
        self,
        sentence_states: Tensor,
        *,
        rng: np.random.Generator | None = None,
    ) -> tuple[Tensor, Tensor]:
        """Arc and label scores over decoder states.

        phi_arc[i, j] scores head j for modifier i; phi_label[i, j, l]
        scores label l for the (modifier i, head j) pair.
        """
        n = sentence_states.shape[0]
        if n < 2:
            raise ValueError("biaffine scoring needs at least 2 positions")
        cfg = self.cfg
        r_ah = self._mlp2("biaffine.arc_head.", sentence_states, rng)
        r_am = self._mlp2("biaffine.arc_mod.", sentence_states, rng)
        r_lh = self._mlp2("biaffine.label_head.", sentence_states, rng)
        r_lm = self._mlp2("biaffine.label_mod.", sentence_states, rng)
        # phi_arc[i, j] = r_am[i]^T U_a r_ah[j] + r_ah[j] . v_a
        bilinear = T.matmul(T.matmul(r_am, self._t("biaffine.u_arc")), T.transpose_last(r_ah))
        head_bias = T.reshape(T.matmul(r_ah, self._t("biaffine.v_arc")), (1, n))
        phi_arc = T.add(bilinear, head_bias)
        u_label = self._t("biaffine.u_label")
        flat = T.reshape(u_label, (cfg.label_mlp, cfg.label_vocab * cfg.label_mlp))
        mixed = T.reshape(T.matmul(r_lh, flat), (n, cfg.label_vocab, cfg.label_mlp))
        pair = T.transpose(T.matmul(mixed, T.transpose_last(r_lm)), (2, 0, 1))  # (mod, head, label)
        v_label = self._t("biaffine.v_label")
        head_lin = T.reshape(T.matmul(r_lh, T.narrow(v_label, 0, 0, cfg.label_mlp)), (1, n, cfg.label_vocab))
        mod_lin = T.reshape(T.matmul(r_lm, T.narrow(v_label, 0, cfg.label_mlp, cfg.label_mlp)), (n, 1, cfg.label_vocab))
        phi_label = T.add(T.add(T.add(pair, head_lin), mod_lin), self._t("biaffine.b_label"))
        return phi_arc, phi_label

    # -- checkpoint plumbing -----------------------------------------------

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.params.items()}

    def load_state(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Assign stored values; reconstruction-head entries may be absent."""
        unknown = set(arrays) - set(self.params)
        if unknown:
            raise KeyError(f"checkpoint contains unknown parameters: {sorted(unknown)[:3]}...")
        for name, p in self.params.items():
            if name in arrays:
                p.assign(np.asarray(arrays[name], dtype=self.cfg.np_dtype))
            elif not name.startswith(RECONSTRUCTION_PREFIXES):
                raise KeyError(f"checkpoint is missing parameter {name!r}")

    # -- generation ---------------------------------------------------------

    def _step_logits(self, encoder_states: Tensor, prefix_ids: list[int]) -> np.ndarray:
        input_ids = [SENT_BOS, *prefix_ids]
        states = self._decoder_stack("sdec", input_ids, encoder_states, None)
        last = T.narrow(states, 0, len(input_ids) - 1, 1)
        logits = T.affine(last, self._t("sdec.out.w"), self._t("sdec.out.b"))
        return logits.data[0]

    def generate(
        self,
        token_ids: Sequence[int],
        feature_ids,
        *,
        beam: int = 1,
        max_len: int = 64,
    ) -> GenerationResult:
        """Autoregressive sentence generation (greedy, or beam when > 1).

        Beam hypotheses are ranked by mean log-probability. Neither
        reconstruction head participates.
        """
        with T.no_grad():
            memory, _ = self.encode(token_ids, feature_ids)
            if beam <= 1:
                return self._greedy(memory, max_len)
            return self._beam(memory, beam, max_len)

    def _greedy(self, memory: Tensor, max_len: int) -> GenerationResult:
        out: list[int] = []
        for _ in range(max_len):
            logits = self._step_logits(memory, out)
            nxt = int(np.argmax(logits))
            if nxt == SENT_EOS:
                return GenerationResult(tuple(out), False)
            out.append(nxt)
        return GenerationResult(tuple(out), True)

    def _beam(self, memory: Tensor, width: int, max_len: int) -> GenerationResult:
        # (ids, summed logp, emitted count, finished)
        beams: list[tuple[tuple[int, ...], float, int, bool]] = [((), 0.0, 0, False)]
        for _ in range(max_len):
            if all(b[3] for b in beams):
                break
            candidates: list[tuple[tuple[int, ...], float, int, bool]] = []
            for ids, logp, count, finished in beams:
                if finished:
                    candidates.append((ids, logp, count, True))
                    continue
                row = self._step_logits(memory, list(ids))
                logprobs = row - (np.log(np.sum(np.exp(row - row.max()))) + row.max())
                top = np.argsort(-logprobs)[:width]
                for tok in top:
                    tok = int(tok)
                    if tok == SENT_EOS:
                        candidates.append((ids, logp + float(logprobs[tok]), count + 1, True))
                    else:
                        candidates.append((ids + (tok,), logp + float(logprobs[tok]), count + 1, False))
            candidates.sort(key=lambda c: -(c[1] / max(1, c[2])))
            beams = candidates[:width]
        best = max(beams, key=lambda c: c[1] / max(1, c[2]))
        return GenerationResult(best[0], not best[3])


# -- losses -------------------------------------------------------------


def loss_base(logits: Tensor, targets) -> Tensor:
    """Mean negative log-likelihood of the target tokens."""
    return T.cross_entropy(logits, targets, reduction="mean")


def arc_nll_terms(
    phi_arc: Tensor,
    phi_label: Tensor | None,
    arcs: GroundedArcSet,
    label_ids: Mapping[str, int],
    *,
    use_labels: bool = True,
) -> tuple[Tensor, int]:
    """Summed -log p(head, label | modifier) over all grounded arcs.

    p factorizes into softmax(phi_label[i, j]) * softmax(phi_arc[i]); the
    no-edge-label ablation keeps only the arc factor.
    """
    if len(arcs) == 0:
        return T.constant(0.0), 0
    heads = np.asarray([a[0] for a in arcs.arcs], dtype=np.int64)
    mods = np.asarray([a[2] for a in arcs.arcs], dtype=np.int64)
    log_arc = T.log_softmax(phi_arc)
    terms = T.gather_nd(log_arc, (mods, heads))
    if use_labels:
        if phi_label is None:
            raise ValueError("label scores required when edge labels are in use")
        try:
            labels = np.asarray([label_ids[a[1]] for a in arcs.arcs], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"unknown arc label {exc.args[0]!r}") from None
        log_label = T.log_softmax(phi_label)
        terms = T.add(terms, T.gather_nd(log_label, (mods, heads, labels)))
    return T.mul(T.tsum(terms), -1.0), len(arcs)


def loss_auto1(
    phi_arc: Tensor,
    phi_label: Tensor | None,
    arcs: GroundedArcSet,
    label_ids: Mapping[str, int],
    *,
    use_labels: bool = True,
) -> Tensor:
    """Mean arc reconstruction loss; zero for an empty arc set."""
    total, count = arc_nll_terms(phi_arc, phi_label, arcs, label_ids, use_labels=use_labels)
    if count == 0:
        return total
    return T.mul(total, 1.0 / count)


def loss_auto2(logits: Tensor, graph_ids) -> Tensor:
    """Mean negative log-likelihood of the linearized-graph tokens."""
    return T.cross_entropy(logits, graph_ids, reduction="mean")


def loss_final(l_base: Tensor, l_auto1: Tensor, l_auto2: Tensor, alpha: float, beta: float) -> Tensor:
    if alpha < 0 or beta < 0:
        raise ConfigError("loss coefficients must be non-negative")
    return T.add(T.add(l_base, T.mul(l_auto1, float(alpha))), T.mul(l_auto2, float(beta)))
