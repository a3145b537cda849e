"""The two reconstruction views of an input graph, plus relation-path features.

View 1 grounds each graph edge onto sentence token positions as labeled
head->modifier arcs; view 2 is the bracketed depth-first linearization.
Relation-path features describe node pairs for the structure-aware encoder.
"""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .alignment import Alignment
from .graphs import GraphError, LabeledGraph, strip_sense

SELF_FEATURE = "SELF"
NOPATH_FEATURE = "NOPATH"
UNK_FEATURE = "UNK"
DOWN = "↓"  # edge traversed source -> target
UP = "↑"  # edge traversed target -> source
PLACEHOLDER_LABEL = "<rel>"
COMPOUND_LABEL = "compound"
FOREST_ROOT = "AND"


class TokenKind(Enum):
    NODE = "node-label"
    EDGE = "edge-label"
    OPEN = "open-bracket"
    CLOSE = "close-bracket"


@dataclass(frozen=True)
class GraphToken:
    kind: TokenKind
    text: str


OPEN_TOKEN = GraphToken(TokenKind.OPEN, "(")
CLOSE_TOKEN = GraphToken(TokenKind.CLOSE, ")")


def token_from_text(text: str) -> GraphToken:
    """Classify a whitespace token: brackets, ':'-prefixed edge labels, nodes."""
    if text == "(":
        return OPEN_TOKEN
    if text == ")":
        return CLOSE_TOKEN
    if text.startswith(":") and len(text) > 1:
        return GraphToken(TokenKind.EDGE, text)
    return GraphToken(TokenKind.NODE, text)


@dataclass(frozen=True)
class LinearizedGraph:
    """Bracketed token sequence produced by depth-first traversal."""

    tokens: tuple[GraphToken, ...]

    def __post_init__(self):
        depth = 0
        prev: GraphToken | None = None
        for tok in self.tokens:
            if prev is not None:
                if prev.kind is TokenKind.OPEN and tok.kind is not TokenKind.NODE:
                    raise GraphError("open bracket must be followed by a node label")
                if prev.kind is TokenKind.EDGE and tok.kind not in (TokenKind.OPEN, TokenKind.NODE):
                    raise GraphError(f"edge label {prev.text!r} must be followed by a node or '('")
            if tok.kind is TokenKind.OPEN:
                depth += 1
            elif tok.kind is TokenKind.CLOSE:
                depth -= 1
                if depth < 0:
                    raise GraphError("unbalanced brackets in linearization")
            prev = tok
        if depth != 0:
            raise GraphError("unbalanced brackets in linearization")
        if prev is not None and prev.kind is TokenKind.EDGE:
            raise GraphError(f"dangling edge label {prev.text!r}")

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(tok.text for tok in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


def _ordered_children(g: LabeledGraph, nid: str, rng: random.Random | None):
    children = list(g.out_edges(nid))
    if rng is not None:
        rng.shuffle(children)
    return children


def _emit_subtree(g, nid, toks, emitted, rng, edge_labels):
    emitted.add(nid)
    toks.append(OPEN_TOKEN)
    toks.append(GraphToken(TokenKind.NODE, strip_sense(g.label(nid))))
    for rel, tgt in _ordered_children(g, nid, rng):
        if edge_labels:
            toks.append(GraphToken(TokenKind.EDGE, rel))
        if tgt in emitted:
            # reentrancy: bare label mention, no expansion
            toks.append(GraphToken(TokenKind.NODE, strip_sense(g.label(tgt))))
        else:
            _emit_subtree(g, tgt, toks, emitted, rng, edge_labels)
    toks.append(CLOSE_TOKEN)


def linearize(
    g: LabeledGraph,
    *,
    order: str = "input",
    seed: int = 0,
    edge_labels: bool = True,
) -> LinearizedGraph:
    """Depth-first bracketed linearization from the root.

    Entering a node emits "(", its sense-stripped label, then each
    outgoing edge (label token optional) followed by the child expansion,
    then ")". A node already emitted is mentioned as its bare label.
    `order` is "input" (stored edge order) or "random" (seeded shuffle per
    node). Raises if some node is unreachable from the root.
    """
    if order not in ("input", "random"):
        raise ValueError(f"unknown child order {order!r}")
    rng = random.Random(seed) if order == "random" else None
    toks: list[GraphToken] = []
    emitted: set[str] = set()
    _emit_subtree(g, g.root, toks, emitted, rng, edge_labels)
    if len(emitted) != g.n_nodes:
        missing = next(lbl for nid, lbl in g.nodes if nid not in emitted)
        raise GraphError(
            f"node {missing!r} unreachable from root; pick a covering root or "
            "linearize per component"
        )
    return LinearizedGraph(tuple(toks))


def linearize_covering(
    g: LabeledGraph,
    *,
    order: str = "input",
    seed: int = 0,
    edge_labels: bool = True,
) -> LinearizedGraph:
    """Linearization that always covers the whole graph.

    Starts at the root, then repeatedly at the first node (in storage
    order) not yet emitted; mentions of already-emitted nodes stay bare.
    Multiple segments are wrapped under a synthetic "AND" root so the
    result is still one bracketed expression.
    """
    if order not in ("input", "random"):
        raise ValueError(f"unknown child order {order!r}")
    rng = random.Random(seed) if order == "random" else None
    emitted: set[str] = set()
    segments: list[list[GraphToken]] = []
    for nid in (g.root, *g.node_ids):
        if nid in emitted:
            continue
        toks: list[GraphToken] = []
        _emit_subtree(g, nid, toks, emitted, rng, edge_labels)
        segments.append(toks)
    if len(segments) == 1:
        return LinearizedGraph(tuple(segments[0]))
    wrapped = [OPEN_TOKEN, GraphToken(TokenKind.NODE, FOREST_ROOT)]
    for seg in segments:
        wrapped.extend(seg)
    wrapped.append(CLOSE_TOKEN)
    return LinearizedGraph(tuple(wrapped))


def reparse_linearized(tokens: Iterable[GraphToken] | LinearizedGraph) -> LabeledGraph:
    """Recover a graph from a labeled linearization.

    Bare mentions resolve to the already-emitted node with the same label
    (first emission wins). Accepts raw token sequences so that malformed
    input is reported here rather than at construction.
    """
    toks = list(tokens.tokens if isinstance(tokens, LinearizedGraph) else tokens)
    nodes: list[tuple[str, str]] = []
    edges: list[tuple[str, str, str]] = []
    by_label: dict[str, str] = {}
    pos = {"i": 0}

    def peek() -> GraphToken | None:
        return toks[pos["i"]] if pos["i"] < len(toks) else None

    def take() -> GraphToken | None:
        tok = peek()
        if tok is not None:
            pos["i"] += 1
        return tok

    def parse_node() -> str:
        take()  # '('
        tok = take()
        if tok is None or tok.kind is not TokenKind.NODE:
            raise GraphError("expected a node label after '('")
        nid = f"n{len(nodes)}"
        nodes.append((nid, tok.text))
        by_label.setdefault(tok.text, nid)
        while True:
            tok = peek()
            if tok is None:
                raise GraphError("unbalanced brackets: missing ')'")
            if tok.kind is TokenKind.CLOSE:
                take()
                return nid
            rel = ""
            if tok.kind is TokenKind.EDGE:
                take()
                rel = tok.text
                tok = peek()
                if tok is None or tok.kind in (TokenKind.CLOSE, TokenKind.EDGE):
                    raise GraphError(f"dangling edge label {rel!r}")
            if tok.kind is TokenKind.OPEN:
                edges.append(("", "", ""))
                slot = len(edges) - 1
                child = parse_node()
                edges[slot] = (nid, rel, child)
            else:  # bare node-label mention
                take()
                target = by_label.get(tok.text)
                if target is None:
                    raise GraphError(f"bare mention {tok.text!r} was never defined")
                edges.append((nid, rel, target))

    first = peek()
    if first is None or first.kind is not TokenKind.OPEN:
        raise GraphError("linearization must start with '('")
    root = parse_node()
    if pos["i"] != len(toks):
        raise GraphError("unbalanced brackets: content after the closing ')'")
    return LabeledGraph(tuple(nodes), tuple(edges), root)


@dataclass(frozen=True)
class RelationPathFeature:
    """Space-joined edge labels with direction symbols, as one feature token.

    vocab_index is -1 until the feature has been looked up in a vocabulary.
    """

    text: str
    vocab_index: int = -1


def _adjacency(g: LabeledGraph) -> dict[str, list[tuple[str, str, bool]]]:
    adj: dict[str, list[tuple[str, str, bool]]] = {nid: [] for nid in g.node_ids}
    for s, label, t in g.edges:
        adj[s].append((t, label, True))
        adj[t].append((s, label, False))
    return adj


def _bfs_hops(g: LabeledGraph, src: str, dst: str) -> list[tuple[str, bool]] | None:
    """Shortest undirected path as (edge label, traversed-forward) hops.

    Ties are broken by stored edge order via BFS discovery order.
    """
    adj = _adjacency(g)
    parent: dict[str, tuple[str, str, bool]] = {}
    seen = {src}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        if cur == dst:
            break
        for nxt, label, forward in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                parent[nxt] = (cur, label, forward)
                queue.append(nxt)
    if dst not in seen:
        return None
    hops: list[tuple[str, bool]] = []
    cur = dst
    while cur != src:
        prev, label, forward = parent[cur]
        hops.append((label, forward))
        cur = prev
    hops.reverse()
    return hops


def _hops_to_text(hops: list[tuple[str, bool]]) -> str:
    return " ".join(label + (DOWN if forward else UP) for label, forward in hops)


def flip_feature_text(text: str) -> str:
    """Reverse a path feature: reverse hop order and swap every arrow."""
    if text in (SELF_FEATURE, NOPATH_FEATURE, UNK_FEATURE):
        return text
    flipped = []
    for hop in reversed(text.split(" ")):
        label, arrow = hop[:-1], hop[-1]
        flipped.append(label + (UP if arrow == DOWN else DOWN))
    return " ".join(flipped)


def path_feature(
    g: LabeledGraph,
    src: str,
    dst: str,
    vocab: "FeatureVocabulary | None" = None,
) -> RelationPathFeature:
    """Feature text for the shortest undirected path from src to dst.

    Each hop contributes its edge label suffixed with a direction arrow
    (down when traversed source->target). src == dst gives "SELF"; a
    disconnected pair gives "NOPATH". So that the reversed pair is always
    the arrow-flipped mirror even when several shortest paths tie, the
    path is computed once per unordered pair (oriented by node storage
    order) and flipped for the other direction.
    """
    si, di = g.node_index(src), g.node_index(dst)
    if si == di:
        text = SELF_FEATURE
    else:
        a, b = (src, dst) if si < di else (dst, src)
        hops = _bfs_hops(g, a, b)
        if hops is None:
            text = NOPATH_FEATURE
        else:
            text = _hops_to_text(hops)
            if si > di:
                text = flip_feature_text(text)
    index = vocab.lookup(text) if vocab is not None else -1
    return RelationPathFeature(text, index)


def path_feature_texts(g: LabeledGraph) -> dict[tuple[int, int], str]:
    """Feature texts for all ordered node pairs, keyed by storage indices."""
    ids = g.node_ids
    out: dict[tuple[int, int], str] = {}
    for i in range(len(ids)):
        out[(i, i)] = SELF_FEATURE
        for j in range(i + 1, len(ids)):
            hops = _bfs_hops(g, ids[i], ids[j])
            text = NOPATH_FEATURE if hops is None else _hops_to_text(hops)
            out[(i, j)] = text
            out[(j, i)] = flip_feature_text(text)
    return out


@dataclass
class FeatureVocabulary:
    """Capped vocabulary of path-feature texts with a reserved UNK entry."""

    entries: dict[str, int]
    capacity: int
    unk_index: int

    def __post_init__(self):
        if len(self.entries) > self.capacity:
            raise ValueError("feature vocabulary exceeds its capacity")
        for reserved in (SELF_FEATURE, NOPATH_FEATURE, UNK_FEATURE):
            if reserved not in self.entries:
                raise ValueError(f"reserved feature {reserved!r} missing")

    def lookup(self, text: str) -> int:
        return self.entries.get(text, self.unk_index)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def texts(self) -> list[str]:
        return list(self.entries)


def build_feature_vocab(corpus: Iterable[LabeledGraph], capacity: int) -> FeatureVocabulary:
    """Count path features over all ordered node pairs; keep the most frequent.

    The three reserved features always occupy the first slots; remaining
    capacity goes to the most frequent texts, ties broken by first
    occurrence.
    """
    if capacity < 3:
        raise ValueError("capacity must be at least 3 (reserved features)")
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    tick = 0
    for g in corpus:
        n = g.n_nodes
        texts = path_feature_texts(g)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                text = texts[(i, j)]
                counts[text] += 1
                if text not in first_seen:
                    first_seen[text] = tick
                    tick += 1
    entries = {SELF_FEATURE: 0, NOPATH_FEATURE: 1, UNK_FEATURE: 2}
    ranked = sorted(
        (t for t in counts if t not in entries),
        key=lambda t: (-counts[t], first_seen[t]),
    )
    for text in ranked[: capacity - len(entries)]:
        entries[text] = len(entries)
    return FeatureVocabulary(entries, capacity, entries[UNK_FEATURE])


def feature_index_matrix(g: LabeledGraph, vocab: FeatureVocabulary) -> list[list[int]]:
    """N x N matrix of feature vocabulary indices over ordered node pairs."""
    n = g.n_nodes
    texts = path_feature_texts(g)
    return [[vocab.lookup(texts[(i, j)]) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class GroundedArcSet:
    """Labeled head->modifier arcs over sentence token positions."""

    arcs: tuple[tuple[int, str, int], ...]
    sentence_length: int
    skipped_edges: int = 0

    def __post_init__(self):
        deduped = tuple(sorted(set(self.arcs)))
        object.__setattr__(self, "arcs", deduped)
        for head, label, mod in deduped:
            if not (0 <= head < self.sentence_length and 0 <= mod < self.sentence_length):
                raise ValueError(f"arc ({head}, {label!r}, {mod}) outside sentence of length {self.sentence_length}")
            if head == mod:
                raise ValueError(f"arc with identical head and modifier {head}")

    def __len__(self) -> int:
        return len(self.arcs)


def ground_triples(
    g: LabeledGraph,
    alignment: Alignment,
    sentence_length: int,
    *,
    edge_labels: bool = True,
) -> GroundedArcSet:
    """Ground graph edges onto the sentence via node-to-token alignments.

    Each edge whose endpoints are both aligned becomes one arc between the
    first (minimum) aligned tokens; every aligned multi-token node also
    links its first token to each of its other tokens with "compound"
    arcs. Edges with an unaligned endpoint, or whose endpoints share the
    same first token, are skipped and counted. With edge_labels off every
    label is replaced by a single placeholder.
    """
    for nid, toks in alignment.entries.items():
        if max(toks) >= sentence_length:
            raise ValueError(f"alignment for node {nid!r} exceeds sentence length {sentence_length}")
    first = {nid: min(toks) for nid, toks in alignment.entries.items()}
    arcs: list[tuple[int, str, int]] = []
    skipped = 0
    for s, label, t in g.edges:
        if s not in first or t not in first or first[s] == first[t]:
            skipped += 1
            continue
        arcs.append((first[s], label if edge_labels else PLACEHOLDER_LABEL, first[t]))
    for nid, toks in alignment.entries.items():
        head = first[nid]
        for tok in toks:
            if tok != head:
                arcs.append((head, COMPOUND_LABEL if edge_labels else PLACEHOLDER_LABEL, tok))
    return GroundedArcSet(tuple(arcs), sentence_length, skipped)


def extract_spo(g: LabeledGraph) -> list[tuple[str, str, str]]:
    """Subject/predicate/object interactions from ":ARG0"/":ARG1" pairs.

    For every node with an outgoing :ARG0 to s and an outgoing :ARG1 to o,
    emit (label(s), label(p), label(o)) with sense suffixes stripped, one
    per (ARG0, ARG1) combination, in node storage order.
    """
    out: list[tuple[str, str, str]] = []
    for nid, label in g.nodes:
        subjects = [t for rel, t in g.out_edges(nid) if rel == ":ARG0"]
        objects = [t for rel, t in g.out_edges(nid) if rel == ":ARG1"]
        for s in subjects:
            for o in objects:
                out.append(
                    (
                        strip_sense(g.label(s)),
                        strip_sense(label),
                        strip_sense(g.label(o)),
                    )
                )
    return out
