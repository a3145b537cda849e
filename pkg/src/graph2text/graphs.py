"""Labeled-graph data model with PENMAN and triple-set parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator


class GraphError(ValueError):
    """Structurally invalid graph or unparseable graph text."""


class PenmanError(GraphError):
    """PENMAN syntax error; carries the character offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at character {offset})")
        self.offset = offset


@dataclass(frozen=True)
class LabeledGraph:
    """Directed graph with labeled nodes and edges and a designated root.

    Nodes are (id, label) pairs; ids are opaque and unique. The stored node
    and edge order is meaningful: traversal, linearization and path
    tie-breaking all follow it. Instances are immutable and safe to share.
    """

    nodes: tuple[tuple[str, str], ...]
    edges: tuple[tuple[str, str, str], ...]
    root: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple((str(i), str(l)) for i, l in self.nodes))
        object.__setattr__(self, "edges", tuple((str(s), str(l), str(t)) for s, l, t in self.edges))
        if not self.nodes:
            raise GraphError("graph must have at least one node")
        seen: set[str] = set()
        for nid, _ in self.nodes:
            if nid in seen:
                raise GraphError(f"duplicate node id {nid!r}")
            seen.add(nid)
        for s, label, t in self.edges:
            if s not in seen or t not in seen:
                raise GraphError(f"edge ({s!r}, {label!r}, {t!r}) references an unknown node")
            if s == t:
                raise GraphError(f"self-loop on node {s!r} rejected")
        if self.root not in seen:
            raise GraphError(f"root {self.root!r} is not a node")

    @cached_property
    def _labels(self) -> dict[str, str]:
        return dict(self.nodes)

    @cached_property
    def _indices(self) -> dict[str, int]:
        return {nid: k for k, (nid, _) in enumerate(self.nodes)}

    @cached_property
    def _out(self) -> dict[str, tuple[tuple[str, str], ...]]:
        out: dict[str, list[tuple[str, str]]] = {nid: [] for nid, _ in self.nodes}
        for s, label, t in self.edges:
            out[s].append((label, t))
        return {nid: tuple(v) for nid, v in out.items()}

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(nid for nid, _ in self.nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def label(self, node_id: str) -> str:
        try:
            return self._labels[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    def node_index(self, node_id: str) -> int:
        try:
            return self._indices[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    def out_edges(self, node_id: str) -> tuple[tuple[str, str], ...]:
        """Outgoing (edge label, target id) pairs in stored order."""
        try:
            return self._out[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None


_PENMAN_TOKEN = re.compile(
    r"""(?P<open>\()
      | (?P<close>\))
      | (?P<slash>/)
      | (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<relation>:[^\s()/]+)
      | (?P<atom>[^\s():/"]+)
    """,
    re.VERBOSE,
)


def _penman_tokens(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos, n = 0, len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _PENMAN_TOKEN.match(text, pos)
        if m is None:
            raise PenmanError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.lastgroup or "", m.group(), m.start()))
        pos = m.end()
    return tokens


def _unquote(text: str) -> str:
    return text[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def parse_penman(text: str) -> LabeledGraph:
    """Parse a single PENMAN expression into a LabeledGraph.

    Every variable becomes one node labeled with its concept; every
    constant occurrence (quoted string, number, bare symbol) becomes its
    own node labeled with the constant text. Re-mentions of a variable
    create edges to the existing node. The root is the outermost variable.
    """
    tokens = _penman_tokens(text)
    if not tokens:
        raise PenmanError("empty input", 0)
    if tokens[0][0] != "open":
        raise PenmanError("expected '('", tokens[0][2])
    # Variables are whatever the text defines via "( var /"; mentions of
    # anything else are constants. Collected up front so that forward
    # references resolve.
    variables = {
        tokens[k + 1][1]
        for k in range(len(tokens) - 2)
        if tokens[k][0] == "open" and tokens[k + 1][0] == "atom" and tokens[k + 2][0] == "slash"
    }
    nodes: list[tuple[str, str]] = []
    edges: list[tuple[str, str, str] | None] = []
    defined: set[str] = set()
    state = {"i": 0, "consts": 0}

    def peek():
        return tokens[state["i"]] if state["i"] < len(tokens) else None

    def take():
        tok = peek()
        if tok is not None:
            state["i"] += 1
        return tok

    def add_constant(label: str) -> str:
        while True:
            cid = f"_c{state['consts']}"
            state["consts"] += 1
            if cid not in variables:
                nodes.append((cid, label))
                return cid

    def parse_node() -> str:
        take()  # caller checked the '('
        var_tok = take()
        if var_tok is None or var_tok[0] != "atom":
            raise PenmanError("expected a variable after '('", var_tok[2] if var_tok else len(text))
        slash = take()
        if slash is None or slash[0] != "slash":
            raise PenmanError(f"expected '/' after variable {var_tok[1]!r}", slash[2] if slash else len(text))
        concept_tok = take()
        if concept_tok is None or concept_tok[0] not in ("atom", "string"):
            raise PenmanError("expected a concept after '/'", concept_tok[2] if concept_tok else len(text))
        var = var_tok[1]
        if var in defined:
            raise PenmanError(f"duplicate definition of variable {var!r}", var_tok[2])
        defined.add(var)
        label = _unquote(concept_tok[1]) if concept_tok[0] == "string" else concept_tok[1]
        nodes.append((var, label))
        while True:
            tok = peek()
            if tok is None:
                raise PenmanError("unbalanced parentheses (missing ')')", len(text))
            if tok[0] == "close":
                take()
                return var
            if tok[0] != "relation":
                raise PenmanError(f"unexpected token {tok[1]!r}", tok[2])
            take()
            rel, rel_off = tok[1], tok[2]
            val = peek()
            if val is None or val[0] in ("close", "relation", "slash"):
                raise PenmanError(f"relation {rel!r} without a following value", rel_off)
            if val[0] == "open":
                edges.append(None)  # keep pre-order edge position
                slot = len(edges) - 1
                child = parse_node()
                edges[slot] = (var, rel, child)
            elif val[0] == "string":
                take()
                edges.append((var, rel, add_constant(_unquote(val[1]))))
            else:  # atom: variable mention or bare constant
                take()
                if val[1] in variables:
                    edges.append((var, rel, val[1]))
                else:
                    edges.append((var, rel, add_constant(val[1])))

    root = parse_node()
    if state["i"] != len(tokens):
        tok = tokens[state["i"]]
        raise PenmanError(f"unbalanced parentheses (unexpected {tok[1]!r} after graph)", tok[2])
    return LabeledGraph(tuple(nodes), tuple(e for e in edges if e is not None), root)


_ATOM_SAFE = re.compile(r"[^\s():/\"]+\Z")


def _format_label(label: str) -> str:
    if _ATOM_SAFE.match(label):
        return label
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_penman(g: LabeledGraph) -> str:
    """Write a graph back out as PENMAN text (fresh variable names).

    Only graphs whose every node is reachable from the root via outgoing
    edges, with ':'-prefixed edge labels, are expressible.
    """
    names = {nid: f"z{k}" for k, (nid, _) in enumerate(g.nodes)}
    visited: set[str] = set()

    def emit(nid: str) -> str:
        visited.add(nid)
        parts = [f"({names[nid]} / {_format_label(g.label(nid))}"]
        for rel, tgt in g.out_edges(nid):
            if not rel.startswith(":"):
                raise GraphError(f"edge label {rel!r} is not expressible in PENMAN")
            if tgt in visited:
                parts.append(f"{rel} {names[tgt]}")
            else:
                parts.append(f"{rel} {emit(tgt)}")
        return " ".join(parts) + ")"

    out = emit(g.root)
    if len(visited) != len(g.nodes):
        missing = next(lbl for nid, lbl in g.nodes if nid not in visited)
        raise GraphError(f"node {missing!r} unreachable from root; cannot serialize")
    return out


_SENSE_SUFFIX = re.compile(r"(.+)-\d{2}\Z")


def strip_sense(label: str) -> str:
    """Remove trailing two-digit sense suffixes ("want-01" -> "want").

    Applied repeatedly so the result is a fixed point.
    """
    while (m := _SENSE_SUFFIX.match(label)) is not None:
        label = m.group(1)
    return label


def simplify(g: LabeledGraph, strip_senses: bool = True, drop_wiki: bool = True) -> LabeledGraph:
    """Normalize a parsed graph for the generation pipeline.

    strip_senses rewrites node labels ending in a two-digit sense suffix;
    drop_wiki removes ":wiki" edges (their constants duplicate the ":name"
    surface form) together with targets nothing else references.
    """
    edges = list(g.edges)
    nodes = list(g.nodes)
    if drop_wiki:
        wiki_targets = {t for _, label, t in edges if label == ":wiki"}
        edges = [e for e in edges if e[1] != ":wiki"]
        still_used = {g.root}
        for s, _, t in edges:
            still_used.add(s)
            still_used.add(t)
        nodes = [n for n in nodes if n[0] not in wiki_targets or n[0] in still_used]
    if strip_senses:
        nodes = [(nid, strip_sense(label)) for nid, label in nodes]
    return LabeledGraph(tuple(nodes), tuple(edges), g.root)


def canonical_form(g: LabeledGraph):
    """Label-based canonical form used to decide isomorphism in tests.

    Exact for graphs with unique node labels; an approximation otherwise.
    """
    return (
        tuple(sorted(label for _, label in g.nodes)),
        tuple(sorted((g.label(s), e, g.label(t)) for s, e, t in g.edges)),
        g.label(g.root),
    )


def isomorphic(a: LabeledGraph, b: LabeledGraph) -> bool:
    return canonical_form(a) == canonical_form(b)


def iter_graph_blocks(text: str) -> Iterator[str]:
    """Yield blank-line-separated blocks, skipping '#' comment lines."""
    block: list[str] = []
    for line in text.splitlines():
        if not line.strip():
            if block:
                yield "\n".join(block)
                block = []
        elif line.lstrip().startswith("#"):
            continue
        else:
            block.append(line)
    if block:
        yield "\n".join(block)


def parse_penman_blocks(text: str) -> list[LabeledGraph]:
    return [parse_penman(block) for block in iter_graph_blocks(text)]


def parse_triple_set(lines: Iterable[str]) -> LabeledGraph:
    """Build a graph from "subject | predicate | object" lines.

    One node per distinct entity string, one edge per non-empty line; the
    root is the first subject. The result may be disconnected.
    """
    entities: dict[str, None] = {}
    edges: list[tuple[str, str, str]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("|")
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'subject | predicate | object', got {raw!r}")
        s, p, o = (part.strip() for part in parts)
        if not s or not p or not o:
            raise GraphError(f"line {lineno}: empty field in {raw!r}")
        entities.setdefault(s)
        entities.setdefault(o)
        edges.append((s, p, o))
    if not edges:
        raise GraphError("empty graph")
    return LabeledGraph(tuple((e, e) for e in entities), tuple(edges), edges[0][0])


def parse_triple_blocks(text: str) -> list[LabeledGraph]:
    return [parse_triple_set(block.splitlines()) for block in iter_graph_blocks(text)]
