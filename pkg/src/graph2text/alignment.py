"""Node-to-token alignments: file ingestion and heuristic KG matching."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .graphs import LabeledGraph


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class Alignment:
    """Map from node id to the ordered token indices it aligns to."""

    entries: Mapping[str, tuple[int, ...]]

    def __post_init__(self):
        frozen = {str(k): tuple(int(i) for i in v) for k, v in self.entries.items()}
        object.__setattr__(self, "entries", frozen)
        for nid, toks in frozen.items():
            if not toks:
                raise AlignmentError(f"empty token list for node {nid!r}")
            if any(t < 0 for t in toks):
                raise AlignmentError(f"negative token index for node {nid!r}")
            if len(set(toks)) != len(toks):
                raise AlignmentError(f"duplicate token index for node {nid!r}")

    def __contains__(self, nid: str) -> bool:
        return nid in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, nid: str) -> tuple[int, ...] | None:
        return self.entries.get(nid)


def load_alignments(text: str) -> Alignment:
    """Parse "node-id<TAB>idx[,idx...]" lines."""
    entries: dict[str, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise AlignmentError(f"line {lineno}: expected 'node<TAB>indices', got {raw!r}")
        nid, idx_part = parts
        if nid in entries:
            raise AlignmentError(f"line {lineno}: duplicate node id {nid!r}")
        try:
            toks = tuple(int(p) for p in idx_part.split(","))
        except ValueError:
            raise AlignmentError(f"line {lineno}: bad index list {idx_part!r}") from None
        entries[nid] = toks
    return Alignment(entries)


_ABBREV = re.compile(r"[\s_]*\([^()]*\)\s*\Z")


def node_words(label: str) -> list[str]:
    """Lowercased word list of an entity label, abbreviation stripped.

    "New_York_(NY)" -> ["new", "york"]. Underscores stand for spaces.
    """
    label = _ABBREV.sub("", label)
    return [w.lower() for w in re.split(r"[\s_]+", label) if w]


def match_kg_nodes(g: LabeledGraph, sentence: Sequence[str]) -> tuple[Alignment, float]:
    """Align KG nodes to the sentence by longest-prefix string matching.

    For each node, the longest prefix of its word list that matches a
    contiguous lowercased token span wins; among equal-length matches the
    earliest position wins. Unmatched nodes are absent from the result.
    Returns the alignment and the matched-node fraction.
    """
    if not sentence:
        raise AlignmentError("empty sentence")
    lowered = [t.lower() for t in sentence]
    entries: dict[str, tuple[int, ...]] = {}
    for nid, label in g.nodes:
        words = node_words(label)
        span = _find_prefix(words, lowered)
        if span is not None:
            entries[nid] = span
    coverage = len(entries) / g.n_nodes
    return Alignment(entries), coverage


def _find_prefix(words: list[str], lowered: list[str]) -> tuple[int, ...] | None:
    for k in range(len(words), 0, -1):
        prefix = words[:k]
        for p in range(len(lowered) - k + 1):
            if lowered[p : p + k] == prefix:
                return tuple(range(p, p + k))
    return None


@dataclass(frozen=True)
class CoverageReport:
    mean: float
    per_example: tuple[float, ...]
    histogram: tuple[int, ...]  # ten bins over [0, 1], last bin closed

    def to_text(self) -> str:
        lines = [f"examples={len(self.per_example)}", f"coverage_mean={self.mean:.6f}"]
        for b, count in enumerate(self.histogram):
            lo, hi = b / 10, (b + 1) / 10
            lines.append(f"hist_{lo:.1f}_{hi:.1f}={count}")
        return "\n".join(lines)


def coverage_report(corpus: Sequence[tuple[LabeledGraph, Sequence[str]]]) -> CoverageReport:
    """Aggregate match_kg_nodes coverage over a corpus."""
    if not corpus:
        raise AlignmentError("no examples")
    fractions = []
    for g, sentence in corpus:
        _, cov = match_kg_nodes(g, sentence)
        fractions.append(cov)
    bins = [0] * 10
    for f in fractions:
        bins[min(int(f * 10), 9)] += 1
    mean = sum(fractions) / len(fractions)
    return CoverageReport(mean, tuple(fractions), tuple(bins))
