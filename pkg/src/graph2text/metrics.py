"""Corpus BLEU and the relation-preservation recall proxy."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .graphs import LabeledGraph
from .views import extract_spo

MAX_ORDER = 4


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_length: int
    ref_length: int


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_details(references: Sequence[Sequence[str]], hypotheses: Sequence[Sequence[str]]) -> BleuResult:
    """Corpus-level case-sensitive 4-gram BLEU with clipped precisions.

    Single reference per hypothesis; the score is zero whenever any
    n-gram precision is zero.
    """
    if len(references) != len(hypotheses):
        raise ValueError(f"got {len(references)} references but {len(hypotheses)} hypotheses")
    if not references:
        raise ValueError("empty corpus")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = ref_len = 0
    for ref, hyp in zip(references, hypotheses):
        ref = list(ref)
        hyp = list(hyp)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            matches[n - 1] += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    if hyp_len == 0 or any(m == 0 or t == 0 for m, t in zip(matches, totals)):
        precisions = tuple((m / t) if t else 0.0 for m, t in zip(matches, totals))
        bp = 1.0 if hyp_len > ref_len else (math.exp(1.0 - ref_len / hyp_len) if hyp_len else 0.0)
        return BleuResult(0.0, precisions, bp, hyp_len, ref_len)
    precisions = tuple(m / t for m, t in zip(matches, totals))
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    score = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER)
    return BleuResult(score, precisions, bp, hyp_len, ref_len)


def evaluate_bleu(references: Sequence[Sequence[str]], hypotheses: Sequence[Sequence[str]]) -> float:
    return bleu_details(references, hypotheses).score


@dataclass(frozen=True)
class RecallReport:
    recall: float | None  # None when no interactions exist
    preserved: int
    total: int
    per_example: tuple[tuple[int, int] | None, ...]  # (preserved, total) or None


def _interaction_preserved(spo: tuple[str, str, str], hyp_lower: list[str]) -> bool:
    subj, pred, obj = (w.lower() for w in spo)
    if pred not in hyp_lower or subj not in hyp_lower or obj not in hyp_lower:
        return False
    first_subj = hyp_lower.index(subj)
    last_obj = len(hyp_lower) - 1 - hyp_lower[::-1].index(obj)
    return first_subj < last_obj


def relation_recall(graphs: Sequence[LabeledGraph], hypotheses: Sequence[Sequence[str]]) -> RecallReport:
    """Fraction of subject/predicate/object interactions kept by outputs.

    An interaction counts as preserved when all three words occur in the
    hypothesis and the subject's first occurrence precedes the object's
    last occurrence. Graphs without interactions are skipped.
    """
    if len(graphs) != len(hypotheses):
        raise ValueError(f"got {len(graphs)} graphs but {len(hypotheses)} hypotheses")
    preserved = total = 0
    per_example: list[tuple[int, int] | None] = []
    for g, hyp in zip(graphs, hypotheses):
        interactions = extract_spo(g)
        if not interactions:
            per_example.append(None)
            continue
        hyp_lower = [t.lower() for t in hyp]
        kept = sum(1 for spo in interactions if _interaction_preserved(spo, hyp_lower))
        per_example.append((kept, len(interactions)))
        preserved += kept
        total += len(interactions)
    recall = (preserved / total) if total else None
    return RecallReport(recall, preserved, total, tuple(per_example))
