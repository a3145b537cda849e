"""Small deterministic synthetic corpora for the overfit harness and demos."""

from __future__ import annotations

import random

_AGENTS = ["boy", "girl", "dog", "man", "woman"]
_VERBS = ["want", "eat", "see", "find", "chase"]
_OBJECTS = ["lunch", "ball", "book", "fish", "apple"]
_MODS = ["big", "red", "happy", "small"]


def _simple(agent: str, verb: str, obj: str) -> dict:
    graph = f"(v / {verb}-01 :ARG0 (a / {agent}) :ARG1 (o / {obj}))"
    sentence = ["the", agent, verb, "the", obj]
    return {"graph": graph, "sentence": sentence, "alignments": {"a": [1], "v": [2], "o": [4]}}


def _modified(agent: str, verb: str, obj: str, mod: str) -> dict:
    graph = f"(v / {verb}-01 :ARG0 (a / {agent}) :ARG1 (o / {obj} :mod (m / {mod})))"
    sentence = ["the", agent, verb, "the", mod, obj]
    return {
        "graph": graph,
        "sentence": sentence,
        "alignments": {"a": [1], "v": [2], "m": [4], "o": [5]},
    }


def _chained(agent: str, verb: str, other: str, verb2: str, obj: str) -> dict:
    graph = (
        f"(v / {verb}-01 :ARG0 (a / {agent}) "
        f":ARG1 (w / {verb2}-01 :ARG0 (b / {other}) :ARG1 (o / {obj})))"
    )
    sentence = ["the", agent, verb, "the", other, "to", verb2, "the", obj]
    return {
        "graph": graph,
        "sentence": sentence,
        "alignments": {"a": [1], "v": [2], "b": [4], "w": [6], "o": [8]},
    }


def overfit_records(n: int = 20, seed: int = 13) -> list[dict]:
    """n distinct graph-sentence pairs (trees, single-token alignments)."""
    rng = random.Random(seed)
    records: list[dict] = []
    seen: set[str] = set()
    while len(records) < n:
        kind = rng.randrange(3)
        agent = rng.choice(_AGENTS)
        verb = rng.choice(_VERBS)
        obj = rng.choice(_OBJECTS)
        if kind == 0:
            rec = _simple(agent, verb, obj)
        elif kind == 1:
            rec = _modified(agent, verb, obj, rng.choice(_MODS))
        else:
            other = rng.choice([a for a in _AGENTS if a != agent])
            verb2 = rng.choice([v for v in _VERBS if v != verb])
            rec = _chained(agent, verb, other, verb2, obj)
        key = " ".join(rec["sentence"])
        if key in seen:
            continue
        seen.add(key)
        rec["id"] = f"syn{len(records)}"
        records.append(rec)
    return records
