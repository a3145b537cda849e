"""Shared test fixtures and random-graph generators."""

from __future__ import annotations

import random

import pytest

from graph2text.graphs import LabeledGraph

EDGE_LABELS = [":a", ":b", ":c", ":d", ":e"]


def random_rooted_graph(
    rng: random.Random,
    max_nodes: int = 12,
    reentrancy: float = 0.2,
) -> LabeledGraph:
    """Random connected rooted graph with unique node labels.

    A spanning tree of outgoing edges from node 0 guarantees root
    coverage; extra edges onto already-present nodes create reentrancies
    (and possibly cycles) at roughly the requested rate.
    """
    n = rng.randint(1, max_nodes)
    nodes = tuple((f"n{i}", f"c{i}") for i in range(n))
    edges = []
    for i in range(1, n):
        parent = rng.randrange(i)
        edges.append((f"n{parent}", rng.choice(EDGE_LABELS), f"n{i}"))
    for i in range(1, n):
        if rng.random() < reentrancy:
            src = rng.randrange(n)
            if src == i:
                continue
            candidate = (f"n{src}", rng.choice(EDGE_LABELS), f"n{i}")
            if candidate not in edges:
                edges.append(candidate)
    return LabeledGraph(nodes, tuple(edges), "n0")


def random_forest(rng: random.Random, max_nodes: int = 10) -> LabeledGraph:
    """Possibly disconnected graph (1-3 tree components) for path tests."""
    n = rng.randint(2, max_nodes)
    components = rng.randint(1, min(3, n))
    cuts = sorted(rng.sample(range(1, n), components - 1)) if components > 1 else []
    starts = [0, *cuts]
    ends = [*cuts, n]
    nodes = tuple((f"n{i}", f"c{i}") for i in range(n))
    edges = []
    for lo, hi in zip(starts, ends):
        for i in range(lo + 1, hi):
            parent = rng.randrange(lo, i)
            edges.append((f"n{parent}", rng.choice(EDGE_LABELS), f"n{i}"))
        for i in range(lo + 1, hi):
            if rng.random() < 0.25:
                src = rng.randrange(lo, hi)
                if src != i:
                    candidate = (f"n{src}", rng.choice(EDGE_LABELS), f"n{i}")
                    if candidate not in edges:
                        edges.append(candidate)
    return LabeledGraph(nodes, tuple(edges), "n0")


def all_simple_hop_paths(g: LabeledGraph, src: str, dst: str) -> list[list[tuple[str, bool]]]:
    """Exhaustively enumerate simple undirected paths as (label, forward) hops."""
    adjacency: dict[str, list[tuple[str, str, bool]]] = {nid: [] for nid in g.node_ids}
    for s, label, t in g.edges:
        adjacency[s].append((t, label, True))
        adjacency[t].append((s, label, False))
    paths: list[list[tuple[str, bool]]] = []

    def walk(cur: str, visited: set[str], hops: list[tuple[str, bool]]) -> None:
        if cur == dst:
            paths.append(list(hops))
            return
        for nxt, label, forward in adjacency[cur]:
            if nxt not in visited:
                visited.add(nxt)
                hops.append((label, forward))
                walk(nxt, visited, hops)
                hops.pop()
                visited.remove(nxt)

    walk(src, {src}, [])
    return paths


BOY_WANTS_PENMAN = (
    "(w / want-01 :ARG0 (b / boy) "
    ":ARG1 (e / eat-01 :ARG0 (g / girl :mod (b2 / beautiful)) "
    ":ARG1 (l / lunch) :accompanier b))"
)

# The same scene without the reentrant edge: the tree on which the
# boy->girl label path runs through want and eat.
BOY_WANTS_TREE_PENMAN = (
    "(w / want-01 :ARG0 (b / boy) "
    ":ARG1 (e / eat-01 :ARG0 (g / girl :mod (b2 / beautiful)) "
    ":ARG1 (l / lunch)))"
)


@pytest.fixture
def boy_wants_graph():
    from graph2text.graphs import parse_penman

    return parse_penman(BOY_WANTS_PENMAN)


@pytest.fixture
def boy_wants_tree():
    from graph2text.graphs import parse_penman

    return parse_penman(BOY_WANTS_TREE_PENMAN)
