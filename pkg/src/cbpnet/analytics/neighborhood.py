"""Empirical neighbourhood (in-component) frequencies and joint degree/PageRank tails."""
from __future__ import annotations

from collections import Counter

import numpy as np

from ..collapse import CollapsedGraph, in_component
from .isomorphism import RootedMultigraph, canonical_code

LARGE = b"LARGE"


def _as_multigraph(target) -> RootedMultigraph:
    return target if isinstance(target, RootedMultigraph) else target.to_multigraph()


def neighborhood_frequency(graph: CollapsedGraph, target) -> float:
    """Fraction of vertices whose in-component is isomorphic to ``target`` (marks included)."""
    t = _as_multigraph(target)
    code = canonical_code(t)
    hits = 0
    for i in range(1, graph.n + 1):
        comp = in_component(graph, i, max_size=t.n)
        if comp.truncated or comp.size != t.n:
            continue
        if canonical_code(RootedMultigraph.from_component(comp)) == code:
            hits += 1
    return hits / graph.n


def neighborhood_distribution(graph: CollapsedGraph, max_size: int = 50) -> dict[bytes, float]:
    """Law of the in-component of a uniform vertex; components larger than
    ``max_size`` are pooled under ``LARGE``."""
    counts: Counter = Counter()
    for i in range(1, graph.n + 1):
        comp = in_component(graph, i, max_size=max_size)
        counts[LARGE if comp.truncated else canonical_code(RootedMultigraph.from_component(comp))] += 1
    return {k: v / graph.n for k, v in counts.items()}


def joint_tail_frequency(graph: CollapsedGraph, pagerank, k: int, r: float) -> float:
    """``(1/n) #{i : D^-_i >= k, R_i > r}`` with in-degrees counting self-loops."""
    R = pagerank.R if hasattr(pagerank, "R") else np.asarray(pagerank)
    indeg = graph.in_degree[1:]
    return float(np.mean((indeg >= k) & (R > r)))


def joint_tail(N, R, k: int, r: float) -> float:
    """Same statistic for paired samples (e.g. root in-degree and PageRank of limit trees)."""
    N = np.asarray(N)
    R = np.asarray(R)
    return float(np.mean((N >= k) & (R > r)))
