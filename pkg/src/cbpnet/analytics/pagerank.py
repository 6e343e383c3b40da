"""PageRank on directed multigraphs by power iteration."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PageRankNotConverged(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"no convergence after {iterations} sweeps (L1 change {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True, eq=False)
class PageRankVector:
    """Scale-free PageRank ``R = n * pi``; ``R[0]`` is vertex 1."""

    R: np.ndarray
    damping: float
    iterations: int
    residual: float

    @property
    def pi(self) -> np.ndarray:
        return self.R / self.R.size

    def __getitem__(self, vertex: int) -> float:
        return float(self.R[vertex - 1])


def graph_pagerank(graph, c: float = 0.5, tol: float = 1e-10, max_iter: int = 10_000) -> PageRankVector:
    """Solve ``pi = pi (c P) + (1 - c) q`` with uniform ``q``.

    ``graph`` needs ``n`` and 1-based edge arrays ``src``, ``dst``, ``mult``.
    Rows of vertices without out-edges are replaced by ``q`` before damping.
    Multiplicities and self-loops enter the transition matrix as weights.
    """
    if not 0 < c < 1:
        raise ValueError("damping must lie in (0, 1)")
    n = int(graph.n)
    src = np.asarray(graph.src, dtype=np.int64) - 1
    dst = np.asarray(graph.dst, dtype=np.int64) - 1
    mult = np.asarray(graph.mult, dtype=np.float64)
    out = np.bincount(src, weights=mult, minlength=n)
    dangling = out == 0
    w = mult / out[src]
    pi = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, max_iter + 1):
        flow = np.bincount(dst, weights=pi[src] * w, minlength=n)
        new = c * flow + (c * pi[dangling].sum() + (1.0 - c)) / n
        residual = float(np.abs(new - pi).sum())
        pi = new
        if residual <= tol:
            return PageRankVector(n * pi, c, it, residual)
    raise PageRankNotConverged(max_iter, residual)
