"""The local limit: marked branching trees stopped at an independent Exp(lambda) time."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _loops
from .engine import DEFAULT_NODE_CAP, MarkedTree, _kernel_args, grow_marked_ctbp
from .kernel import AttachmentKernel
from .outdegree import OutDegreeDistribution


@dataclass(frozen=True, eq=False)
class StoppedLimitTree:
    tree: MarkedTree
    chi: float
    lam: float

    @property
    def capped(self) -> bool:
        return self.tree.capped


@dataclass(frozen=True)
class RootStatistics:
    N_root: int
    R_root: float
    size: int


def sample_stopped_tree(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, lam: float,
                        rng: np.random.Generator, node_cap: int = DEFAULT_NODE_CAP) -> StoppedLimitTree:
    """Draw ``chi ~ Exp(lam)``, then grow a marked tree to horizon ``chi``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    chi = float(rng.exponential(1.0 / lam))
    return StoppedLimitTree(grow_marked_ctbp(kernel, outdeg, chi, rng, node_cap), chi, float(lam))


def root_in_degree(t) -> int:
    tree = t.tree if isinstance(t, StoppedLimitTree) else t
    return tree.root_children


def root_pagerank(t, c: float) -> float:
    """``R_v = (1 - c) + c * sum_children R_u / mark_u`` evaluated at the root."""
    if not 0 < c < 1:
        raise ValueError("damping must lie in (0, 1)")
    tree = t.tree if isinstance(t, StoppedLimitTree) else t
    if tree.capped:
        raise ValueError("tree hit the node cap; its PageRank would be biased")
    return float(tree.pagerank(c)[0])


def root_statistics(t, c: float) -> RootStatistics:
    tree = t.tree if isinstance(t, StoppedLimitTree) else t
    return RootStatistics(root_in_degree(tree), root_pagerank(tree, c), tree.size)


@dataclass(frozen=True, eq=False)
class StoppedBatch:
    """Columns of independent stopped trees; ``R_root`` is NaN for capped samples."""

    chi: np.ndarray
    size: np.ndarray
    N_root: np.ndarray
    R_root: np.ndarray
    mark_sum: np.ndarray
    root_mark: np.ndarray
    capped: np.ndarray
    damping: float

    def __len__(self):
        return int(self.chi.size)

    @property
    def discard_rate(self) -> float:
        return float(self.capped.mean()) if len(self) else 0.0

    def kept(self) -> "StoppedBatch":
        m = ~self.capped
        return StoppedBatch(self.chi[m], self.size[m], self.N_root[m], self.R_root[m], self.mark_sum[m],
                            self.root_mark[m], self.capped[m], self.damping)


def sample_stopped_batch(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, lam: float, n_samples: int,
                         rng: np.random.Generator, node_cap: int = DEFAULT_NODE_CAP,
                         c: float = 0.5) -> StoppedBatch:
    """Many stopped trees in one compiled loop; the draws match repeated
    :func:`sample_stopped_tree` calls on the same generator."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    out = _loops.stopped_batch(int(n_samples), float(lam), 0.0, outdeg.cdf, *_kernel_args(kernel),
                               int(node_cap), float(c), rng)
    return StoppedBatch(*out, damping=float(c))


def sample_root_in_degrees(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, lam: float,
                           n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Root in-degrees only: each root slot is an independent pure birth
    process run to the stopping time, so no descendants are grown."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    _, _, N = _loops.root_degree_batch(int(n_samples), float(lam), outdeg.cdf, *_kernel_args(kernel), rng)
    return N


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class PmfValue:
    value: np.ndarray
    remainder: float


def _mark_table(h: OutDegreeDistribution, d_cut: int):
    K = min(h.support_max, int(d_cut))
    d = np.arange(1, K + 1, dtype=np.float64)
    w = np.asarray(h.pmf[:K], dtype=np.float64)
    tail = float(max(0.0, 1.0 - w.sum())) if K < h.support_max else 0.0
    return d, w, tail


def closed_form_pa_pmf_with_remainder(beta: float, h: OutDegreeDistribution, x, d_cut: int = 10**4) -> PmfValue:
    """Root in-degree pmf for ``f(k) = k + beta`` stopped at rate ``2 + beta``.

    Terms with ``d > d_cut`` are dropped; each conditional pmf is at most 1,
    so the dropped mass of ``h`` bounds the error.
    """
    if not beta > -1:
        raise ValueError("beta must exceed -1")
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xs < 0) or np.any(xs != np.floor(xs)):
        raise ValueError("x must be a nonnegative integer")
    d, w, tail = _mark_table(h, d_cut)
    a = d * (beta + 1.0)
    lt = (np.log(2.0 + beta) + gammaln(2.0 + beta + a)[None, :] + gammaln(xs[:, None] + a[None, :])
          - gammaln(a)[None, :] - gammaln(xs[:, None] + a[None, :] + 3.0 + beta))
    val = np.exp(lt) @ w
    return PmfValue(val if np.ndim(x) else val[0], tail)


def closed_form_pa_pmf(beta: float, h: OutDegreeDistribution, x, d_cut: int = 10**4):
    return closed_form_pa_pmf_with_remainder(beta, h, x, d_cut).value


def closed_form_ua_pmf_with_remainder(h: OutDegreeDistribution, x, d_cut: int = 10**4) -> PmfValue:
    """Root in-degree pmf for constant ``f`` (free of the constant)."""
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xs < 0) or np.any(xs != np.floor(xs)):
        raise ValueError("x must be a nonnegative integer")
    d, w, tail = _mark_table(h, d_cut)
    lt = -np.log1p(d)[None, :] + xs[:, None] * (np.log(d) - np.log1p(d))[None, :]
    val = np.exp(lt) @ w
    return PmfValue(val if np.ndim(x) else val[0], tail)


def closed_form_ua_pmf(h: OutDegreeDistribution, x, d_cut: int = 10**4):
    return closed_form_ua_pmf_with_remainder(h, x, d_cut).value


def predicted_tail_exponent(model: str, gamma: float, beta: float = 0.0) -> float:
    """Regular-variation index of the root in-degree pmf for ``h(d) ~ d**-gamma``.

    Preferential attachment (``"pa"``): ``min(3 + beta, gamma)``; uniform
    attachment (``"ua"``): ``gamma``.
    """
    if not np.isfinite(gamma):
        raise ValueError("gamma must be finite")
    if model == "pa":
        return float(min(3.0 + beta, gamma))
    if model == "ua":
        return float(gamma)
    raise ValueError("model must be 'pa' or 'ua'")


def pmf_for_kernel(kernel: AttachmentKernel, h: OutDegreeDistribution, x, d_cut: int = 10**4):
    """Closed form matching ``kernel`` when one exists (``Linear(1, beta)`` or
    ``Constant``), else ``None``."""
    if kernel.family == "linear" and kernel.slope == 1.0:
        return closed_form_pa_pmf(kernel.offset, h, x, d_cut)
    if kernel.family == "constant":
        return closed_form_ua_pmf(h, x, d_cut)
    return None
