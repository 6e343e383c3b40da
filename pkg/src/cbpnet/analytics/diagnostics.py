"""Empirical checks of the birth-time asymptotics and the expectation bound."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _loops
from ..engine import DEFAULT_NODE_CAP, LiftedRun, _kernel_args
from ..kernel import AttachmentKernel
from ..outdegree import OutDegreeDistribution


def birth_time_gaps(run: LiftedRun, lam: float) -> np.ndarray:
    """``g[k] = sigma_k - log(k)/lam`` for k = 1..S_n (index 0 unused, NaN)."""
    k = np.arange(1, run.node_count + 1)
    g = np.full(run.node_count + 1, np.nan)
    g[1:] = run.sigma[1:] - np.log(k) / lam
    return g


def birth_time_diagnostic(run: LiftedRun, lam: float, m_grid=None) -> list[tuple[int, float]]:
    """``sup_{k, j >= m} |sigma_k - sigma_j - log(k/j)/lam|`` for each ``m``.

    The sup equals the range of ``g`` over ``k >= m``.
    """
    g = birth_time_gaps(run, lam)[1:]
    hi = np.maximum.accumulate(g[::-1])[::-1]
    lo = np.minimum.accumulate(g[::-1])[::-1]
    if m_grid is None:
        m_grid = [10 ** e for e in range(1, int(np.log10(run.node_count)) + 1)]
    out = []
    for m in m_grid:
        if not 1 <= m <= run.node_count:
            raise ValueError(f"m={m} outside 1..{run.node_count}")
        out.append((int(m), float(hi[m - 1] - lo[m - 1])))
    return out


def expectation_bound(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, t: float) -> float:
    mu = outdeg.mean
    return 1.0 + mu * np.exp(kernel.C_f * (mu + 1.0) * t)


@dataclass
class BoundRow:
    t: float
    mean: float
    se: float
    bound: float
    samples: int
    capped: int
    violation: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def expectation_bound_check(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, t_grid, samples: int,
                            rng: np.random.Generator, node_cap: int = DEFAULT_NODE_CAP) -> list[BoundRow]:
    """Monte Carlo mean of node count plus mark sum at each ``t`` against the bound.

    A violation is a mean exceeding the bound by more than 3 standard errors.
    Capped trees are kept (their counts are lower bounds) and reported.
    """
    table, s, o = _kernel_args(kernel)
    rows = []
    for t in t_grid:
        _, size, _, _, mark_sum, _, capped = _loops.stopped_batch(
            int(samples), 0.0, float(t), outdeg.cdf, table, s, o, int(node_cap), 0.5, rng)
        lam_t = (size + mark_sum).astype(np.float64)
        mean = float(lam_t.mean())
        se = float(lam_t.std(ddof=1) / np.sqrt(lam_t.size)) if lam_t.size > 1 else 0.0
        b = expectation_bound(kernel, outdeg, t)
        rows.append(BoundRow(float(t), mean, se, b, int(samples), int(capped.sum()), bool(mean > b + 3 * se)))
    return rows
