"""Empirical distributions, distances, tail-index estimation and intervals."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _st


class EmpiricalDistribution:
    """Counts over a discrete support."""

    def __init__(self, counts=None):
        self.counts: Counter = Counter(counts or {})
        self.total = int(sum(self.counts.values()))

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDistribution":
        arr = np.asarray(samples)
        if arr.dtype.kind in "iu":
            vals, cnt = np.unique(arr, return_counts=True)
            return cls(dict(zip(vals.tolist(), cnt.tolist())))
        return cls(Counter(arr.tolist()))

    def prob(self, x) -> float:
        return self.counts.get(x, 0) / self.total if self.total else 0.0

    @property
    def support(self) -> list:
        return sorted(self.counts)

    def probabilities(self) -> dict:
        return {x: c / self.total for x, c in self.counts.items()}

    def pmf_array(self, upto: int) -> np.ndarray:
        return np.array([self.prob(x) for x in range(upto + 1)])

    def __repr__(self):
        return f"EmpiricalDistribution(total={self.total}, support_size={len(self.counts)})"


def _as_mapping(p):
    if isinstance(p, EmpiricalDistribution):
        return p.probabilities()
    if isinstance(p, dict):
        return p
    arr = np.asarray(p, dtype=np.float64)
    return {i: float(v) for i, v in enumerate(arr)}


def tv_distance(p, q, support=None) -> float:
    """Half the L1 distance; arrays are read as pmfs over 0, 1, 2, ....

    ``q`` may also be a callable ``x -> prob``, in which case ``support``
    is required. With ``support`` the sum runs over it only.
    """
    pm = _as_mapping(p)
    if callable(q):
        if support is None:
            raise ValueError("a callable pmf needs an explicit support")
        qm = {x: float(q(x)) for x in support}
    else:
        qm = _as_mapping(q)
    xs = sorted(set(pm) | set(qm)) if support is None else list(support)
    return 0.5 * float(sum(abs(pm.get(x, 0.0) - qm.get(x, 0.0)) for x in xs))


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n <= 0:
        return (0.0, 1.0)
    p = successes / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


@dataclass
class HillEstimate:
    alpha: float
    k: int
    se: float
    n: int
    plateau: bool
    scan: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "k": self.k, "se": self.se, "n": self.n, "plateau": self.plateau,
                "scan": [[int(k), float(a)] for k, a in self.scan]}


def _hill_sorted(desc: np.ndarray, k: int) -> float:
    logs = np.log(desc[: k + 1])
    return 1.0 / (logs[:k].mean() - logs[k])


def hill_tail_index(samples, k_order: int | None = None, n_boot: int = 100,
                    rng: np.random.Generator | None = None, plateau_tol: float = 0.1) -> HillEstimate:
    """Hill estimator of the survival-tail index ``alpha`` (``P(X > x) ~ x**-alpha``).

    ``k_order`` defaults to ``2 sqrt(N)``. The bootstrap resamples the full
    sample. ``plateau`` is true when the estimates at ``k/2`` and ``2k``
    stay within ``plateau_tol`` (relative) of the estimate at ``k``.
    """
    x = np.asarray(samples, dtype=np.float64)
    N = x.size
    k = int(round(2 * np.sqrt(N))) if k_order is None else int(k_order)
    if k < 10:
        raise ValueError("Hill estimation needs at least 10 exceedances")
    if k >= N:
        raise ValueError("k_order must be smaller than the sample size")
    desc = -np.sort(-x)
    if not desc[k] > 0:
        raise ValueError("the (k+1)-th largest sample must be positive")
    alpha = _hill_sorted(desc, k)

    scan = []
    kk = 10
    while kk < N and desc[kk] > 0:
        scan.append((kk, _hill_sorted(desc, kk)))
        kk = int(kk * 1.5) + 1
    near = [_hill_sorted(desc, j) for j in (max(10, k // 2), min(2 * k, N - 1)) if desc[j] > 0]
    plateau = all(abs(a / alpha - 1) <= plateau_tol for a in near)

    se = float("nan")
    if n_boot > 0:
        rng = np.random.default_rng(0) if rng is None else rng
        boots = []
        for _ in range(n_boot):
            xb = x[rng.integers(0, N, N)]
            top = -np.partition(-xb, k)[: k + 1]
            top = -np.sort(-top)
            if top[k] > 0:
                boots.append(_hill_sorted(top, k))
        se = float(np.std(boots, ddof=1)) if len(boots) > 1 else float("nan")
    return HillEstimate(float(alpha), k, se, N, bool(plateau), scan)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    bins: int

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "dof": self.dof, "p_value": self.p_value, "bins": self.bins}


def two_sample_chi2(a, b, min_expected: float = 5.0) -> ChiSquareResult:
    """Homogeneity test of two samples of hashable categories.

    Categories whose pooled expected count falls below ``min_expected`` in
    either sample are merged into one overflow bin.
    """
    ca, cb = Counter(a), Counter(b)
    na, nb = sum(ca.values()), sum(cb.values())
    keys = sorted(set(ca) | set(cb), key=repr)
    big, rest_a, rest_b = [], 0, 0
    for key in keys:
        tot = ca[key] + cb[key]
        if min(tot * na, tot * nb) / (na + nb) >= min_expected:
            big.append((ca[key], cb[key]))
        else:
            rest_a += ca[key]
            rest_b += cb[key]
    if rest_a + rest_b > 0:
        big.append((rest_a, rest_b))
    if len(big) < 2:
        return ChiSquareResult(0.0, 0, 1.0, len(big))
    table = np.array(big, dtype=np.float64).T
    stat, p, dof, _ = _st.chi2_contingency(table, correction=False)
    return ChiSquareResult(float(stat), int(dof), float(p), len(big))
