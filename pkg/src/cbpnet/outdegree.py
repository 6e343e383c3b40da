"""Out-degree (mark) distributions on the positive integers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DistributionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OutDegreeDistribution:
    """Tabulated pmf ``h(1..K)``; heavy tails are truncated at ``K`` and renormalized."""

    pmf: np.ndarray
    gamma: float | None = None
    truncation: int | None = None
    name: str = "table"

    def __post_init__(self):
        h = np.asarray(self.pmf, dtype=np.float64)
        if h.ndim != 1 or h.size == 0:
            raise DistributionError("pmf must be a nonempty 1-d table over 1..K")
        if np.any(h < 0) or not np.all(np.isfinite(h)):
            raise DistributionError("pmf entries must be finite and nonnegative")
        if abs(h.sum() - 1.0) > 1e-12:
            raise DistributionError(f"pmf sums to {h.sum()!r}, not 1")
        nz = np.flatnonzero(h)
        h = h[: nz[-1] + 1].copy()
        h.setflags(write=False)
        object.__setattr__(self, "pmf", h)
        cdf = np.cumsum(h)
        cdf[-1] = 1.0
        cdf.setflags(write=False)
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def point(cls, d: int) -> "OutDegreeDistribution":
        if d < 1:
            raise DistributionError("out-degrees are positive integers")
        h = np.zeros(d)
        h[-1] = 1.0
        return cls(h, name=f"point({d})")

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "OutDegreeDistribution":
        if not 1 <= lo <= hi:
            raise DistributionError("need 1 <= lo <= hi")
        h = np.zeros(hi)
        h[lo - 1:] = 1.0 / (hi - lo + 1)
        return cls(h / h.sum(), name=f"uniform({lo},{hi})")

    @classmethod
    def table(cls, probs) -> "OutDegreeDistribution":
        """From a list over 1..K or a ``{d: prob}`` mapping; normalized."""
        if isinstance(probs, dict):
            K = max(int(k) for k in probs)
            h = np.zeros(K)
            for k, p in probs.items():
                if int(k) < 1:
                    raise DistributionError("out-degrees are positive integers")
                h[int(k) - 1] = float(p)
        else:
            h = np.asarray(probs, dtype=np.float64)
        total = h.sum()
        if not total > 0:
            raise DistributionError("pmf has no mass")
        return cls(h / total)

    @classmethod
    def zeta(cls, gamma: float, truncation: int = 10**6) -> "OutDegreeDistribution":
        """``h(d) proportional to d**-gamma`` on ``1..truncation``."""
        if not gamma > 1:
            raise DistributionError("zeta-like pmf needs gamma > 1")
        if truncation < 1:
            raise DistributionError("truncation must be >= 1")
        d = np.arange(1, truncation + 1, dtype=np.float64)
        w = d ** (-gamma)
        return cls(w / w.sum(), gamma=float(gamma), truncation=int(truncation), name=f"zeta({gamma:g})")

    @property
    def cdf(self) -> np.ndarray:
        return self._cdf

    @property
    def support_max(self) -> int:
        return int(self.pmf.size)

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.pmf.size + 1), self.pmf))

    def prob(self, d: int) -> float:
        return float(self.pmf[d - 1]) if 1 <= d <= self.pmf.size else 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right")
        return np.minimum(idx, self.pmf.size - 1).astype(np.int64) + 1

    def to_dict(self) -> dict:
        if self.gamma is not None:
            return {"gamma": self.gamma, "truncation": self.truncation}
        return {"pmf": [float(p) for p in self.pmf]}

    @classmethod
    def from_dict(cls, d: dict) -> "OutDegreeDistribution":
        if "gamma" in d:
            return cls.zeta(float(d["gamma"]), int(d.get("truncation", 10**6)))
        if "point" in d:
            return cls.point(int(d["point"]))
        if "uniform" in d:
            lo, hi = d["uniform"]
            return cls.uniform(int(lo), int(hi))
        if "pmf" in d:
            return cls.table(d["pmf"])
        raise DistributionError("out-degree config needs one of: pmf, point, uniform, gamma")

    def __repr__(self):
        return f"OutDegreeDistribution({self.name}, mean={self.mean:.6g})"
