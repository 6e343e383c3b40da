"""Attachment functions, the reproduction Laplace series and the Malthusian rate.

A kernel is stored as a finite table ``f(1..K)`` plus an affine extension
``f(k) = tail_slope * k + tail_offset`` for ``k > K``. Linear and constant
kernels have an empty table; custom kernels carry a table and a declared growth
class that fixes the extension:

* ``"bounded"``  -- ``f(k) = f(K)`` for ``k > K``
* ``"linear"``   -- ``f(k) = f(K) + slope * (k - K)`` for ``k > K``
* ``None``       -- no extension; evaluation past ``K`` raises and the series is
  reported as uncertified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DEFAULT_TOL = 1e-10
_EXPLICIT_TERMS = 4096


class KernelError(ValueError):
    """Invalid attachment function or an out-of-domain evaluation."""


class UncertifiedError(KernelError):
    """The series tail cannot be bounded for this kernel."""


class NoMalthusianRoot(KernelError):
    pass


@dataclass(frozen=True, eq=False)
class AttachmentKernel:
    family: str
    slope: float = 0.0
    offset: float = 0.0
    values: np.ndarray | None = None
    growth: str | None = None
    growth_slope: float = 0.0
    C_f: float = field(default=float("nan"))
    f_star: float = field(default=float("nan"))

    def __post_init__(self):
        if self.family not in ("linear", "constant", "custom"):
            raise KernelError(f"unknown kernel family {self.family!r}")
        if self.family == "linear":
            if self.slope < 0:
                raise KernelError("linear kernel needs slope c >= 0")
            if self.slope + self.offset <= 0:
                raise KernelError("linear kernel needs c + beta > 0")
        elif self.family == "constant":
            if self.offset <= 0:
                raise KernelError("constant kernel needs beta > 0")
        else:
            vals = np.asarray(self.values, dtype=np.float64)
            if vals.ndim != 1 or vals.size == 0:
                raise KernelError("custom kernel needs a nonempty table f(1..K)")
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                bad = int(np.argmax(~(vals > 0))) + 1
                raise KernelError(f"custom kernel is not positive at k={bad}")
            if self.growth not in (None, "bounded", "linear"):
                raise KernelError(f"unknown growth class {self.growth!r}")
            if self.growth == "linear" and self.growth_slope < 0:
                raise KernelError("asymptotically linear growth needs slope >= 0")
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)
        if math.isnan(self.C_f):
            object.__setattr__(self, "C_f", self._default_cf())
        if math.isnan(self.f_star):
            object.__setattr__(self, "f_star", self._default_fstar())
        if not (self.C_f > 0 and self.f_star > 0):
            raise KernelError("C_f and f_star must be positive")

    # constructors -------------------------------------------------------
    @classmethod
    def linear(cls, c: float, beta: float = 0.0, **kw) -> "AttachmentKernel":
        return cls("linear", slope=float(c), offset=float(beta), **kw)

    @classmethod
    def constant(cls, beta: float, **kw) -> "AttachmentKernel":
        return cls("constant", slope=0.0, offset=float(beta), **kw)

    @classmethod
    def custom(
        cls,
        f: Sequence[float] | Callable[[int], float],
        growth: str | None = None,
        slope: float = 0.0,
        table_size: int = 1000,
        **kw,
    ) -> "AttachmentKernel":
        """Custom kernel from a table ``f(1..K)`` or a callable tabulated on ``1..table_size``."""
        if callable(f):
            vals = np.array([float(f(k)) for k in range(1, table_size + 1)])
        else:
            vals = np.asarray(f, dtype=np.float64)
        return cls("custom", values=vals, growth=growth, growth_slope=float(slope), **kw)

    # numeric form ---------------------------------------------------------
    def arrays(self) -> tuple[np.ndarray, float, float]:
        """``(table, tail_slope, tail_offset)``; the tail is NaN when undeclared."""
        if self.family != "custom":
            return np.empty(0), float(self.slope), float(self.offset)
        K = self.values.size
        last = float(self.values[-1])
        if self.growth == "bounded":
            return self.values, 0.0, last
        if self.growth == "linear":
            return self.values, self.growth_slope, last - self.growth_slope * K
        return self.values, float("nan"), float("nan")

    @property
    def table_size(self) -> int:
        return 0 if self.values is None else int(self.values.size)

    @property
    def certified(self) -> bool:
        return self.family != "custom" or self.growth is not None

    @property
    def domain_edge(self) -> float | None:
        """Infimum of the convergence domain of the Laplace series, if known."""
        if not self.certified:
            return None
        _, s, _ = self.arrays()
        return float(s)

    def __call__(self, k: int) -> float:
        return eval_kernel(self, k)

    def evaluate(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        if np.any(ks < 1):
            raise KernelError("attachment function is defined for k >= 1")
        table, s, o = self.arrays()
        K = table.size
        out = np.empty(ks.shape)
        inside = ks <= K
        out[inside] = table[ks[inside] - 1]
        out[~inside] = s * ks[~inside] + o
        if np.any(~np.isfinite(out)):
            raise UncertifiedError(f"custom kernel has no declared growth beyond k={K}")
        return out

    def _default_cf(self) -> float:
        if self.family == "linear":
            return self.slope + max(self.offset, 0.0)
        if self.family == "constant":
            return self.offset
        table, s, o = self.arrays()
        ks = np.arange(1, table.size + 1)
        cf = float(np.max(table / ks))
        if self.growth is not None:
            cf = max(cf, s, s + max(o, 0.0) / (table.size + 1))
        return cf

    def _default_fstar(self) -> float:
        if self.family == "linear":
            return self.slope + self.offset
        if self.family == "constant":
            return self.offset
        table, s, o = self.arrays()
        fs = float(np.min(table))
        if self.growth is not None:
            fs = min(fs, s * (table.size + 1) + o)
        return fs

    # serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        if self.family == "linear":
            return {"family": "linear", "slope": self.slope, "offset": self.offset}
        if self.family == "constant":
            return {"family": "constant", "offset": self.offset}
        d = {"family": "custom", "values": [float(v) for v in self.values], "growth": self.growth}
        if self.growth == "linear":
            d["slope"] = self.growth_slope
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AttachmentKernel":
        fam = d.get("family")
        extra = {k: float(d[k]) for k in ("C_f", "f_star") if k in d}
        if fam == "linear":
            return cls.linear(float(d.get("slope", 1.0)), float(d.get("offset", 0.0)), **extra)
        if fam == "constant":
            beta = d.get("offset", d.get("beta"))
            if beta is None:
                raise KernelError("constant kernel needs 'offset'")
            return cls.constant(float(beta), **extra)
        if fam == "custom":
            if "values" not in d:
                raise KernelError("custom kernel needs tabulated 'values'")
            return cls.custom(d["values"], growth=d.get("growth"), slope=float(d.get("slope", 0.0)), **extra)
        raise KernelError(f"unknown kernel family {fam!r}")

    def __repr__(self):
        if self.family == "linear":
            return f"AttachmentKernel.linear({self.slope:g}, {self.offset:g})"
        if self.family == "constant":
            return f"AttachmentKernel.constant({self.offset:g})"
        return f"AttachmentKernel.custom(<{self.table_size} values>, growth={self.growth!r})"


def eval_kernel(kernel: AttachmentKernel, k: int) -> float:
    if int(k) != k or k < 1:
        raise KernelError("attachment function is defined for integers k >= 1")
    return float(kernel.evaluate([int(k)])[0])


@dataclass(frozen=True)
class RhoEvaluation:
    """Value of ``sum_n prod_{i<=n} f(i) / (theta + f(i))``.

    ``value`` is the explicit partial sum over ``truncation_index`` terms plus
    ``tail``, the remaining terms summed in closed form from the declared
    extension. ``remainder_bound`` bounds the error of ``value``.
    """

    theta: float
    value: float
    truncation_index: int
    remainder_bound: float
    tail: float = 0.0
    divergent: bool = False
    certified: bool = True


def rho_hat(kernel: AttachmentKernel, theta: float, eps: float = 1e-13) -> RhoEvaluation:
    if not theta > 0:
        raise KernelError("theta must be positive")
    if not eps > 0:
        raise KernelError("eps must be positive")
    table, s, o = kernel.arrays()
    K = table.size
    certified = kernel.certified
    if certified and s > 0 and theta <= s:
        return RhoEvaluation(theta, math.inf, 0, 0.0, math.inf, divergent=True)

    n_extra = _EXPLICIT_TERMS if certified else 0
    ks = np.arange(1, K + n_extra + 1, dtype=np.int64)
    f = np.concatenate([table, s * ks[K:] + o]) if n_extra else table
    logs = np.cumsum(-np.log1p(theta / f))
    terms = np.exp(logs)
    partial = math.fsum(terms)
    N = int(ks.size)
    if not certified:
        return RhoEvaluation(theta, partial, N, math.inf, 0.0, certified=False)

    last = float(terms[-1])
    if s == 0:
        # f(k) = o beyond the table: geometric tail with ratio o / (theta + o)
        tail = last * o / theta
    else:
        # prod (i + b) / (i + b + a) tail, summed with Gauss's 2F1(.; 1) identity
        a, b = theta / s, o / s
        tail = last * (N + 1 + b) / (a - 1.0)
    value = partial + tail
    rounding = 4.0 * np.finfo(float).eps * (N + 8) * value
    return RhoEvaluation(theta, value, N, float(rounding), float(tail))


@dataclass(frozen=True)
class MalthusianResult:
    lam: float
    residual: float
    bracket: tuple[float, float]
    evaluations: int = 0

    @property
    def lambda_(self) -> float:
        return self.lam


def malthusian_rate(kernel: AttachmentKernel, tol: float = DEFAULT_TOL, xtol: float = 1e-14) -> MalthusianResult:
    """Root of ``rho_hat(theta) = 1`` by doubling bracket expansion and bisection."""
    if not kernel.certified:
        raise UncertifiedError("custom kernel without a declared growth class has no certified series")
    count = 0

    def g(theta):
        nonlocal count
        count += 1
        ev = rho_hat(kernel, theta, eps=tol * 1e-3)
        return math.inf if ev.divergent else ev.value

    lo, hi = kernel.f_star / 2.0, 2.0 * kernel.C_f
    for _ in range(200):
        if g(lo) > 1.0:
            break
        lo /= 2.0
    else:
        raise NoMalthusianRoot("series stays at or below 1 on the whole certified domain")
    for _ in range(200):
        if g(hi) < 1.0:
            break
        hi *= 2.0
    else:
        raise NoMalthusianRoot("series does not drop below 1")

    mid, val = hi, g(hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if val > 1.0:
            lo = mid
        else:
            hi = mid
        if abs(val - 1.0) <= tol and hi - lo <= xtol * max(1.0, hi):
            break
    if abs(val - 1.0) > tol:
        raise NoMalthusianRoot(f"bisection stalled with residual {val - 1.0:.3e}")
    return MalthusianResult(mid, val - 1.0, (lo, hi), count)


@dataclass
class AssumptionReport:
    check_bound: int
    linear_domination: bool
    linear_domination_failure: int | None
    positive_infimum: bool
    positive_infimum_failure: int | None
    C_f: float
    f_star: float
    lam: float | None = None
    residual: float | None = None
    domain_edge: float | None = None
    certified: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.linear_domination and self.positive_infimum and self.lam is not None

    def to_dict(self) -> dict:
        return {
            "check_bound": self.check_bound,
            "ii_linear_domination": self.linear_domination,
            "ii_first_failure": self.linear_domination_failure,
            "iii_positive_infimum": self.positive_infimum,
            "iii_first_failure": self.positive_infimum_failure,
            "C_f": self.C_f,
            "f_star": self.f_star,
            "lambda": self.lam,
            "residual": self.residual,
            "domain_edge": self.domain_edge,
            "certified": self.certified,
            "notes": list(self.notes),
        }


def validate_assumptions(kernel: AttachmentKernel, check_bound: int = 10_000) -> AssumptionReport:
    if check_bound < 1:
        raise ValueError("check_bound must be >= 1")
    notes = []
    bound = check_bound
    if not kernel.certified and check_bound > kernel.table_size:
        bound = kernel.table_size
        notes.append(f"checks stop at the table end k={bound}; no growth class declared")
    ks = np.arange(1, bound + 1)
    f = kernel.evaluate(ks)
    bad_ii = np.flatnonzero(f > kernel.C_f * ks * (1 + 1e-12))
    bad_iii = np.flatnonzero(f < kernel.f_star * (1 - 1e-12))
    rep = AssumptionReport(
        check_bound=check_bound,
        linear_domination=bad_ii.size == 0,
        linear_domination_failure=int(ks[bad_ii[0]]) if bad_ii.size else None,
        positive_infimum=bad_iii.size == 0,
        positive_infimum_failure=int(ks[bad_iii[0]]) if bad_iii.size else None,
        C_f=kernel.C_f,
        f_star=kernel.f_star,
        domain_edge=kernel.domain_edge,
        certified=kernel.certified,
        notes=notes,
    )
    try:
        res = malthusian_rate(kernel)
        rep.lam, rep.residual = res.lam, res.residual
    except KernelError as exc:
        notes.append(str(exc))
    return rep
