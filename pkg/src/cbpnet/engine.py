"""Pure birth processes, the base (lifted) branching process and marked trees."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _loops
from .kernel import AttachmentKernel
from .outdegree import OutDegreeDistribution

DEFAULT_NODE_CAP = 1_000_000


def _kernel_args(kernel: AttachmentKernel):
    table, s, o = kernel.arrays()
    return np.ascontiguousarray(table, dtype=np.float64), float(s), float(o)


def simulate_pure_birth(kernel: AttachmentKernel, rng: np.random.Generator,
                        t_max: float = np.inf, n_max: int | None = None) -> np.ndarray:
    """Event times ``tau_1 < tau_2 < ...`` of a pure birth process with rates f(1), f(2), ..."""
    if not np.isfinite(t_max) and n_max is None:
        raise ValueError("horizon must be finite: give t_max or n_max")
    n = np.iinfo(np.int64).max if n_max is None else int(n_max)
    return _loops.pure_birth_times(*_kernel_args(kernel), float(t_max), n, rng)


def pure_birth_counts(kernel: AttachmentKernel, horizons, rng: np.random.Generator) -> np.ndarray:
    """Counts at the given horizons for independent replicas (one per horizon)."""
    h = np.ascontiguousarray(horizons, dtype=np.float64)
    return _loops.pure_birth_counts(*_kernel_args(kernel), h, rng)


class WeightedIndex:
    """Prefix-sum tree over nonnegative weights with O(log n) update and sampling."""

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("size must be >= 1")
        self._tree = np.zeros(size + 1)
        self._w = np.zeros(size + 1)
        self.total = 0.0

    def __len__(self):
        return self._tree.size - 1

    def set(self, i: int, w: float) -> None:
        if w < 0:
            raise ValueError("weights must be nonnegative")
        delta = w - self._w[i]
        self._w[i] = w
        _loops.fenwick_add(self._tree, i, delta)
        self.total += delta

    def weight(self, i: int) -> float:
        return float(self._w[i])

    def prefix(self, i: int) -> float:
        return float(_loops.fenwick_prefix(self._tree, i))

    def find(self, u: float) -> int:
        """Smallest index whose prefix weight exceeds ``u``."""
        return int(_loops.fenwick_find(self._tree, u))

    def sample(self, rng: np.random.Generator) -> int:
        return min(self.find(rng.random() * self.total), len(self))


@dataclass(frozen=True, eq=False)
class LiftedRun:
    """Realization of the base process; arrays are 1-based (index 0 unused)."""

    kernel: AttachmentKernel
    sigma: np.ndarray
    parent: np.ndarray
    in_degree: np.ndarray
    family_prefix: np.ndarray | None = None
    rng_seed: object = None

    @property
    def node_count(self) -> int:
        return int(self.sigma.size - 1)

    def family(self) -> np.ndarray:
        """Vertex label of every node (1-based; index 0 is 0)."""
        if self.family_prefix is None:
            raise ValueError("run has no family prefix")
        fam = np.zeros(self.node_count + 1, dtype=np.int64)
        fam[1:] = np.searchsorted(self.family_prefix, np.arange(1, self.node_count + 1), side="left")
        return fam

    def to_dict(self) -> dict:
        fam = self.family() if self.family_prefix is not None else None
        marks = np.diff(self.family_prefix) if self.family_prefix is not None else None
        nodes = []
        for v in range(1, self.node_count + 1):
            row = {"index": v, "parent": int(self.parent[v]) or None, "sigma": float(self.sigma[v])}
            if fam is not None:
                row["family"] = int(fam[v])
                row["mark"] = int(marks[fam[v] - 1])
            nodes.append(row)
        return {"node_count": self.node_count, "rng_seed": self.rng_seed, "nodes": nodes}


def grow_lifted_run(kernel: AttachmentKernel, total_nodes: int, family_prefix=None,
                    rng: np.random.Generator | None = None, rng_seed=None) -> LiftedRun:
    if total_nodes < 1:
        raise ValueError("total_nodes must be >= 1")
    if family_prefix is not None:
        family_prefix = np.asarray(family_prefix, dtype=np.int64)
        if family_prefix[-1] != total_nodes:
            raise ValueError("family prefix must end at total_nodes")
    if rng is None:
        rng = np.random.default_rng(rng_seed)
    sigma, parent, indeg = _loops.grow_lifted(*_kernel_args(kernel), int(total_nodes), rng)
    for a in (sigma, parent, indeg):
        a.setflags(write=False)
    return LiftedRun(kernel, sigma, parent, indeg, family_prefix, rng_seed)


@dataclass(eq=False)
class MarkedTree:
    """Rooted tree in arrival order (node 0 is the root, parents precede children).

    Node ``v`` has ``mark[v]`` reproduction slots; ``pslot[v]`` is the slot of
    its parent that produced it and ``slot_count[slot_start[u] + j]`` counts the
    children from slot ``j`` of ``u``.
    """

    parent: np.ndarray
    birth: np.ndarray
    mark: np.ndarray
    pslot: np.ndarray
    slot_start: np.ndarray
    slot_count: np.ndarray
    capped: bool = False
    horizon: float = 0.0
    meta: dict = field(default_factory=dict)

    @classmethod
    def root_only(cls, mark: int, horizon: float = 0.0) -> "MarkedTree":
        return cls(np.array([-1]), np.array([0.0]), np.array([int(mark)]), np.array([-1]),
                   np.array([0]), np.zeros(int(mark), dtype=np.int64), False, horizon)

    @property
    def size(self) -> int:
        return int(self.parent.size)

    def __len__(self):
        return self.size

    @property
    def root_children(self) -> int:
        return int(np.count_nonzero(self.parent == 0))

    @property
    def mark_sum(self) -> int:
        return int(self.mark.sum())

    @property
    def Lambda(self) -> int:
        """Node count plus mark sum."""
        return self.size + self.mark_sum

    def children(self, v: int) -> np.ndarray:
        kids = np.flatnonzero(self.parent == v)
        order = np.lexsort((kids, self.birth[kids]))
        return kids[order]

    def slots(self, v: int) -> np.ndarray:
        s = self.slot_start[v]
        return self.slot_count[s:s + self.mark[v]]

    def at(self, t: float) -> "MarkedTree":
        """The tree restricted to nodes born by time ``t``."""
        keep = self.birth <= t
        keep[0] = True
        return self._subset(keep, horizon=min(t, self.horizon) if self.horizon else t)

    def _subset(self, keep: np.ndarray, horizon: float) -> "MarkedTree":
        idx = np.flatnonzero(keep)
        remap = -np.ones(self.size, dtype=np.int64)
        remap[idx] = np.arange(idx.size)
        parent = np.where(self.parent[idx] >= 0, remap[np.maximum(self.parent[idx], 0)], -1)
        mark = self.mark[idx].copy()
        slot_start = np.concatenate([[0], np.cumsum(mark)[:-1]]).astype(np.int64)
        slot_count = np.zeros(int(mark.sum()), dtype=np.int64)
        pslot = self.pslot[idx].copy()
        for c in range(1, idx.size):
            slot_count[slot_start[parent[c]] + pslot[c]] += 1
        return MarkedTree(parent, self.birth[idx].copy(), mark, pslot, slot_start, slot_count,
                          self.capped, horizon, dict(self.meta))

    def normalized(self) -> "MarkedTree":
        """Same tree with nodes renumbered in birth order (ties by old index)."""
        order = np.lexsort((np.arange(self.size), self.birth))
        if order[0] != 0:
            raise ValueError("root must be born first")
        inv = np.empty(self.size, dtype=np.int64)
        inv[order] = np.arange(self.size)
        parent = np.where(self.parent[order] >= 0, inv[np.maximum(self.parent[order], 0)], -1)
        mark = self.mark[order]
        slot_start = np.concatenate([[0], np.cumsum(mark)[:-1]]).astype(np.int64)
        slot_count = np.concatenate([self.slots(v) for v in order]).astype(np.int64) if self.size else np.zeros(0, np.int64)
        return MarkedTree(parent, self.birth[order], mark, self.pslot[order], slot_start,
                          slot_count, self.capped, self.horizon, dict(self.meta))

    def addresses(self) -> list[tuple[int, ...]]:
        """Ulam-Harris labels: the root is ``()``, ``a + (k,)`` is the k-th child of ``a``."""
        addr: list[tuple[int, ...] | None] = [None] * self.size
        addr[0] = ()
        order = np.lexsort((np.arange(self.size), self.birth))
        rank = np.zeros(self.size, dtype=np.int64)
        for v in order:
            p = self.parent[v]
            if p < 0:
                continue
            rank[p] += 1
            addr[v] = addr[p] + (int(rank[p]),)
        return addr

    def pagerank(self, c: float) -> np.ndarray:
        t = self if np.all(self.parent[1:] < np.arange(1, self.size)) else self.normalized()
        return _loops.tree_pagerank(np.ascontiguousarray(t.parent), np.ascontiguousarray(t.mark), float(c))

    def to_multigraph(self):
        from .analytics.isomorphism import RootedMultigraph

        return RootedMultigraph.from_tree(self.parent, self.mark)

    def to_dict(self) -> dict:
        addr = self.addresses()
        return {
            "size": self.size,
            "capped": bool(self.capped),
            "horizon": float(self.horizon),
            "nodes": [
                {"address": list(addr[v]), "mark": int(self.mark[v]), "birth_time": float(self.birth[v])}
                for v in range(self.size)
            ],
        }


def _tree_from_arrays(out, horizon) -> MarkedTree:
    parent, birth, mark, pslot, slot_start, slot_count, capped = out
    return MarkedTree(parent, birth, mark, pslot, slot_start, slot_count, bool(capped), float(horizon))


def grow_marked_ctbp(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, horizon: float,
                     rng: np.random.Generator, node_cap: int = DEFAULT_NODE_CAP,
                     root_mark: int | None = None) -> MarkedTree:
    """Marked branching process from a root born at 0, run to ``horizon``.

    The root's mark is drawn from ``outdeg`` (first draw) unless ``root_mark``
    is given. A node with mark d reproduces through d independent slots.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if node_cap < 1:
        raise ValueError("node_cap must be >= 1")
    d = int(root_mark) if root_mark is not None else int(_loops.sample_mark(outdeg.cdf, rng))
    out = _loops.grow_from_root(d, float(horizon), outdeg.cdf, *_kernel_args(kernel), int(node_cap), rng)
    return _tree_from_arrays(out, horizon)


def evolve_tree(tree: MarkedTree, kernel: AttachmentKernel, outdeg: OutDegreeDistribution,
                t_from: float, t_to: float, rng: np.random.Generator,
                node_cap: int = DEFAULT_NODE_CAP) -> MarkedTree:
    """Continue a tree from its state at ``t_from`` to ``t_to`` (memoryless restart)."""
    if t_to < t_from:
        return tree
    out = _loops.evolve(
        np.ascontiguousarray(tree.parent, dtype=np.int64), np.ascontiguousarray(tree.birth, dtype=np.float64),
        np.ascontiguousarray(tree.mark, dtype=np.int64), np.ascontiguousarray(tree.pslot, dtype=np.int64),
        np.ascontiguousarray(tree.slot_start, dtype=np.int64), np.array(tree.slot_count, dtype=np.int64),
        tree.size, float(t_from), float(t_to), outdeg.cdf, *_kernel_args(kernel), int(node_cap), rng)
    new = _tree_from_arrays(out, max(t_to, tree.horizon))
    new.capped = new.capped or tree.capped
    new.meta = dict(tree.meta)
    return new
