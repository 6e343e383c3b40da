"""Coupling of in-components with marked branching trees.

The in-component of ``i`` is explored in age order. Each explored vertex with
an edge into the copied set ``J`` becomes a tree node, born at the internal
clock advanced by the lifted run's birth-time increments. Vertices with a
self-loop, with two or more edges into ``J`` (or, for joint couplings,
already explored by an earlier root) are miscoupled: they go to ``J*``, and
their extra edges into ``J`` become dummy nodes. Miscoupled nodes and dummies
get independent subtrees, and the tree then keeps evolving to
``t_target = log(n/i)/lambda``.

Random streams (all under the caller's :class:`~cbpnet.rng.Streams`):
``(STEP5, root, vertex)`` for a miscoupled vertex's subtree,
``(DUMMY, root, vertex, k)`` for the k-th dummy of a vertex (mark, then
subtree) and ``(CONTINUE, root)`` for the final evolution.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _loops
from .collapse import CollapsedGraph, generate_cbp, in_component
from .engine import DEFAULT_NODE_CAP, LiftedRun, MarkedTree, evolve_tree, grow_marked_ctbp
from .kernel import AttachmentKernel, malthusian_rate
from .outdegree import OutDegreeDistribution
from .rng import CONTINUE, DUMMY, GRAPH, ROOTS, STEP5, Streams, as_streams
from .analytics.stats import wilson_interval

NONE, MISCOUPLING, SIZE_MISMATCH = "none", "miscoupling", "size_mismatch"


@dataclass(eq=False)
class CouplingOutcome:
    root: int
    t_target: float
    s_star: float
    tree: MarkedTree
    full_tree: MarkedTree
    J: list
    J_star: list
    skipped: list
    dummy_count: int
    component_size: int
    success: bool
    failure_reason: str
    vertex_of_node: np.ndarray = field(repr=False, default=None)

    @property
    def late_dummies(self) -> int:
        return int(self.full_tree.meta.get("late_dummies", 0))

    def snapshot(self, t: float, kernel: AttachmentKernel, outdeg: OutDegreeDistribution,
                 rng: np.random.Generator, node_cap: int = DEFAULT_NODE_CAP) -> MarkedTree:
        """The coupled tree at time ``t``, evolving further when ``t`` is past
        the constructed horizon."""
        full = self.full_tree
        if t > full.horizon:
            full = evolve_tree(full, kernel, outdeg, full.horizon, t, rng, node_cap)
        return full.at(t)

    def to_dict(self, include_tree: bool = True) -> dict:
        d = {
            "root": self.root, "success": self.success, "failure_reason": self.failure_reason,
            "J": len(self.J), "J_star": len(self.J_star), "dummy_count": self.dummy_count,
            "s_star": self.s_star, "t_target": self.t_target, "component_size": self.component_size,
            "tree_size": self.tree.size,
        }
        if include_tree:
            d["tree"] = self.tree.to_dict()
        return d


class _Builder:
    """Growing tree in construction order (parents always precede children)."""

    def __init__(self, root_mark: int, root_vertex: int):
        self.parent = [-1]
        self.birth = [0.0]
        self.mark = [int(root_mark)]
        self.pslot = [-1]
        self.vertex = [root_vertex]
        self.slots = [[0] * int(root_mark)]

    def add(self, parent: int, birth: float, mark: int, slot: int, vertex: int) -> int:
        self.parent.append(parent)
        self.birth.append(birth)
        self.mark.append(int(mark))
        self.pslot.append(int(slot))
        self.vertex.append(vertex)
        self.slots.append([0] * int(mark))
        self.slots[parent][slot] += 1
        return len(self.parent) - 1

    def graft(self, a: int, sub: MarkedTree, offset: float) -> None:
        """Hang ``sub``'s descendants under node ``a`` (same mark as ``sub``'s root)."""
        base = len(self.parent) - 1
        self.slots[a] = [int(x) for x in sub.slots(0)]
        for v in range(1, sub.size):
            p = int(sub.parent[v])
            self.parent.append(a if p == 0 else base + p)
            self.birth.append(offset + float(sub.birth[v]))
            self.mark.append(int(sub.mark[v]))
            self.pslot.append(int(sub.pslot[v]))
            self.vertex.append(0)
            self.slots.append([int(x) for x in sub.slots(v)])

    def tree(self, horizon: float, capped: bool) -> MarkedTree:
        mark = np.array(self.mark, dtype=np.int64)
        slot_start = np.concatenate([[0], np.cumsum(mark)[:-1]]).astype(np.int64)
        slot_count = np.array([c for s in self.slots for c in s], dtype=np.int64)
        return MarkedTree(np.array(self.parent, dtype=np.int64), np.array(self.birth), mark,
                          np.array(self.pslot, dtype=np.int64), slot_start, slot_count, capped, horizon)


def _parent_families(run: LiftedRun) -> np.ndarray:
    fam = run.family()
    pf = np.zeros_like(fam)
    pf[2:] = fam[run.parent[2:]]
    return pf


def _check_consistent(run: LiftedRun, graph: CollapsedGraph) -> np.ndarray:
    S = np.cumsum(graph.marks)
    if run.family_prefix is None or run.family_prefix.size != S.size or np.any(run.family_prefix != S):
        raise ValueError("run and graph disagree on the family boundaries")
    if run.node_count != S[-1]:
        raise ValueError("run size does not match the graph's mark sum")
    return S


def couple_single(run: LiftedRun, graph: CollapsedGraph, i: int, lam: float, kernel: AttachmentKernel,
                  outdeg: OutDegreeDistribution, streams=None, node_cap: int = DEFAULT_NODE_CAP,
                  explored: set | None = None, _cache: dict | None = None) -> CouplingOutcome:
    """Couple the in-component of ``i`` with a marked tree.

    ``explored`` (joint couplings) holds vertices seen by earlier roots;
    such vertices are treated as miscoupled.
    """
    if not 1 <= i <= graph.n:
        raise ValueError(f"vertex {i} outside 1..{graph.n}")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    streams = as_streams(streams)
    cache = {} if _cache is None else _cache
    if "S" not in cache:
        cache["S"] = _check_consistent(run, graph)
        cache["pfam"] = _parent_families(run)
    S, pfam = cache["S"], cache["pfam"]
    sigma, parent, n = run.sigma, run.parent, graph.n
    explored = explored or set()

    comp = in_component(graph, i)
    t_target = float(np.log(n / i) / lam)
    b = _Builder(graph.marks[i], i)
    node_of = {i: 0}
    J, J_star, skipped, dummies = [], [], [], []
    s = 0.0
    kstar = i

    if graph.self_loops[i] > 0 or i in explored:
        J_star.append(i)
    else:
        J.append(i)
        in_J = {i}
        for kappa in comp.vertices[1:].tolist():
            nodes = range(S[kappa - 1] + 1, S[kappa] + 1)
            targets = [v for v in nodes if pfam[v] in in_J]
            if not targets:
                skipped.append(kappa)
                continue
            omega = targets[0]
            p = int(pfam[omega])
            s += sigma[omega] - sigma[S[kstar]]
            slot = int(parent[omega] - S[p - 1] - 1)
            node_of[kappa] = b.add(node_of[p], s, graph.marks[kappa], slot, kappa)
            if graph.self_loops[kappa] > 0 or len(targets) >= 2 or kappa in explored:
                J_star.append(kappa)
                for k, w in enumerate(targets[1:]):
                    q = int(pfam[w])
                    dummies.append((kappa, k, node_of[q], s + sigma[w] - sigma[omega],
                                    int(parent[w] - S[q - 1] - 1)))
            else:
                J.append(kappa)
                in_J.add(kappa)
            kstar = kappa

    s += sigma[S[n]] - sigma[S[kstar]]

    capped = False
    for v in J_star:
        a = node_of[v]
        sub = grow_marked_ctbp(kernel, outdeg, max(s - b.birth[a], 0.0), streams.generator(STEP5, i, v), node_cap,
                               root_mark=b.mark[a])
        capped |= sub.capped
        b.graft(a, sub, b.birth[a])
    late = 0
    for kappa, k, anchor, birth, slot in dummies:
        g = streams.generator(DUMMY, i, kappa, k)
        d = int(_loops.sample_mark(outdeg.cdf, g))
        a = b.add(anchor, birth, d, slot, 0)
        if birth > s:
            late += 1
        sub = grow_marked_ctbp(kernel, outdeg, max(s - birth, 0.0), g, node_cap, root_mark=d)
        capped |= sub.capped
        b.graft(a, sub, birth)

    full = b.tree(s, capped)
    if s < t_target:
        full = evolve_tree(full, kernel, outdeg, s, t_target, streams.generator(CONTINUE, i), node_cap)
    full.meta["late_dummies"] = late
    vertex_of_node = np.zeros(full.size, dtype=np.int64)
    vertex_of_node[: len(b.vertex)] = b.vertex
    keep = full.birth <= t_target
    keep[0] = True
    tree = full._subset(keep, t_target)
    vertex_kept = vertex_of_node[keep]

    copied = vertex_of_node[: len(b.vertex)] > 0
    all_copied_kept = bool(np.all(keep[: len(b.vertex)][copied]))
    if J_star:
        success, reason = False, MISCOUPLING
    elif tree.size != comp.size or not all_copied_kept:
        success, reason = False, SIZE_MISMATCH
    else:
        success, reason = True, NONE
        assert np.array_equal(tree.mark, graph.marks[vertex_kept]), "copied marks disagree"
    return CouplingOutcome(i, t_target, float(s), tree, full, J, J_star, skipped, len(dummies), comp.size,
                           success, reason, vertex_kept)


@dataclass(eq=False)
class JointCouplingOutcome:
    outcomes: list
    explored: set

    @property
    def success(self) -> bool:
        return all(o.success for o in self.outcomes)

    def to_dict(self, include_tree: bool = False) -> dict:
        return {"success": self.success, "explored": len(self.explored),
                "outcomes": [o.to_dict(include_tree) for o in self.outcomes]}


def couple_joint(run: LiftedRun, graph: CollapsedGraph, roots, lam: float, kernel: AttachmentKernel,
                 outdeg: OutDegreeDistribution, streams=None, node_cap: int = DEFAULT_NODE_CAP,
                 _cache: dict | None = None) -> JointCouplingOutcome:
    """Couple several roots in increasing order; vertices explored by an
    earlier root are miscoupled for later ones."""
    roots = [int(r) for r in roots]
    if len(set(roots)) != len(roots):
        raise ValueError("roots must be distinct")
    cache = {} if _cache is None else _cache
    explored: set = set()
    outs = []
    for r in sorted(roots):
        o = couple_single(run, graph, r, lam, kernel, outdeg, streams, node_cap, explored, cache)
        outs.append(o)
        explored |= set(in_component(graph, r).vertices.tolist())
    return JointCouplingOutcome(outs, explored)


@dataclass
class SuccessRate:
    n: int
    m: int
    replicas: int
    successes: int
    mean: float
    ci: tuple
    rows: list

    def to_dict(self, rows: bool = False) -> dict:
        d = {"n": self.n, "m": self.m, "replicas": self.replicas, "successes": self.successes,
             "mean": self.mean, "ci_low": self.ci[0], "ci_high": self.ci[1]}
        if rows:
            d["rows"] = self.rows
        return d


def draw_roots(streams: Streams, n: int, m: int) -> list[int]:
    """Uniform roots with replacement, one draw at a time, so the first ``m``
    roots do not depend on how many are drawn."""
    g = streams.generator(ROOTS)
    return [int(g.integers(1, n + 1)) for _ in range(m)]


def replica_graph(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, n: int, streams: Streams):
    return generate_cbp(kernel, outdeg, n, streams.generator(GRAPH))


def _replica(args) -> dict:
    kernel, outdeg, n, m, seed, r, lam, node_cap = args
    st = Streams(seed).child(r)
    run, graph = replica_graph(kernel, outdeg, n, st)
    roots = draw_roots(st, n, m)
    row = {"replica": r, "roots": roots}
    if len(set(roots)) < len(roots):
        row.update(success=False, failure_reason="duplicate_roots")
        return row
    out = couple_joint(run, graph, roots, lam, kernel, outdeg, st.child("couple"), node_cap)
    row["success"] = out.success
    row["failure_reason"] = next((o.failure_reason for o in out.outcomes if not o.success), NONE)
    row["outcomes"] = [o.to_dict(include_tree=False) for o in out.outcomes]
    return row


def coupling_success_rate(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, n: int, m: int,
                          replicas: int, seed: int = 0, lam: float | None = None, workers: int = 1,
                          node_cap: int = DEFAULT_NODE_CAP) -> SuccessRate:
    """Fraction of replicas whose ``m`` uniform roots all couple.

    Replica ``r`` uses streams ``(seed, r)``: the graph, the roots and the
    coupling randomness are the same for every ``m`` and every worker count.
    Repeated roots count as a failure.
    """
    if replicas < 1 or m < 1 or n < 1:
        raise ValueError("need replicas, m and n >= 1")
    lam = malthusian_rate(kernel).lam if lam is None else float(lam)
    jobs = [(kernel, outdeg, n, m, seed, r, lam, node_cap) for r in range(replicas)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_replica, jobs, chunksize=max(1, replicas // (4 * workers))))
    else:
        rows = [_replica(j) for j in jobs]
    k = sum(bool(r["success"]) for r in rows)
    return SuccessRate(n, m, replicas, k, k / replicas, wilson_interval(k, replicas), rows)
