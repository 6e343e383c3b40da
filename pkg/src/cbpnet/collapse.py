"""Out-degree sampling, collapsing a lifted run into a multigraph, in-components."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .engine import LiftedRun, grow_lifted_run
from .kernel import AttachmentKernel
from .outdegree import OutDegreeDistribution


def sample_out_degrees(dist: OutDegreeDistribution, n: int, rng: np.random.Generator):
    """i.i.d. marks ``D[1..n]`` (index 0 unused) and prefix sums ``S[0..n]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    D = np.zeros(n + 1, dtype=np.int64)
    D[1:] = dist.sample(rng, n)
    S = np.cumsum(D)
    return D, S


@dataclass(frozen=True, eq=False)
class CollapsedGraph:
    """Directed multigraph on ``1..n``; edges sorted by (src, dst) with multiplicities.

    Arrays indexed by vertex are 1-based with index 0 unused.
    """

    n: int
    marks: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    mult: np.ndarray
    root_loop: bool = True

    def __post_init__(self):
        n = self.n
        loops = np.zeros(n + 1, dtype=np.int64)
        is_loop = self.src == self.dst
        loops[self.src[is_loop]] = self.mult[is_loop]
        indeg = np.bincount(self.dst, weights=self.mult, minlength=n + 1).astype(np.int64)
        outdeg = np.bincount(self.src, weights=self.mult, minlength=n + 1).astype(np.int64)
        # reverse adjacency (CSR keyed by destination)
        order = np.lexsort((self.src, self.dst))
        rptr = np.zeros(n + 2, dtype=np.int64)
        np.add.at(rptr, self.dst + 1, 1)
        rptr = np.cumsum(rptr)
        for name, val in (("self_loops", loops), ("in_degree", indeg), ("out_degree", outdeg),
                          ("_rev_order", order), ("_rev_ptr", rptr)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def S(self) -> np.ndarray:
        return np.cumsum(self.marks)

    @property
    def edge_count(self) -> int:
        return int(self.mult.sum())

    def edges(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): int(m) for a, b, m in zip(self.src, self.dst, self.mult)}

    def multiplicity(self, u: int, v: int) -> int:
        lo = np.searchsorted(self.src, u, side="left")
        hi = np.searchsorted(self.src, u, side="right")
        k = lo + np.searchsorted(self.dst[lo:hi], v)
        return int(self.mult[k]) if k < hi and self.dst[k] == v else 0

    def in_edges(self, v: int):
        """(sources, multiplicities) of edges into ``v``, sources ascending."""
        idx = self._rev_order[self._rev_ptr[v]:self._rev_ptr[v + 1]]
        return self.src[idx], self.mult[idx]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "vertices": [{"id": i, "out_degree": int(self.out_degree[i])} for i in range(1, self.n + 1)],
            "edges": [{"src": int(a), "dst": int(b), "mult": int(m)}
                      for a, b, m in zip(self.src, self.dst, self.mult)],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict, root_loop: bool = True) -> "CollapsedGraph":
        n = int(d["n"])
        marks = np.zeros(n + 1, dtype=np.int64)
        for v in d["vertices"]:
            marks[int(v["id"])] = int(v["out_degree"])
        return cls.from_edges(n, marks, {(e["src"], e["dst"]): e["mult"] for e in d["edges"]}, root_loop)

    @classmethod
    def from_edges(cls, n: int, marks, edges, root_loop: bool = True) -> "CollapsedGraph":
        """Build from a ``{(src, dst): mult}`` mapping (or iterable of pairs, one per edge)."""
        if not isinstance(edges, dict):
            edges = Counter((int(a), int(b)) for a, b in edges)
        keys = sorted((int(a), int(b)) for (a, b), m in edges.items() if m > 0)
        for a, b in keys:
            if not (1 <= a <= n and 1 <= b <= n):
                raise ValueError(f"edge ({a}, {b}) outside 1..{n}")
        src = np.array([k[0] for k in keys], dtype=np.int64)
        dst = np.array([k[1] for k in keys], dtype=np.int64)
        mult = np.array([int(edges[k]) for k in keys], dtype=np.int64)
        marks = np.asarray(marks, dtype=np.int64)
        if marks.size == n:
            marks = np.concatenate([[0], marks])
        return cls(n, marks, src, dst, mult, root_loop)

    def to_dot(self) -> str:
        if self.n > 200:
            raise ValueError("DOT export is limited to n <= 200")
        lines = ["digraph G {"]
        for i in range(1, self.n + 1):
            lines.append(f'  {i} [label="{i} (D={int(self.marks[i])})"];')
        for a, b, m in zip(self.src, self.dst, self.mult):
            lab = f' [label="x{int(m)}"]' if m > 1 else ""
            lines.append(f"  {int(a)} -> {int(b)}{lab};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def collapse_run(run: LiftedRun, D, S=None, root_loop: bool = True) -> CollapsedGraph:
    """Merge each family ``V(i) = S[i-1]+1 .. S[i]`` into vertex ``i``.

    With ``root_loop`` the parentless root node contributes a self-loop at
    vertex 1, so every vertex has out-degree exactly ``D[i]``.
    """
    D = np.asarray(D, dtype=np.int64)
    S = np.cumsum(D) if S is None else np.asarray(S, dtype=np.int64)
    n = D.size - 1
    if S.size != n + 1 or S[0] != 0 or np.any(np.diff(S) != D[1:]):
        raise ValueError("S must be the prefix sums of D (with S[0] = 0)")
    if run.node_count != S[-1]:
        raise ValueError(f"run has {run.node_count} nodes, families need {int(S[-1])}")
    fam = np.searchsorted(S, np.arange(1, S[-1] + 1), side="left")
    par = run.parent[1:]
    has_parent = par > 0
    src = fam[has_parent]
    dst = fam[par[has_parent] - 1]
    if root_loop:
        src = np.concatenate([[1], src])
        dst = np.concatenate([[1], dst])
    key = src * (n + 1) + dst
    uniq, mult = np.unique(key, return_counts=True)
    return CollapsedGraph(n, D.copy(), uniq // (n + 1), uniq % (n + 1), mult.astype(np.int64), root_loop)


def generate_cbp(kernel: AttachmentKernel, outdeg: OutDegreeDistribution, n: int,
                 rng: np.random.Generator, root_loop: bool = True):
    """Sample marks and a lifted run and collapse. Draw order: marks, then the run."""
    D, S = sample_out_degrees(outdeg, n, rng)
    run = grow_lifted_run(kernel, int(S[-1]), family_prefix=S, rng=rng)
    return run, collapse_run(run, D, S, root_loop)


@dataclass(frozen=True, eq=False)
class InComponent:
    """Vertices with a directed path to ``root``; ``vertices`` is in age (label) order."""

    root: int
    vertices: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    mult: np.ndarray
    marks: np.ndarray
    truncated: bool = False

    @property
    def size(self) -> int:
        return int(self.vertices.size)

    def edges(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): int(m) for a, b, m in zip(self.src, self.dst, self.mult)}

    def to_multigraph(self):
        from .analytics.isomorphism import RootedMultigraph

        return RootedMultigraph.from_component(self)


def in_component(graph: CollapsedGraph, i: int, max_size: int | None = None) -> InComponent:
    """Breadth-first search along reversed edges from ``i``.

    With ``max_size`` the search stops once more than ``max_size`` vertices
    are found and the result is flagged ``truncated`` (its edges are then
    incomplete).
    """
    if not 1 <= i <= graph.n:
        raise ValueError(f"vertex {i} outside 1..{graph.n}")
    seen = {i}
    queue = [i]
    head = 0
    truncated = False
    while head < len(queue):
        v = queue[head]
        head += 1
        srcs, _ = graph.in_edges(v)
        for u in srcs.tolist():
            if u not in seen:
                seen.add(u)
                queue.append(u)
        if max_size is not None and len(seen) > max_size:
            truncated = True
            break
    verts = np.array(sorted(seen), dtype=np.int64)
    if truncated:
        e = np.zeros(0, dtype=np.int64)
        return InComponent(i, verts, e, e, e, graph.marks[verts].copy(), True)
    src, dst, mult = [], [], []
    for v in verts.tolist():
        s, m = graph.in_edges(v)
        src.extend(s.tolist())
        dst.extend([v] * s.size)
        mult.extend(m.tolist())
    order = np.lexsort((dst, src))
    src = np.array(src, dtype=np.int64)[order]
    dst = np.array(dst, dtype=np.int64)[order]
    mult = np.array(mult, dtype=np.int64)[order]
    return InComponent(i, verts, src, dst, mult, graph.marks[verts].copy(), False)


# ---------------------------------------------------------------------------
# linear kernels: sequential edge-by-edge description


def _graph_key(D, edges) -> tuple:
    return (tuple(int(d) for d in D[1:]), tuple(sorted(edges.items())))


def _sequential_weights(c, beta, D, indeg, ell, k, rule):
    """Attachment weights of vertices 1..ell for edge ``k`` of vertex ``ell``.

    ``indeg`` counts in-edges coming from real parent links (the conventional
    root loop excluded). ``rule="exact"`` is the weight of the family nodes in
    the branching process; ``rule="literal"`` uses total degree with the
    root loop counted, i.e. one extra ``c`` at vertex 1.
    """
    w = np.empty(ell)
    for i in range(1, ell):
        w[i - 1] = c * indeg[i] + (c + beta) * D[i]
    w[ell - 1] = c * indeg[ell] + (c + beta) * (k - 1)
    if rule == "literal" and ell > 1:
        w[0] += c
    elif rule != "exact" and rule != "literal":
        raise ValueError("rule must be 'exact' or 'literal'")
    return w


def sequential_linear_graph(c: float, beta: float, D, rng: np.random.Generator,
                            rule: str = "exact") -> dict[tuple[int, int], int]:
    """One multigraph from the sequential rule for given marks ``D[1..n]``."""
    D = np.asarray(D, dtype=np.int64)
    n = D.size - 1
    edges: Counter = Counter({(1, 1): int(D[1])})
    indeg = np.zeros(n + 1)
    indeg[1] = D[1] - 1
    for ell in range(2, n + 1):
        for k in range(1, D[ell] + 1):
            w = _sequential_weights(c, beta, D, indeg, ell, k, rule)
            u = rng.random() * w.sum()
            j = min(int(np.searchsorted(np.cumsum(w), u, side="right")), ell - 1) + 1
            edges[(ell, j)] += 1
            indeg[j] += 1
    return dict(edges)


def sequential_rule_distribution(c: float, beta: float, outdeg: OutDegreeDistribution, n: int,
                                 rule: str = "exact") -> dict[tuple, float]:
    """Exact law of the labeled multigraph (marks included) under the sequential rule."""
    if n < 1:
        raise ValueError("n must be >= 1")
    support = [d for d in range(1, outdeg.support_max + 1) if outdeg.prob(d) > 0]
    out: dict[tuple, float] = {}

    def edges_rec(D, ell, k, indeg, edges, p):
        if ell > n:
            key = _graph_key(D, edges)
            out[key] = out.get(key, 0.0) + p
            return
        if k > D[ell]:
            edges_rec(D, ell + 1, 1, indeg, edges, p)
            return
        w = _sequential_weights(c, beta, D, indeg, ell, k, rule)
        tot = w.sum()
        for j in range(1, ell + 1):
            if w[j - 1] <= 0:
                continue
            indeg[j] += 1
            edges[(ell, j)] = edges.get((ell, j), 0) + 1
            edges_rec(D, ell, k + 1, indeg, edges, p * w[j - 1] / tot)
            edges[(ell, j)] -= 1
            if edges[(ell, j)] == 0:
                del edges[(ell, j)]
            indeg[j] -= 1

    def marks_rec(D, pos, p):
        if pos > n:
            indeg = np.zeros(n + 1)
            indeg[1] = D[1] - 1
            edges_rec(D, 2, 1, indeg, {(1, 1): int(D[1])}, p)
            return
        for d in support:
            D[pos] = d
            marks_rec(D, pos + 1, p * outdeg.prob(d))

    marks_rec(np.zeros(n + 1, dtype=np.int64), 1, 1.0)
    return out


@dataclass(frozen=True)
class EquivalenceReport:
    statistic: float
    dof: int
    p_value: float
    replicas: int
    classes: int
    observed: dict
    expected: dict

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "dof": self.dof, "p_value": self.p_value,
                "replicas": self.replicas, "classes": self.classes}


def sequential_linear_equivalence_check(c: float, beta: float, outdeg: OutDegreeDistribution, n: int,
                                        replicas: int, rng: np.random.Generator,
                                        rule: str = "exact") -> EquivalenceReport:
    """Chi-square goodness of fit of collapsed-process graphs against the exact
    sequential-rule law, over labeled-graph classes (a refinement of isomorphism
    classes, so agreement here implies agreement on isomorphism classes)."""
    if not c + beta > 0 or c < 0:
        raise ValueError("need c >= 0 and c + beta > 0")
    kernel = AttachmentKernel.linear(c, beta)
    expected = sequential_rule_distribution(c, beta, outdeg, n, rule)
    counts: Counter = Counter()
    for _ in range(replicas):
        _, g = generate_cbp(kernel, outdeg, n, rng)
        counts[_graph_key(g.marks, g.edges())] += 1
    keys = sorted(set(expected) | set(counts))
    obs = np.array([counts.get(k, 0) for k in keys], dtype=np.float64)
    exp = np.array([expected.get(k, 0.0) for k in keys]) * replicas
    if np.any((exp == 0) & (obs > 0)):
        return EquivalenceReport(np.inf, len(keys) - 1, 0.0, replicas, len(keys), dict(counts), expected)
    live = exp > 0
    if live.sum() <= 1:
        return EquivalenceReport(0.0, 0, 1.0, replicas, int(live.sum()), dict(counts), expected)
    stat, p = stats.chisquare(obs[live], exp[live])
    return EquivalenceReport(float(stat), int(live.sum() - 1), float(p), replicas, int(live.sum()),
                             dict(counts), expected)
