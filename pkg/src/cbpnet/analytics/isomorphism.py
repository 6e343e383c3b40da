"""Rooted marked multigraphs and canonical codes.

Two rooted multigraphs are isomorphic when a bijection maps root to root and
preserves marks, self-loop counts and every edge multiplicity. Tree-shaped
inputs (edges child -> parent, no loops) use a recursive sorted-children
code. Everything else goes through colour refinement with
individualization and backtracking over the remaining symmetric cells.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass

import numpy as np

MAX_CODE_SIZE = 1000


class CodeSizeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RootedMultigraph:
    """Vertices ``0..n-1`` with root ``root``; ``edges`` maps (u, v), u != v, to multiplicity."""

    n: int
    root: int
    marks: tuple
    loops: tuple
    edges: dict

    def __post_init__(self):
        if len(self.marks) != self.n or len(self.loops) != self.n:
            raise ValueError("marks and loops need one entry per vertex")
        if not 0 <= self.root < self.n:
            raise ValueError("root out of range")
        for (u, v), m in self.edges.items():
            if u == v or m <= 0:
                raise ValueError("edges must be non-loop with positive multiplicity")

    @classmethod
    def from_tree(cls, parent, mark) -> "RootedMultigraph":
        parent = np.asarray(parent)
        n = parent.size
        edges = {(v, int(parent[v])): 1 for v in range(n) if parent[v] >= 0}
        root = int(np.flatnonzero(parent < 0)[0])
        return cls(n, root, tuple(int(x) for x in mark), (0,) * n, edges)

    @classmethod
    def from_component(cls, comp) -> "RootedMultigraph":
        verts = [int(v) for v in comp.vertices]
        idx = {v: k for k, v in enumerate(verts)}
        loops = [0] * len(verts)
        edges = {}
        for a, b, m in zip(comp.src.tolist(), comp.dst.tolist(), comp.mult.tolist()):
            if a == b:
                loops[idx[a]] += m
            else:
                edges[(idx[a], idx[b])] = edges.get((idx[a], idx[b]), 0) + m
        return cls(len(verts), idx[int(comp.root)], tuple(int(x) for x in comp.marks), tuple(loops), edges)

    def relabel(self, perm) -> "RootedMultigraph":
        """Copy with vertex ``v`` renamed ``perm[v]``."""
        inv = [0] * self.n
        for v, p in enumerate(perm):
            inv[p] = v
        return RootedMultigraph(self.n, perm[self.root], tuple(self.marks[inv[p]] for p in range(self.n)),
                                tuple(self.loops[inv[p]] for p in range(self.n)),
                                {(perm[u], perm[v]): m for (u, v), m in self.edges.items()})

    def is_tree(self) -> bool:
        if any(self.loops):
            return False
        outs = [0] * self.n
        for (u, _), m in self.edges.items():
            if m != 1:
                return False
            outs[u] += 1
        if outs[self.root] != 0 or any(outs[v] != 1 for v in range(self.n) if v != self.root):
            return False
        return len(_reverse_distances(self)) == self.n


def _reverse_distances(g: RootedMultigraph) -> dict:
    into = defaultdict(list)
    for (u, v) in g.edges:
        into[v].append(u)
    dist = {g.root: 0}
    q = deque([g.root])
    while q:
        v = q.popleft()
        for u in into[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def _tree_code(g: RootedMultigraph) -> tuple:
    kids = defaultdict(list)
    for (u, v) in g.edges:
        kids[v].append(u)
    order = [g.root]
    for v in order:
        order.extend(kids[v])
    code = {}
    for v in reversed(order):
        code[v] = (g.marks[v], tuple(sorted(code[u] for u in kids[v])))
    return code[g.root]


class _Refiner:
    def __init__(self, g: RootedMultigraph):
        self.g = g
        self.inn = defaultdict(list)
        self.out = defaultdict(list)
        for (u, v), m in g.edges.items():
            self.out[u].append((v, m))
            self.inn[v].append((u, m))
        dist = _reverse_distances(g)
        self.base = [(0 if v == g.root else 1, dist.get(v, -1), g.marks[v], g.loops[v]) for v in range(g.n)]

    def refine(self, colors: list) -> list:
        """Equitable refinement; colours are canonical integers (rank of signature)."""
        colors = _rank(colors)
        while True:
            sig = [(colors[v],
                    tuple(sorted((m, colors[u]) for u, m in self.inn[v])),
                    tuple(sorted((m, colors[w]) for w, m in self.out[v])))
                   for v in range(self.g.n)]
            new = _rank(sig)
            if len(set(new)) == len(set(colors)):
                return new
            colors = new

    def certificate(self, colors: list) -> tuple:
        g = self.g
        per = sorted((colors[v], g.marks[v], g.loops[v]) for v in range(g.n))
        es = sorted((colors[u], colors[v], m) for (u, v), m in g.edges.items())
        return (g.n, colors[g.root], tuple(per), tuple(es))

    def twins(self, cell: list) -> list:
        """One representative per class of interchangeable vertices in ``cell``."""
        seen = {}
        for v in cell:
            key = (tuple(sorted(self.inn[v])), tuple(sorted(self.out[v])))
            seen.setdefault(key, v)
        return sorted(seen.values())

    def search(self, colors: list) -> tuple:
        colors = self.refine(colors)
        groups = defaultdict(list)
        for v, c in enumerate(colors):
            groups[c].append(v)
        cells = [(c, vs) for c, vs in groups.items() if len(vs) > 1]
        if not cells:
            return self.certificate(colors)
        c, cell = min(cells, key=lambda t: (len(t[1]), t[0]))
        best = None
        for v in self.twins(cell):
            # individualize v: it keeps colour c, the rest of its cell moves just above
            trial = [2 * x + (1 if (x == c and u != v) else 0) for u, x in enumerate(colors)]
            cert = self.search(trial)
            if best is None or cert < best:
                best = cert
        return best


def _rank(keys: list) -> list:
    order = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def canonical_code(g, max_size: int = MAX_CODE_SIZE) -> bytes:
    """Byte string equal for two inputs exactly when they are isomorphic."""
    if not isinstance(g, RootedMultigraph):
        g = g.to_multigraph()
    if g.n > max_size:
        raise CodeSizeError(f"component of size {g.n} exceeds the code bound {max_size}")
    if g.is_tree():
        return b"T" + repr(_tree_code(g)).encode()
    r = _Refiner(g)
    return b"G" + repr(r.search(list(r.base))).encode()


def is_isomorphic(a, b, max_size: int = MAX_CODE_SIZE) -> bool:
    return canonical_code(a, max_size) == canonical_code(b, max_size)


def brute_force_isomorphic(a: RootedMultigraph, b: RootedMultigraph) -> bool:
    """Search over all bijections (small inputs only)."""
    if a.n != b.n or sorted(a.marks) != sorted(b.marks) or sorted(a.loops) != sorted(b.loops):
        return False
    if a.marks[a.root] != b.marks[b.root] or a.loops[a.root] != b.loops[b.root]:
        return False
    if sorted(a.edges.values()) != sorted(b.edges.values()):
        return False
    others_a = [v for v in range(a.n) if v != a.root]
    others_b = [v for v in range(b.n) if v != b.root]
    for img in itertools.permutations(others_b):
        theta = {a.root: b.root, **dict(zip(others_a, img))}
        if any(a.marks[v] != b.marks[theta[v]] or a.loops[v] != b.loops[theta[v]] for v in range(a.n)):
            continue
        if all(b.edges.get((theta[u], theta[v]), 0) == m for (u, v), m in a.edges.items()):
            return True
    return False
