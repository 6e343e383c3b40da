"""Hot simulation loops.

Compiled with numba unless ``CBPNET_DISABLE_NUMBA`` is set, in which case the
same source runs as plain Python. Kernels are passed as ``(table, slope,
offset)``: ``f(k) = table[k-1]`` for ``k <= len(table)`` and ``slope*k + offset``
beyond. Out-degree laws are passed as a cumulative table ``cdf`` over
``1..len(cdf)``.

Random draws are consumed from the caller's ``numpy.random.Generator`` in a
fixed documented order so compiled and interpreted runs agree exactly.
"""
import numpy as np

from ._jit import njit


@njit
def rate(table, slope, offset, k):
    if k <= table.shape[0]:
        return table[k - 1]
    return slope * k + offset


@njit
def checked_rate(table, slope, offset, k):
    r = rate(table, slope, offset, k)
    if not (r > 0.0):
        raise ValueError("attachment rate undefined or nonpositive (undeclared growth class?)")
    return r


@njit
def sample_mark(cdf, rng):
    u = rng.random()
    idx = np.searchsorted(cdf, u, side="right")
    if idx >= cdf.shape[0]:
        idx = cdf.shape[0] - 1
    return idx + 1


# ---------------------------------------------------------------------------
# pure birth process


@njit
def pure_birth_times(table, slope, offset, t_max, n_max, rng):
    """Event times of a pure birth process with rates f(1), f(2), ... up to a
    time horizon ``t_max`` and at most ``n_max`` events."""
    cap = 16
    out = np.empty(cap)
    t = 0.0
    n = 0
    while n < n_max:
        t += rng.exponential(1.0 / checked_rate(table, slope, offset, n + 1))
        if t > t_max:
            break
        if n == cap:
            cap *= 2
            grown = np.empty(cap)
            grown[:n] = out[:n]
            out = grown
        out[n] = t
        n += 1
    return out[:n].copy()


@njit
def pure_birth_counts(table, slope, offset, horizons, rng):
    """Number of events by each horizon for independent replicas."""
    out = np.zeros(horizons.shape[0], dtype=np.int64)
    for r in range(horizons.shape[0]):
        t = 0.0
        n = 0
        while True:
            t += rng.exponential(1.0 / checked_rate(table, slope, offset, n + 1))
            if t > horizons[r]:
                break
            n += 1
        out[r] = n
    return out


# ---------------------------------------------------------------------------
# Fenwick prefix sums (1-based, tree[0] unused)


@njit
def fenwick_add(tree, i, v):
    n = tree.shape[0] - 1
    while i <= n:
        tree[i] += v
        i += i & (-i)


@njit
def fenwick_prefix(tree, i):
    s = 0.0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit
def fenwick_find(tree, u):
    """Smallest index ``i`` with ``prefix(i) > u``."""
    n = tree.shape[0] - 1
    step = 1
    while step * 2 <= n:
        step *= 2
    pos = 0
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= u:
            pos = nxt
            u -= tree[nxt]
        step //= 2
    return pos + 1


@njit
def grow_lifted(table, slope, offset, total, rng):
    """Base branching process up to ``total`` nodes.

    Per new node ``v`` (2..total) the draws are: holding time, then the
    parent uniform. Returns 1-based arrays (index 0 unused).
    """
    sigma = np.zeros(total + 1)
    parent = np.zeros(total + 1, dtype=np.int64)
    indeg = np.zeros(total + 1, dtype=np.int64)
    tree = np.zeros(total + 1)
    w1 = checked_rate(table, slope, offset, 1)
    fenwick_add(tree, 1, w1)
    W = w1
    for v in range(2, total + 1):
        sigma[v] = sigma[v - 1] + rng.exponential(1.0 / W)
        u = rng.random() * W
        p = fenwick_find(tree, u)
        if p > v - 1:
            p = v - 1
        parent[v] = p
        old = rate(table, slope, offset, indeg[p] + 1)
        indeg[p] += 1
        new = checked_rate(table, slope, offset, indeg[p] + 1)
        fenwick_add(tree, p, new - old)
        fenwick_add(tree, v, w1)
        W += new - old + w1
    return sigma, parent, indeg


# ---------------------------------------------------------------------------
# binary heap keyed by (time, slot id)


@njit
def _less(ht, hs, a, b):
    if ht[a] < ht[b]:
        return True
    if ht[a] > ht[b]:
        return False
    return hs[a] < hs[b]


@njit
def heap_push(ht, hs, size, t, s):
    i = size
    ht[i] = t
    hs[i] = s
    while i > 0:
        p = (i - 1) // 2
        if _less(ht, hs, i, p):
            ht[i], ht[p] = ht[p], ht[i]
            hs[i], hs[p] = hs[p], hs[i]
            i = p
        else:
            break
    return size + 1


@njit
def heap_pop(ht, hs, size):
    t = ht[0]
    s = hs[0]
    size -= 1
    ht[0] = ht[size]
    hs[0] = hs[size]
    i = 0
    while True:
        left = 2 * i + 1
        right = left + 1
        m = i
        if left < size and _less(ht, hs, left, m):
            m = left
        if right < size and _less(ht, hs, right, m):
            m = right
        if m == i:
            break
        ht[i], ht[m] = ht[m], ht[i]
        hs[i], hs[m] = hs[m], hs[i]
        i = m
    return t, s, size


@njit
def _grow_f(a, n):
    out = np.empty(max(n, 2 * a.shape[0]))
    out[: a.shape[0]] = a
    return out


@njit
def _grow_i(a, n):
    out = np.empty(max(n, 2 * a.shape[0]), dtype=np.int64)
    out[: a.shape[0]] = a
    return out


# ---------------------------------------------------------------------------
# marked branching process


@njit
def evolve(parent, birth, mark, pslot, slot_start, slot_count, n_nodes, t_from, t_to,
           cdf, table, slope, offset, node_cap, rng):
    """Evolve a marked tree from ``t_from`` to ``t_to``.

    Every slot of node ``v`` starts its next holding time at
    ``max(t_from, birth[v])`` given its current count. Draw order: initial
    holding times by slot id; then per birth the child's mark, the child's
    slot holding times, and the parent slot's next holding time.
    Returns trimmed arrays plus the ``capped`` flag.
    """
    n_slots = 0
    for v in range(n_nodes):
        n_slots += mark[v]
    slot_owner = np.empty(max(n_slots, 1), dtype=np.int64)
    for v in range(n_nodes):
        for j in range(mark[v]):
            slot_owner[slot_start[v] + j] = v

    cap_h = max(n_slots, 16)
    ht = np.empty(cap_h)
    hs = np.empty(cap_h, dtype=np.int64)
    size = 0
    for v in range(n_nodes):
        t0 = birth[v] if birth[v] > t_from else t_from
        for j in range(mark[v]):
            s = slot_start[v] + j
            t = t0 + rng.exponential(1.0 / checked_rate(table, slope, offset, slot_count[s] + 1))
            size = heap_push(ht, hs, size, t, s)

    capped = False
    while size > 0:
        if ht[0] > t_to:
            break
        if n_nodes >= node_cap:
            capped = True
            break
        t, s, size = heap_pop(ht, hs, size)
        v = slot_owner[s]
        d = sample_mark(cdf, rng)
        if n_nodes >= parent.shape[0]:
            parent = _grow_i(parent, n_nodes + 1)
            birth = _grow_f(birth, n_nodes + 1)
            mark = _grow_i(mark, n_nodes + 1)
            pslot = _grow_i(pslot, n_nodes + 1)
            slot_start = _grow_i(slot_start, n_nodes + 1)
        c = n_nodes
        parent[c] = v
        birth[c] = t
        mark[c] = d
        pslot[c] = s - slot_start[v]
        slot_start[c] = n_slots
        n_nodes += 1
        if n_slots + d > slot_count.shape[0]:
            slot_count = _grow_i(slot_count, n_slots + d)
        if n_slots + d > slot_owner.shape[0]:
            slot_owner = _grow_i(slot_owner, n_slots + d)
        if size + d + 1 > ht.shape[0]:
            ht = _grow_f(ht, size + d + 1)
            hs = _grow_i(hs, size + d + 1)
        w1 = checked_rate(table, slope, offset, 1)
        for j in range(d):
            slot_count[n_slots + j] = 0
            slot_owner[n_slots + j] = c
            size = heap_push(ht, hs, size, t + rng.exponential(1.0 / w1), n_slots + j)
        n_slots += d
        slot_count[s] += 1
        size = heap_push(ht, hs, size, t + rng.exponential(1.0 / checked_rate(table, slope, offset, slot_count[s] + 1)), s)

    return (parent[:n_nodes].copy(), birth[:n_nodes].copy(), mark[:n_nodes].copy(),
            pslot[:n_nodes].copy(), slot_start[:n_nodes].copy(), slot_count[:n_slots].copy(), capped)


@njit
def grow_from_root(root_mark, t_to, cdf, table, slope, offset, node_cap, rng):
    cap = 16
    parent = np.empty(cap, dtype=np.int64)
    birth = np.empty(cap)
    mark = np.empty(cap, dtype=np.int64)
    pslot = np.empty(cap, dtype=np.int64)
    slot_start = np.empty(cap, dtype=np.int64)
    slot_count = np.zeros(max(root_mark, 16), dtype=np.int64)
    parent[0] = -1
    birth[0] = 0.0
    mark[0] = root_mark
    pslot[0] = -1
    slot_start[0] = 0
    return evolve(parent, birth, mark, pslot, slot_start, slot_count, 1, 0.0, t_to,
                  cdf, table, slope, offset, node_cap, rng)


@njit
def tree_pagerank(parent, mark, c):
    """Scale-free PageRank of every node of a finite tree (edges child -> parent)."""
    n = parent.shape[0]
    R = np.full(n, 1.0 - c)
    for v in range(n - 1, 0, -1):
        R[parent[v]] += c * R[v] / mark[v]
    return R


@njit
def stopped_batch(n_samples, lam, horizon, cdf, table, slope, offset, node_cap, damping, rng):
    """Independent marked trees stopped at Exp(lam) times (or at ``horizon`` when
    ``lam <= 0``). Per sample: stopping time, root mark, evolution.

    Columns: chi, size, root children, root PageRank, mark sum, root mark, capped.
    """
    chi = np.empty(n_samples)
    size = np.empty(n_samples, dtype=np.int64)
    n_root = np.empty(n_samples, dtype=np.int64)
    r_root = np.empty(n_samples)
    mark_sum = np.empty(n_samples, dtype=np.int64)
    root_mark = np.empty(n_samples, dtype=np.int64)
    capped = np.zeros(n_samples, dtype=np.bool_)
    for r in range(n_samples):
        t = rng.exponential(1.0 / lam) if lam > 0 else horizon
        d = sample_mark(cdf, rng)
        parent, birth, mark, pslot, slot_start, slot_count, cp = grow_from_root(
            d, t, cdf, table, slope, offset, node_cap, rng)
        chi[r] = t
        size[r] = parent.shape[0]
        k = 0
        for v in range(1, parent.shape[0]):
            if parent[v] == 0:
                k += 1
        n_root[r] = k
        mark_sum[r] = mark.sum()
        root_mark[r] = d
        capped[r] = cp
        if cp:
            r_root[r] = np.nan
        else:
            r_root[r] = tree_pagerank(parent, mark, damping)[0]
    return chi, size, n_root, r_root, mark_sum, root_mark, capped


@njit
def root_degree_batch(n_samples, lam, cdf, table, slope, offset, rng):
    """Root in-degree of stopped marked trees without growing the descendants.

    Per sample: stopping time, root mark, then each slot's pure birth path in
    slot order. Returns (chi, root mark, root in-degree).
    """
    chi = np.empty(n_samples)
    marks = np.empty(n_samples, dtype=np.int64)
    out = np.empty(n_samples, dtype=np.int64)
    for r in range(n_samples):
        t_stop = rng.exponential(1.0 / lam)
        d = sample_mark(cdf, rng)
        total = 0
        for j in range(d):
            t = 0.0
            k = 0
            while True:
                t += rng.exponential(1.0 / checked_rate(table, slope, offset, k + 1))
                if t > t_stop:
                    break
                k += 1
            total += k
        chi[r] = t_stop
        marks[r] = d
        out[r] = total
    return chi, marks, out
