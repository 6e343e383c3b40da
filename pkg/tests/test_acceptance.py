"""Acceptance gate: one PASS/FAIL line per criterion.

Run with pytest (lines are repeated in the terminal summary) or directly:
``python3 tests/test_acceptance.py``.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cbpnet import AttachmentKernel, OutDegreeDistribution  # noqa: E402
from cbpnet.analytics import (birth_time_diagnostic, expectation_bound_check, graph_pagerank,  # noqa: E402
                              hill_tail_index, joint_tail, joint_tail_frequency, neighborhood_frequency,
                              tv_distance, two_sample_chi2)
from cbpnet.collapse import generate_cbp  # noqa: E402
from cbpnet.coupling import couple_single, coupling_success_rate, draw_roots, replica_graph  # noqa: E402
from cbpnet.engine import MarkedTree, grow_lifted_run, grow_marked_ctbp  # noqa: E402
from cbpnet.kernel import malthusian_rate  # noqa: E402
from cbpnet.limit import (closed_form_pa_pmf, closed_form_ua_pmf, predicted_tail_exponent,  # noqa: E402
                          sample_root_in_degrees, sample_stopped_batch)
from cbpnet.rng import Streams  # noqa: E402

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

PA = AttachmentKernel.linear(1, 0)
ONE = OutDegreeDistribution.point(1)
TWO = OutDegreeDistribution.point(2)
X50 = np.arange(51)

pytestmark = pytest.mark.slow


def record(k: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pmf_of(samples) -> np.ndarray:
    return np.bincount(np.asarray(samples)) / len(samples)


def partial_sum(kernel, theta, terms=10**6):
    i = np.arange(1, terms + 1, dtype=np.float64)
    f = kernel.slope * i + kernel.offset
    return float(np.exp(np.cumsum(np.log(f) - np.log(theta + f))).sum())


def test_criterion_1_malthusian():
    worst_err, worst_time, oracle = 0.0, 0.0, 0.0
    ok = True
    for beta in (0.5, 1.0, 2.0):
        t0 = time.perf_counter()
        lam = malthusian_rate(AttachmentKernel.constant(beta)).lam
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_err = max(worst_err, abs(lam - beta))
        ok &= abs(lam - beta) <= 1e-10
    for beta in (0.0, 0.5, 1.0):
        k = AttachmentKernel.linear(1, beta)
        # truncated series at the claimed root is 1 up to its O(1/terms) tail
        oracle = max(oracle, abs(partial_sum(k, 2 + beta) - 1.0))
        t0 = time.perf_counter()
        lam = malthusian_rate(k).lam
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_err = max(worst_err, abs(lam - (2 + beta)))
        ok &= abs(lam - (2 + beta)) <= 1e-8
    ok &= oracle <= 1e-5 and worst_time < 1.0
    record(1, ok, f"max|err|={worst_err:.2e} oracle_gap={oracle:.2e} max_time={worst_time:.3f}s")


def test_criterion_2_uniform_attachment_law():
    rng = np.random.default_rng(2)
    k = AttachmentKernel.constant(1.0)
    b1 = sample_stopped_batch(k, ONE, 1.0, 200_000, rng).kept()
    tv1 = tv_distance(pmf_of(b1.N_root), 0.5 ** (X50 + 1), support=X50)
    mix = OutDegreeDistribution.uniform(1, 2)
    b2 = sample_stopped_batch(k, mix, 1.0, 200_000, rng).kept()
    tv2 = tv_distance(pmf_of(b2.N_root), closed_form_ua_pmf(mix, X50), support=X50)
    record(2, tv1 <= 0.01 and tv2 <= 0.01, f"TV(D=1)={tv1:.4f} TV(D~U{{1,2}})={tv2:.4f} tol=0.01")


def test_criterion_3_preferential_attachment_law():
    rng = np.random.default_rng(3)
    b1 = sample_stopped_batch(PA, ONE, 2.0, 200_000, rng).kept()
    tv1 = tv_distance(pmf_of(b1.N_root), 4.0 / ((X50 + 1) * (X50 + 2) * (X50 + 3)), support=X50)
    k1 = AttachmentKernel.linear(1, 1.0)
    b2 = sample_stopped_batch(k1, TWO, 3.0, 200_000, rng).kept()
    tv2 = tv_distance(pmf_of(b2.N_root), closed_form_pa_pmf(1.0, TWO, X50), support=X50)
    record(3, tv1 <= 0.01 and tv2 <= 0.01, f"TV(beta=0,D=1)={tv1:.4f} TV(beta=1,D=2)={tv2:.4f} tol=0.01")


def test_criterion_4_ua_beta_independence():
    rng = np.random.default_rng(4)
    a = sample_stopped_batch(AttachmentKernel.constant(0.5), ONE, 0.5, 100_000, rng).kept()
    b = sample_stopped_batch(AttachmentKernel.constant(2.0), ONE, 2.0, 100_000, rng).kept()
    tv = tv_distance(pmf_of(a.N_root), pmf_of(b.N_root))
    record(4, tv <= 0.015, f"TV(f=0.5 vs f=2)={tv:.4f} tol=0.015")


def test_criterion_5_coupling_trend():
    rates, pairs_ok, cells = [], True, []
    for n in (100, 1000, 10_000):
        one = coupling_success_rate(PA, TWO, n, 1, 1000, seed=5)
        two = coupling_success_rate(PA, TWO, n, 2, 1000, seed=5)
        rates.append(one)
        pairs_ok &= all(a["success"] or not b["success"] for a, b in zip(one.rows, two.rows))
        cells.append(f"n={n}:{one.mean:.3f}[{one.ci[0]:.3f},{one.ci[1]:.3f}] m2={two.mean:.3f}")
    trend = all(b.mean >= a.mean or b.ci[1] >= a.ci[0] for a, b in zip(rates, rates[1:]))
    final = rates[-1].mean >= 0.8
    record(5, trend and final and pairs_ok,
           f"{' '.join(cells)} trend={trend} final>=0.8={final} per-replica m2<=m1={pairs_ok}")


def test_criterion_6_local_weak_limit():
    rng = np.random.default_rng(6)
    n, N = 100_000, 100_000
    _, g = generate_cbp(PA, ONE, n, rng)
    lim = sample_stopped_batch(PA, ONE, 2.0, N, rng, node_cap=3)
    targets = {
        "root": (MarkedTree.root_only(1), lim.size == 1),
        "root+child": (MarkedTree(np.array([-1, 0]), np.array([0.0, 0.5]), np.array([1, 1]), np.array([-1, 0]),
                                  np.array([0, 1]), np.array([1, 0])), lim.size == 2),
    }
    ok, parts = True, []
    for name, (tree, hits) in targets.items():
        pg = neighborhood_frequency(g, tree)
        pl = float(hits.mean())
        se = math.sqrt(pg * (1 - pg) / n + pl * (1 - pl) / N)
        ok &= abs(pg - pl) <= 3 * se
        parts.append(f"{name}: graph={pg:.4f} limit={pl:.4f} |d|/se={abs(pg - pl) / se:.2f}")
    record(6, ok, "; ".join(parts) + " tol=3se")


def test_criterion_7_joint_tail():
    rng = np.random.default_rng(7)
    _, g = generate_cbp(PA, ONE, 100_000, rng)
    pr = graph_pagerank(g, 0.5)
    lim = sample_stopped_batch(PA, ONE, 2.0, 100_000, rng, c=0.5).kept()
    worst = 0.0
    for k in (0, 1, 2, 5):
        for r in (0.7, 1.3, 2.1):
            worst = max(worst, abs(joint_tail_frequency(g, pr, k, r) - joint_tail(lim.N_root, lim.R_root, k, r)))
    record(7, worst <= 0.02, f"max cell |delta|={worst:.4f} tol=0.02 discarded={lim.discard_rate:.1e}")


def test_criterion_8_pagerank_mechanics():
    rng = np.random.default_rng(8)
    _, g = generate_cbp(AttachmentKernel.linear(1, 0.5), OutDegreeDistribution.uniform(1, 3), 10_000, rng)
    pr = graph_pagerank(g, 0.5)
    mass = abs(pr.pi.sum() - 1.0)
    floor = float(pr.R.min())
    from cbpnet.collapse import CollapsedGraph
    h = graph_pagerank(CollapsedGraph.from_edges(2, [1, 1], {(1, 1): 1, (2, 1): 1}), 0.5, tol=1e-14)
    hand = float(np.max(np.abs(h.R - [1.5, 0.5])))
    ok = mass <= 1e-8 and floor >= 0.5 - 1e-12 and hand <= 1e-10
    record(8, ok, f"|sum pi - 1|={mass:.1e} min R={floor:.4f} hand-case err={hand:.1e}")


def test_criterion_9_expectation_bound():
    rows = expectation_bound_check(PA, ONE, [0.25, 0.5, 1.0], 10_000, np.random.default_rng(9))
    ok = not any(r.violation for r in rows)
    record(9, ok, " ".join(f"t={r.t}: mean={r.mean:.3f}+-{r.se:.3f} bound={r.bound:.3f}" for r in rows))


def test_criterion_10_birth_times():
    decreases = 0
    for seed in range(100):
        run = grow_lifted_run(PA, 100_000, rng=np.random.default_rng([10, seed]))
        (_, a), (_, b) = birth_time_diagnostic(run, 2.0, [10, 10_000])
        decreases += b < a
    record(10, decreases >= 95, f"decreasing in {decreases}/100 runs (need >= 95)")


def test_criterion_11_tail_exponents():
    """Hill estimates the survival index; the predicted exponent indexes the pmf,
    so the gate compares ``Hill + 1`` with ``[2.2, 2.8]``."""
    rng = np.random.default_rng(11)
    h = OutDegreeDistribution.zeta(2.5, 10**6)
    parts, ok = [], True
    for model, kernel, lam in (("pa", PA, 2.0), ("ua", AttachmentKernel.constant(1.0), 1.0)):
        N = sample_root_in_degrees(kernel, h, lam, 1_000_000, rng)
        est = hill_tail_index(N, n_boot=20, rng=rng)
        pmf_index = est.alpha + 1.0
        target = predicted_tail_exponent(model, 2.5)
        ok &= 2.2 <= pmf_index <= 2.8 and 1.2 <= est.alpha <= 1.8
        parts.append(f"{model}: hill={est.alpha:.3f}+-{est.se:.3f} pmf-index={pmf_index:.3f} "
                     f"predicted={target} plateau={est.plateau}")
    record(11, ok, "; ".join(parts) + " window=[2.2,2.8]")


def test_criterion_12_law_preservation():
    n, reps = 1000, 10_000
    lam = malthusian_rate(PA).lam
    coupled, direct, capped_at_s = [], [], 0
    for r in range(reps):
        st = Streams(12).child(r)
        run, g = replica_graph(PA, TWO, n, st)
        i = draw_roots(st, n, 1)[0]
        o = couple_single(run, g, i, lam, PA, TWO, st.child("couple"))
        t = min(o.s_star, 0.5)
        capped_at_s += t < 0.5
        a = o.full_tree.at(t)
        b = grow_marked_ctbp(PA, TWO, t, st.generator("direct"))
        coupled.append((a.size, a.root_children))
        direct.append((b.size, b.root_children))
    res = two_sample_chi2(coupled, direct)
    record(12, res.p_value > 1e-3,
           f"chi2={res.statistic:.1f} dof={res.dof} p={res.p_value:.3g} (horizon<0.5 in {capped_at_s} runs)")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(((k, v) for k, v in globals().items() if k.startswith("test_criterion_")),
                           key=lambda kv: int(kv[0].split("_")[2])):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
