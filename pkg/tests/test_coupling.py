import numpy as np
import pytest

from cbpnet import AttachmentKernel, OutDegreeDistribution
from cbpnet.analytics import is_isomorphic, two_sample_chi2
from cbpnet.collapse import collapse_run, in_component
from cbpnet.coupling import couple_joint, couple_single, coupling_success_rate, draw_roots, replica_graph
from cbpnet.engine import LiftedRun, grow_marked_ctbp
from cbpnet.rng import Streams

PA = AttachmentKernel.linear(1, 0)


def lifted(parents, D):
    n_nodes = len(parents)
    parent = np.array([0] + list(parents), dtype=np.int64)
    sigma = np.concatenate([[0.0], np.arange(n_nodes) * 0.1])
    indeg = np.bincount(parent[2:], minlength=n_nodes + 1)
    S = np.concatenate([[0], np.cumsum(D)])
    return LiftedRun(PA, sigma, parent, indeg, S), collapse_run(LiftedRun(PA, sigma, parent, indeg, S),
                                                               [0] + list(D))


def fixture_tree():
    # V(k) = {k}; edges 2->1, 3->2, 4->2 and the root loop at 1
    return lifted([0, 1, 2, 2], [1, 1, 1, 1])


def fixture_dummy():
    # V(4) = {4, 5} with parents in V(2) and V(3): vertex 4 hits J twice
    return lifted([0, 1, 2, 2, 3], [1, 1, 1, 2])


def test_tree_fixture_copies_component():
    run, g = fixture_tree()
    o = couple_single(run, g, 2, 2.0, PA, OutDegreeDistribution.point(1), streams=5)
    assert o.J == [2, 3, 4] and o.J_star == [] and o.skipped == [] and o.dummy_count == 0
    assert o.t_target == pytest.approx(np.log(2) / 2)
    full = o.full_tree
    assert full.birth[:3].tolist() == pytest.approx([0.0, 0.1, 0.2])
    assert full.parent[:3].tolist() == [-1, 0, 0]
    # step 4 adds sigma[S_n] - sigma[S_kappa*] = 0.3 - 0.3
    assert o.s_star == pytest.approx(0.2)
    if o.success:
        assert o.tree.size == 3 and is_isomorphic(o.tree, in_component(g, 2))
    else:
        assert o.failure_reason == "size_mismatch" and o.tree.size > 3


def test_dummy_fixture():
    run, g = fixture_dummy()
    o = couple_single(run, g, 2, 2.0, PA, OutDegreeDistribution.point(1), streams=5)
    assert o.J == [2, 3] and o.J_star == [4] and o.dummy_count == 1
    assert not o.success and o.failure_reason == "miscoupling"
    # the dummy is born sigma[5] - sigma[4] after vertex 4 and hangs off vertex 3's node
    full = o.full_tree
    b4 = full.birth[2]
    dummy = 3
    assert full.birth[dummy] == pytest.approx(b4 + 0.1)
    assert full.parent[dummy] == 1
    # s* stops at vertex 4's birth (0.2) while the dummy is born at 0.3
    assert o.s_star == pytest.approx(0.2) and o.late_dummies == 1


def test_root_with_loop_fails(rng):
    run, g = replica_graph(PA, OutDegreeDistribution.point(2), 300, Streams(1))
    o = couple_single(run, g, 1, 2.0, PA, OutDegreeDistribution.point(2), streams=1)
    assert not o.success and o.J_star[0] == 1 and o.J == []


def test_last_vertex_zero_horizon():
    run, g = replica_graph(PA, OutDegreeDistribution.point(2), 200, Streams(3))
    o = couple_single(run, g, 200, 1.5, PA, OutDegreeDistribution.point(2), streams=3)
    assert o.t_target == 0.0
    assert o.tree.size == 1


def test_success_implies_isomorphic():
    h = OutDegreeDistribution.uniform(1, 2)
    k = AttachmentKernel.linear(1, 0.5)
    lam = 2.5
    seen = 0
    for r in range(40):
        st = Streams(11).child(r)
        run, g = replica_graph(k, h, 400, st)
        for i in draw_roots(st, 400, 3):
            o = couple_single(run, g, i, lam, k, h, st.child("c"))
            assert o.J_star or not o.dummy_count
            assert set(o.J) | set(o.J_star) | set(o.skipped) == set(in_component(g, i).vertices.tolist())
            if o.success:
                seen += 1
                assert is_isomorphic(o.tree, in_component(g, i))
                assert np.array_equal(np.sort(o.vertex_of_node), in_component(g, i).vertices)
    assert seen > 20


def test_coupling_is_deterministic_in_streams():
    h = OutDegreeDistribution.point(2)
    run, g = replica_graph(PA, h, 300, Streams(9))
    a = couple_single(run, g, 40, 2.0, PA, h, Streams(9).child("c"))
    b = couple_single(run, g, 40, 2.0, PA, h, Streams(9).child("c"))
    assert np.array_equal(a.full_tree.birth, b.full_tree.birth)
    assert a.to_dict(include_tree=False) == b.to_dict(include_tree=False)


def test_joint_single_root_matches_single():
    h = OutDegreeDistribution.point(2)
    run, g = replica_graph(PA, h, 300, Streams(4))
    a = couple_joint(run, g, [57], 2.0, PA, h, Streams(4).child("c")).outcomes[0]
    b = couple_single(run, g, 57, 2.0, PA, h, Streams(4).child("c"))
    assert np.array_equal(a.full_tree.birth, b.full_tree.birth) and a.success == b.success


def test_joint_with_vertex_one_fails():
    h = OutDegreeDistribution.point(2)
    run, g = replica_graph(PA, h, 300, Streams(4))
    assert not couple_joint(run, g, [1, 120], 2.0, PA, h, 4).success
    with pytest.raises(ValueError):
        couple_joint(run, g, [5, 5], 2.0, PA, h, 4)


def test_joint_overlap_is_miscoupling():
    # vertex 4 lies in the in-component of 2; coupling 2 then 4 must fail on 4
    run, g = fixture_tree()
    out = couple_joint(run, g, [4, 2], 2.0, PA, OutDegreeDistribution.point(1), 1)
    assert [o.root for o in out.outcomes] == [2, 4]
    assert out.outcomes[1].failure_reason == "miscoupling" and not out.success


def test_success_rate_edge_cases():
    h = OutDegreeDistribution.point(1)
    r = coupling_success_rate(PA, h, 1, 1, 20, seed=0, lam=2.0)
    assert r.successes == 0
    with pytest.raises(ValueError):
        coupling_success_rate(PA, h, 10, 1, 0)


def test_joint_success_implies_single_success():
    h = OutDegreeDistribution.point(2)
    one = coupling_success_rate(PA, h, 300, 1, 60, seed=2)
    two = coupling_success_rate(PA, h, 300, 2, 60, seed=2)
    for a, b in zip(one.rows, two.rows):
        assert a["roots"][0] == b["roots"][0]
        assert a["success"] or not b["success"]
    assert two.mean <= one.mean
    lo, hi = one.ci
    assert lo <= one.mean <= hi


def test_worker_count_does_not_change_result():
    h = OutDegreeDistribution.point(2)
    a = coupling_success_rate(PA, h, 200, 1, 8, seed=5, workers=1)
    b = coupling_success_rate(PA, h, 200, 1, 8, seed=5, workers=2)
    assert [r["success"] for r in a.rows] == [r["success"] for r in b.rows]


def test_snapshot_law_matches_fresh_tree():
    h = OutDegreeDistribution.point(2)
    lam, t, n = 2.0, 0.4, 300
    coupled, fresh = [], []
    for r in range(1500):
        st = Streams(21).child(r)
        run, g = replica_graph(PA, h, n, st)
        i = draw_roots(st, n, 1)[0]
        o = couple_single(run, g, i, lam, PA, h, st.child("c"))
        coupled.append(o.snapshot(t, PA, h, st.generator("snap")).size)
        fresh.append(grow_marked_ctbp(PA, h, t, st.generator("fresh")).size)
    res = two_sample_chi2(coupled, fresh)
    assert res.p_value > 1e-3, res


def test_zero_length_horizon_rounding():
    # this replica once produced a horizon of -4e-16 from float cancellation
    h = OutDegreeDistribution.point(2)
    st = Streams(5).child(107)
    run, g = replica_graph(PA, h, 100, st)
    out = couple_joint(run, g, [2, 74], 2.0, PA, h, st.child("couple"))
    assert out.outcomes[1].J_star == [74]
