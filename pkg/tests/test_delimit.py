import numpy as np
import pytest

from conftest import floyd_warshall, grid_distances, grid_points, small_networks
from netcover.delimit import (
    AssumptionError,
    bigm_constants,
    build_delimitation,
    trivial_delimitation,
    worst_pair_distance,
)
from netcover.harness import gen_random, radius_for
from netcover.network import all_pairs_distances, split_edges, tau


def label_pairs(net, pairs):
    return {(net.label(f), t) for f, t in pairs}


def test_p3_sets(p3):
    dm = all_pairs_distances(p3)
    d = build_delimitation(p3, dm, 1.0)
    e12, e23 = p3.edge_id(1, 2), p3.edge_id(2, 3)
    assert d.potential[1] == {e12, e23}
    assert d.complete[e12] == {e12}
    assert d.partial[1] == {e23}
    assert label_pairs(p3, d.pairs[1]) == {("2_3", "a")}
    assert label_pairs(p3, d.pairs[2]) == {("1_2", "a"), ("1_2", "b"), ("2_3", "a"), ("2_3", "b")}
    assert label_pairs(p3, d.pairs[3]) == {("1_2", "b")}
    assert d.pair_count() == 6


def test_trivial_sets(p3, p2):
    d = trivial_delimitation(p3)
    assert len(d.pairs[1]) == 4
    assert d.complete[p3.edge_id(1, 2)] == {p3.edge_id(1, 2)}
    assert d.trivial
    s = split_edges(p2, 1.0)
    d = trivial_delimitation(s.network, 1.0)
    assert all(len(d.pairs[v]) == 4 for v in s.network.vertices)


def test_assumption_enforced(p2):
    dm = all_pairs_distances(p2)
    with pytest.raises(AssumptionError):
        build_delimitation(p2, dm, 1.0)
    with pytest.raises(AssumptionError):
        trivial_delimitation(p2, 1.0)


def test_worst_pair_matches_grid():
    nets = small_networks() + [gen_random(5, 0.5, s) for s in range(3)]
    for net in nets:
        if net.m > 8:
            continue
        fw = floyd_warshall(net)
        dm = all_pairs_distances(net)
        for e in range(net.m):
            xs = grid_points(net, e, 200)
            for f in range(net.m):
                ys = grid_points(net, f, 200)
                brute = grid_distances(net, fw, e, f, xs, ys).max()
                exact = worst_pair_distance(net, dm, e, f)
                step = net.length(e) / 199 + net.length(f) / 199
                assert brute <= exact + 1e-9
                assert exact - brute <= step + 1e-9


def test_complete_cover_membership_matches_grid():
    for seed in range(6):
        net = gen_random(5, 0.6, seed)
        for kind in ("small", "large"):
            delta = radius_for(net, kind)
            s = split_edges(net, delta)
            sn = s.network
            if sn.m > 8:
                continue
            fw = floyd_warshall(sn)
            d = build_delimitation(sn, all_pairs_distances(sn), delta)
            for e in range(sn.m):
                xs = grid_points(sn, e, 200)
                for f in range(sn.m):
                    ys = grid_points(sn, f, 200)
                    brute = grid_distances(sn, fw, e, f, xs, ys).max()
                    step = sn.length(e) / 199 + sn.length(f) / 199
                    if abs(brute - delta) <= step + 1e-9:
                        continue  # too close to call on the grid
                    assert (f in d.complete[e]) == (brute <= delta)


def test_delimitation_invariants():
    for seed in range(10):
        net = gen_random(7, 0.4, seed)
        for kind in ("small", "large"):
            delta = radius_for(net, kind)
            sn = split_edges(net, delta).network
            dm = all_pairs_distances(sn)
            d = build_delimitation(sn, dm, delta)
            t = trivial_delimitation(sn, delta)
            for v in sn.vertices:
                assert set(sn.incident[v]) <= d.potential[v]
                assert d.partial[v] <= d.potential[v]
                assert set(d.pairs[v]) <= set(t.pairs[v])
                for f, tag in d.pairs[v]:
                    assert f in d.partial[v]
                    assert dm(v, sn.end(f, tag)) <= delta + 1e-9
                    lo = min(tau(sn, dm, v, f, tag, x) for x in np.linspace(0, sn.length(f), 21))
                    assert lo == pytest.approx(dm(v, sn.end(f, tag)))
                    assert (v, tag) in d.inverse[f]
            for f, vs in d.inverse.items():
                for v, tag in vs:
                    assert (f, tag) in d.pairs[v]
            for e in range(sn.m):
                assert e in d.complete[e]


def test_bigm_constants(p3):
    dm = all_pairs_distances(p3)
    d = build_delimitation(p3, dm, 1.0)
    e12, e23 = p3.edge_id(1, 2), p3.edge_id(2, 3)
    trivial = bigm_constants(p3, dm, 1.0, d)
    tight = bigm_constants(p3, dm, 1.0, d, tighten=True)
    assert tight.pair[(1, e23, "a")] == 2 == trivial.pair[(1, e23, "a")]
    assert tight.pair[(2, e23, "a")] == 1 < trivial.pair[(2, e23, "a")]
    assert all(trivial.vertex[v] == tight.vertex[v] == 1.0 for v in p3.vertices)
    for key, m in tight.pair.items():
        assert m <= trivial.pair[key]
    # on delimited pairs the trivial constant is delta + l
    for (v, f, tag), m in trivial.pair.items():
        assert m == 1.0 + p3.length(f)


def test_trivial_bigm_valid_for_far_pairs(p3):
    dm = all_pairs_distances(p3)
    t = trivial_delimitation(p3, 1.0)
    c = bigm_constants(p3, dm, 1.0, t)
    for (v, f, tag), m in c.pair.items():
        d = dm(v, p3.end(f, tag))
        # with z = 0 the row must allow r_v = delta whatever q is
        worst = max(1.0 - (1.0 - tau(p3, dm, v, f, tag, x)) for x in (0.0, p3.length(f)))
        assert m >= worst - 1e-12
        assert m >= d
