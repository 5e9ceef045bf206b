import csv
import io
import math

import networkx as nx
import pytest

from netcover.harness import (
    CSV_FIELDS,
    SENTINEL_TIME,
    MetricsRecord,
    gen_random,
    metrics,
    parse_radius,
    performance_profile,
    radius_for,
    random_suite,
    records_csv,
    rows_csv,
    run_bench,
    sgm,
    solve_instance,
    summarize,
)
from netcover.network import all_pairs_distances, network_from_edges
from netcover.solve import SolveResult
from netcover.verify import check_cover


def result(primal, dual):
    return SolveResult(status="optimal", primal=primal, dual=dual, nodes=0, time=0.0)


def test_radius_examples(p3):
    assert radius_for(p3, "small") == 1.0 and radius_for(p3, "large") == 2.0
    assert radius_for(network_from_edges([(1, 2, 1.0), (2, 3, 2.0), (3, 4, 3.0)]), "small") == 2.0
    assert radius_for(network_from_edges([(1, 2, 2.0)]), "large") == 4.0
    assert parse_radius(p3, "1.25") == 1.25
    with pytest.raises(ValueError):
        radius_for(p3, "medium")
    with pytest.raises(ValueError):
        parse_radius(p3, "-1")


def test_sgm_examples():
    assert abs(sgm([1, 3], 1) - (2 * math.sqrt(2) - 1)) < 1e-12
    assert sgm([5], 0) == 5
    assert sgm([0, 0], 1) == 0
    assert abs(sgm([2, 7, 1], 0.5) - sgm([7, 1, 2], 0.5)) < 1e-12
    with pytest.raises(ValueError):
        sgm([], 1)
    with pytest.raises(ValueError):
        sgm([-1, 2], 1)


def test_metrics_examples():
    sigma, _ = metrics(result(3, 2), 5)
    assert abs(sigma - 1 / 3) < 1e-12
    _, vr = metrics(result(2, 2), 4)
    assert abs(vr - 0.5) < 1e-12
    assert metrics(result(2, 2), 4)[0] == 0
    assert metrics(result(2, 5), 4)[0] == 0  # clamped
    assert metrics(result(math.inf, 1), 4) == (1.0, 1.0)


def test_gen_random_examples():
    k5 = gen_random(5, 1.0, 7)
    assert k5.n == 5 and k5.m == 10
    one = gen_random(2, 1.0, 0)
    assert one.m == 1
    assert gen_random(7, 0.4, 3) == gen_random(7, 0.4, 3)
    with pytest.raises(ValueError):
        gen_random(1, 0.5, 0)
    with pytest.raises(ValueError):
        gen_random(4, 0.0, 0)


def test_gen_random_connected_and_lengths():
    for seed in range(30):
        net = gen_random(8, 0.1, seed)
        g = nx.Graph([(e.a, e.b) for e in net.edges])
        g.add_nodes_from(net.vertices)
        assert nx.is_connected(g)
        assert all(0.5 <= e.length <= 1.5 for e in net.edges)


def test_random_suite():
    suite = random_suite(6, seed=4)
    assert len(suite) == 6 and len({name for name, _ in suite}) == 6
    assert [n for n, _ in suite] == [n for n, _ in random_suite(6, seed=4)]
    for _, net in suite:
        assert 4 <= net.n <= 8


def test_solve_instance_maps_back(p2):
    out = solve_instance(p2, 1.0, "efp")
    assert out.result.status == "optimal" and out.result.primal == 1
    (p,) = out.cover.points
    assert abs(p.x - 1.0) < 1e-7
    assert check_cover(p2, all_pairs_distances(p2), 1.0, out.cover)
    assert out.total_time >= out.result.time


def test_sentinel_record():
    r = MetricsRecord.sentinel("x", "EF", "small")
    assert (r.time_s, r.sigma, r.vr) == (SENTINEL_TIME, 1.0, 1.0) == (1800, 1, 1)
    assert not r.accepted and not r.solved


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_records(p3, triangle, monkeypatch):
    import netcover.harness as h

    real = h.solve_instance

    def flaky(net, radius, kind, *a, **k):
        if net is triangle:
            raise RuntimeError("boom")
        return real(net, radius, kind, *a, **k)

    monkeypatch.setattr(h, "solve_instance", flaky)
    recs = run_bench([("p3", p3), ("tri", triangle)], ["efp", "efpd"], time_limit=30, timing=False)
    assert len(recs) == 2 * 2 * 2
    rows = parse(records_csv(recs))
    assert tuple(rows[0]) == CSV_FIELDS
    bad = [r for r in rows if r["instance"] == "tri"]
    assert all((r["time_s"], r["sigma"], r["vr"], r["status"]) == ("1800.0", "1.0", "1.0", "error") for r in bad)
    good = [r for r in rows if r["instance"] == "p3"]
    assert all(r["status"] == "optimal" and r["sigma"] == "0.0" and r["time_s"] == "0.0" for r in good)


def test_bench_is_reproducible(p3, triangle):
    runs = [
        records_csv(run_bench([("p3", p3), ("tri", triangle)], ["efp", "efpv1"], time_limit=60, timing=False))
        for _ in range(2)
    ]
    assert runs[0] == runs[1]


def test_summary_and_profile():
    recs = [
        MetricsRecord("a", "EF-P", "small", 1.0, 0.0, 0.5, "optimal", 3),
        MetricsRecord("b", "EF-P", "small", 3.0, 0.0, 0.5, "optimal", 1),
        MetricsRecord.sentinel("c", "EF-P", "large"),
    ]
    rows = {(r["form"], r["radius"]): r for r in summarize(recs)}
    small = rows[("EF-P", "small")]
    assert abs(small["sgm_time"] - 1.828427) < 1e-6
    assert small["sgm_sigma"] == 0 and small["solved"] == 2 and small["count"] == 2
    large = rows[("EF-P", "large")]
    assert large["sgm_time"] == 1800 and large["accepted"] == 0
    assert rows[("EF-P", "all")]["count"] == 3
    single = summarize(recs[:1])
    assert single[0]["sgm_sigma"] == 0
    prof = performance_profile(recs)
    assert len(prof) == 101
    assert prof[0]["instances"] == 2 and prof[-1]["instances"] == 3
    assert rows_csv(prof).splitlines()[0] == "form,gap,instances"
    assert rows_csv([]) == ""
