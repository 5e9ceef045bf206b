"""Acceptance suite: one PASS/FAIL line per criterion, printed at the end of the module.

The random suite is solved once (module fixture) and shared by the criteria.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import linprog

from netcover.cuts import CoverPattern, feasibility_lp, generate_nogood
from netcover.delimit import build_delimitation
from netcover.formulations import Cover, FormulationKind, formulate, q_, r_, z_
from netcover.harness import (
    MetricsRecord,
    metrics,
    radius_for,
    random_suite,
    records_csv,
    run_bench,
    sgm,
    solve_instance,
)
from netcover.network import all_pairs_distances, network_from_edges, split_edges
from netcover.solve import SolveResult, solve_lp
from netcover.verify import check_cover, oracle_optimum

SUITE_SIZE = 50
KINDS = {
    "EF": FormulationKind("ef"),
    "EF-P": FormulationKind("efp"),
    "EF-PI": FormulationKind("efpi"),
    "EF-PD": FormulationKind("efpd"),
    "EF-PD/agg": FormulationKind("efpd", aggregate=True),
    "EF-PV1": FormulationKind("efpv1"),
    "EF-PV2": FormulationKind("efpv2"),
}
TIME_LIMIT = 300.0

LINES: dict[int, str] = {}


def report(number: int, title: str, ok: bool, detail: str) -> None:
    LINES[number] = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.getplugin("terminalreporter")
    lines = ["", "acceptance summary"] + [LINES[k] for k in sorted(LINES)]
    for line in lines:
        if tr is not None:
            tr.write_line(line)
        else:
            print(line)


class Cell:
    """One (instance, radius) pair with everything the criteria need."""

    def __init__(self, name, net, radius_kind):
        self.name = name
        self.net = net
        self.radius_kind = radius_kind
        self.delta = radius_for(net, radius_kind)
        self.split = split_edges(net, self.delta)
        self.snet = self.split.network
        self.dm = all_pairs_distances(self.snet)
        self.delim = build_delimitation(self.snet, self.dm, self.delta)
        self.optimum = oracle_optimum(self.snet, self.dm, self.delim, self.delta, k_max=10)
        self.results = {}  # tag -> (primal, status, split cover, original cover, values or None)
        self.cut_slack = {}  # tag -> smallest no-good slack of its normalised incumbent
        self.bigm_violations = {}  # dp tag -> violated big-M rows of its incumbent


@pytest.fixture(scope="module")
def cells():
    t0 = time.perf_counter()
    out = []
    for name, net in random_suite(SUITE_SIZE):
        for radius_kind in ("small", "large"):
            cell = Cell(name, net, radius_kind)
            pv2 = efp_model = None
            for tag, kind in KINDS.items():
                o = solve_instance(net, cell.delta, kind, time_limit=TIME_LIMIT)
                res = o.result
                keep = res.values if tag in ("EF-P", "EF-PD", "EF-PD/agg") else None
                cell.results[tag] = (res.primal, res.status, res.cover, o.cover, keep)
                if tag == "EF-P":
                    efp_model = o.formulation.model
                if tag == "EF-PV2":
                    pv2 = o.formulation
            for tag, (_, _, split_cover, _, values) in cell.results.items():
                if split_cover is not None:
                    cell.cut_slack[tag] = min_cut_slack(pv2, split_cover)
                if tag.startswith("EF-PD") and values is not None:
                    projected = {v: values[v] for v in efp_model.variables}
                    cell.bigm_violations[tag] = efp_model.violations(projected, tol=1e-7)
            out.append(cell)
    print(f"suite solved in {time.perf_counter() - t0:.1f}s")
    return out


def min_cut_slack(form, cover):
    values = form.assignment(cover)
    slack = math.inf
    for row in form.model.constraints:
        if row.name.startswith("nogood_"):
            slack = min(slack, row.rhs - sum(c * values[v] for v, c in row.coeffs))
    return slack


# 1 ---------------------------------------------------------------------------

def test_formulations_match_oracle(cells):
    bad = []
    for cell in cells:
        for tag, (primal, status, *_rest) in cell.results.items():
            if status != "optimal" or primal != cell.optimum:
                bad.append(f"{cell.name}/{cell.radius_kind}/{tag}: {primal} ({status}) vs {cell.optimum}")
    n = len(cells) * len(KINDS)
    report(1, "formulation equivalence", not bad, f"{n - len(bad)}/{n} solves equal the oracle")
    assert not bad, bad[:10]


# 2 ---------------------------------------------------------------------------

def test_relaxation_ordering(cells):
    bad, ef_weaker, agg_weaker = [], 0, 0
    for cell in cells:
        roots = {}
        for tag in ("EF", "EF-P", "EF-PD", "EF-PD/agg"):
            form = formulate(cell.snet, cell.delta, KINDS[tag], cell.dm)
            lp = solve_lp(form.model, method="highs")
            assert lp.status == "optimal"
            roots[tag] = lp.objective
        if roots["EF-PD"] < roots["EF-P"] - 1e-9:
            bad.append((cell.name, cell.radius_kind, roots["EF-PD"], roots["EF-P"]))
        ef_weaker += roots["EF-P"] < roots["EF"] - 1e-9
        agg_weaker += roots["EF-PD/agg"] < roots["EF-P"] - 1e-9
    detail = (
        f"EF-PD >= EF-P on {len(cells) - len(bad)}/{len(cells)} cells; "
        f"recorded: EF-P below EF on {ef_weaker}, aggregated EF-PD below EF-P on {agg_weaker}"
    )
    report(2, "relaxation ordering", not bad, detail)
    assert not bad, bad[:10]


# 3 ---------------------------------------------------------------------------

def test_cut_validity(cells):
    bad = []
    worst = math.inf
    for cell in cells:
        base = cell.results["EF-P"][0]
        for tag in ("EF-PV1", "EF-PV2"):
            if cell.results[tag][0] != base:
                bad.append(f"{cell.name}/{cell.radius_kind}/{tag} objective {cell.results[tag][0]} vs {base}")
        for tag, slack in cell.cut_slack.items():
            worst = min(worst, slack)
            if slack < -1e-9:
                bad.append(f"{cell.name}/{cell.radius_kind}/{tag} incumbent violates a cut by {-slack}")
    report(3, "cut validity", not bad, f"{len(bad)} problems, smallest cut slack {worst:g}")
    assert not bad, bad[:10]


# 4 ---------------------------------------------------------------------------

def test_cover_verification(cells):
    bad = []
    for cell in cells:
        dm = all_pairs_distances(cell.net)
        for tag, (_, _, _, cover, _) in cell.results.items():
            if cover is None or not check_cover(cell.net, dm, cell.delta, cover):
                bad.append(f"{cell.name}/{cell.radius_kind}/{tag}")
    checked = 0
    for cell in [c for c in cells if c.radius_kind == "small"][:10]:
        dm = all_pairs_distances(cell.net)
        cover = cell.results["EF-P"][3]
        for i in range(len(cover)):
            rest = Cover(cover.points[:i] + cover.points[i + 1 :])
            if check_cover(cell.net, dm, cell.delta, rest):
                bad.append(f"{cell.name}: cover stays valid without point {i}")
        checked += 1
    report(4, "cover verification", not bad, f"{len(bad)} problems; minimality checked on {checked} instances")
    assert not bad and checked == 10, bad[:10]


# 5 ---------------------------------------------------------------------------

def dp_projection(cell, values, v):
    """Per-vertex disjunctive system with the binaries and ``(r_v, q)`` of ``values`` fixed.

    Returns the largest residual of the linking equalities, or ``None`` when
    the system is infeasible.
    """
    net, dm, delta = cell.snet, cell.dm, cell.delta
    pairs = list(cell.delim.pairs[v])
    partial = sorted(cell.delim.partial[v])
    if not pairs:
        return 0.0 if values[r_(v)] <= 1e-7 else None
    z = [round(values[z_(net, v, f, t)]) for f, t in pairs]
    n_p = len(pairs)
    col_r = list(range(n_p))
    col_q = list(range(n_p, 2 * n_p))
    col_n = {f: 2 * n_p + j for j, f in enumerate(partial)}
    n = 2 * n_p + len(partial)
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    row = np.zeros(n)
    row[col_r] = 1.0
    A_eq.append(row)
    b_eq.append(values[r_(v)])
    for f in partial:
        row = np.zeros(n)
        row[col_n[f]] = 1.0
        for k, (g, _) in enumerate(pairs):
            if g == f:
                row[col_q[k]] = 1.0
        A_eq.append(row)
        b_eq.append(values[q_(net, f)])
    bounds = [(0, None)] * n
    for k, (f, t) in enumerate(pairs):
        d = dm(v, net.end(f, t))
        row = np.zeros(n)
        row[col_r[k]] = 1.0
        if t == "a":
            row[col_q[k]] = 1.0
            rhs = (delta - d) * z[k]
        else:
            row[col_q[k]] = -1.0
            rhs = (delta - d - net.length(f)) * z[k]
        A_ub.append(row)
        b_ub.append(rhs)
        bounds[col_q[k]] = (0, z[k] * net.length(f))
    for f in partial:
        used = sum(z[k] for k, (g, _) in enumerate(pairs) if g == f)
        bounds[col_n[f]] = (0, (1 - used) * net.length(f))
    A_eq, A_ub = np.array(A_eq), np.array(A_ub)
    res = linprog(np.zeros(n), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return float(np.max(np.abs(A_eq @ res.x - np.array(b_eq))))


def test_theorem_projection(cells):
    bad = []
    worst = 0.0
    checked = 0
    for cell in cells:
        if cell.snet.m > 12:
            continue
        efp = formulate(cell.snet, cell.delta, "efp", cell.dm)
        solutions = [cell.results["EF-P"][4]]
        solutions += [efp.assignment(r[2]) for r in cell.results.values() if r[2] is not None]
        for values in solutions:
            assert not efp.model.violations(values)
            for v in cell.snet.vertices:
                resid = dp_projection(cell, values, v)
                checked += 1
                if resid is None or resid > 1e-7:
                    bad.append(f"{cell.name}/{cell.radius_kind} vertex {v}: {resid}")
                else:
                    worst = max(worst, resid)
        for tag, viol in cell.bigm_violations.items():
            if viol:
                bad.append(f"{cell.name}/{cell.radius_kind}/{tag} breaks big-M rows {viol[:3]}")
    report(5, "per-vertex projection", not bad, f"{checked} vertex systems, largest residual {worst:.1e}; {len(bad)} problems")
    assert not bad and checked > 0, bad[:10]


# 6 ---------------------------------------------------------------------------

def halve(net):
    nxt = max(net.vertices) + 1
    edges = []
    for e in net.edges:
        edges += [(e.a, nxt, e.length / 2), (nxt, e.b, e.length / 2)]
        nxt += 1
    return network_from_edges(edges)


def test_subdivision_invariance(cells):
    bad = []
    picked = [c for c in cells if c.radius_kind == "small"][:10]
    for cell in picked:
        fine = halve(cell.snet)
        assert fine.m == 2 * cell.snet.m
        dm = all_pairs_distances(fine)
        opt = oracle_optimum(fine, dm, build_delimitation(fine, dm, cell.delta), cell.delta, k_max=10)
        efp = solve_instance(fine, cell.delta, "efp", time_limit=TIME_LIMIT).result
        if opt != cell.optimum or efp.primal != cell.results["EF-P"][0]:
            bad.append(f"{cell.name}: oracle {opt} vs {cell.optimum}, EF-P {efp.primal} vs {cell.results['EF-P'][0]}")
    report(6, "subdivision invariance", not bad, f"{len(picked) - len(bad)}/{len(picked)} halved instances unchanged")
    assert not bad and len(picked) == 10, bad


# 7 ---------------------------------------------------------------------------

def test_metrics():
    def res(primal, dual):
        return SolveResult(status="optimal", primal=primal, dual=dual, nodes=0, time=0.0)

    checks = [
        abs(metrics(res(3, 2), 5)[0] - 1 / 3) <= 1e-12,
        abs(metrics(res(2, 2), 4)[1] - 0.5) <= 1e-12,
        metrics(res(2, 2), 4)[0] == 0,
        abs(sgm([1, 3], 1) - (2 * math.sqrt(2) - 1)) <= 1e-12,
        sgm([5], 0) == 5,
        abs(sgm([0, 0], 1)) <= 1e-12,
        metrics(res(math.inf, -math.inf), 3) == (1.0, 1.0),
    ]
    records = run_bench([("broken", None)], ["efp"], ["small"], timing=False)
    sentinel = records[0]
    checks.append((sentinel.time_s, sentinel.sigma, sentinel.vr) == (1800, 1, 1))
    checks.append(records_csv(records).splitlines()[1] == "broken,EF-P,small,1800.0,1.0,1.0,error,0")
    checks.append(MetricsRecord.sentinel("x", "EF", "large").time_s == 1800)
    ok = all(checks)
    report(7, "metrics", ok, f"{sum(checks)}/{len(checks)} checks")
    assert ok, checks


# 8 ---------------------------------------------------------------------------

def test_closed_form_against_lp(cells):
    distinct = shared = 0
    bad = []
    for cell in cells:
        net, dm, delim, delta = cell.snet, cell.dm, cell.delim, cell.delta
        closed = set(generate_nogood(net, dm, delim, delta, 1))
        for e, edge in enumerate(net.edges):
            for fa, ta in delim.pairs[edge.a]:
                for fb, tb in delim.pairs[edge.b]:
                    trip = ((edge.a, fa, ta), (edge.b, fb, tb))
                    infeasible_cf = CoverPattern((e,), trip) in closed
                    feasible_lp = feasibility_lp(net, dm, delta, (e,), trip, "simplex")
                    if fa != fb:
                        distinct += 1
                        if infeasible_cf == feasible_lp:
                            bad.append((cell.name, cell.radius_kind, trip))
                    else:
                        shared += 1
                        if infeasible_cf and feasible_lp:
                            bad.append((cell.name, cell.radius_kind, trip))
    report(8, "closed form vs LP", not bad, f"{distinct} distinct-edge and {shared} shared-edge patterns, {len(bad)} disagreements")
    assert not bad, bad[:10]
