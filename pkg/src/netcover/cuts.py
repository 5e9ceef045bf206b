"""No-good inequalities from infeasible vertex-to-pair assignments.

A pattern fixes, for every endpoint of a small edge set ``A``, which
``(edge, tag)`` pair serves it. If no placement of the referenced points lets
those residuals cover every edge of ``A``, the pattern's ``z`` variables
cannot all be one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .delimit import Delimitation
from .network import TOL, DistanceMatrix, Network
from .solve.simplex import simplex

Triple = tuple[int, int, str]  # (vertex, edge, tag)


@dataclass(frozen=True, order=True)
class CoverPattern:
    edges: tuple[int, ...]
    triples: tuple[Triple, ...]

    @property
    def rank(self) -> int:
        return len(self.triples) - 1

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(v for v, _, _ in self.triples)


@dataclass(frozen=True)
class NoGoodInequality:
    triples: tuple[Triple, ...]

    @property
    def rhs(self) -> int:
        return len(self.triples) - 1


def to_inequality(pattern: CoverPattern) -> NoGoodInequality:
    return NoGoodInequality(pattern.triples)


def is_connected_pattern(net: Network, pattern: CoverPattern) -> bool:
    """Triples are linked when they share an edge or their vertices are adjacent."""
    items = pattern.triples
    if len(items) <= 1:
        return True
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        vi, fi, _ = items[i]
        for j, (vj, fj, _) in enumerate(items):
            if j in seen:
                continue
            if fi == fj or (vi, vj) in net.edge_index or (vj, vi) in net.edge_index:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(items)


def _pattern_rows(net, dm, delta, edges, triples):
    """Rows ``sum c_j q_j >= k`` over point coordinates after substituting ``r_v``.

    Each triple fixes ``r_v = base + sign * q_f``.
    """
    resid = {}
    rows = []
    for v, f, t in triples:
        d = dm(v, net.end(f, t))
        if t == "a":
            base, sign = delta - d, -1.0
        else:
            base, sign = delta - d - net.length(f), 1.0
        resid[v] = (f, base, sign)
        rows.append(({f: sign}, -base))  # r_v >= 0
    for f in {f for _, f, _ in triples}:
        rows.append(({f: 1.0}, 0.0))
        rows.append(({f: -1.0}, -net.length(f)))
    for e in edges:
        edge = net.edges[e]
        coef: dict[int, float] = {}
        const = 0.0
        for v in (edge.a, edge.b):
            f, base, sign = resid[v]
            coef[f] = coef.get(f, 0.0) + sign
            const += base
        rows.append((coef, edge.length - const))
    return rows


def _fourier_motzkin(rows, tol: float = 1e-9) -> bool:
    rows = [({j: c for j, c in coef.items() if c != 0.0}, k) for coef, k in rows]
    cols = sorted({j for coef, _ in rows for j in coef})
    for j in cols:
        pos = [(c, k) for c, k in rows if c.get(j, 0.0) > 0]
        neg = [(c, k) for c, k in rows if c.get(j, 0.0) < 0]
        rest = [(c, k) for c, k in rows if j not in c]
        for cp, kp in pos:
            ap = cp[j]
            for cn, kn in neg:
                an = -cn[j]
                coef = {}
                for col in set(cp) | set(cn):
                    if col == j:
                        continue
                    val = cp.get(col, 0.0) / ap + cn.get(col, 0.0) / an
                    if abs(val) > 1e-12:
                        coef[col] = val
                rest.append((coef, kp / ap + kn / an))
        rows = rest
        for coef, k in rows:
            if not coef and k > tol:
                return False
    return all(k <= tol for coef, k in rows if not coef)


def feasibility_lp(
    net: Network, dm: DistanceMatrix, delta: float, edges, triples, method: str = "simplex"
) -> bool:
    """Is there a placement making ``r_v = delta - tau`` cover every edge of ``edges``?

    ``method`` picks the decision procedure: our phase-1 simplex, HiGHS via
    scipy, or exact Fourier-Motzkin elimination over the point coordinates
    (every row has at most two of them).
    """
    if method == "fm":
        return _fourier_motzkin(_pattern_rows(net, dm, delta, edges, triples))
    qs = sorted({f for _, f, _ in triples})
    vs = [v for v, _, _ in triples]
    col_q = {f: j for j, f in enumerate(qs)}
    col_r = {v: len(qs) + j for j, v in enumerate(vs)}
    n = len(qs) + len(vs)
    rows, lo, hi = [], [], []
    for v, f, t in triples:
        row = np.zeros(n)
        row[col_r[v]] = 1.0
        d = dm(v, net.end(f, t))
        if t == "a":
            row[col_q[f]] = 1.0
            rhs = delta - d
        else:
            row[col_q[f]] = -1.0
            rhs = delta - d - net.length(f)
        rows.append(row)
        lo.append(rhs)
        hi.append(rhs)
    for e in edges:
        edge = net.edges[e]
        row = np.zeros(n)
        row[col_r[edge.a]] += 1.0
        row[col_r[edge.b]] += 1.0
        rows.append(row)
        lo.append(edge.length)
        hi.append(np.inf)
    lb = np.zeros(n)
    ub = np.array([net.length(f) for f in qs] + [np.inf] * len(vs))
    if method == "highs":
        from scipy.optimize import linprog

        A = np.array(rows)
        eq = np.array(lo) == np.array(hi)
        res = linprog(
            np.zeros(n),
            A_ub=-A[~eq] if (~eq).any() else None,
            b_ub=-np.array(lo)[~eq] if (~eq).any() else None,
            A_eq=A[eq] if eq.any() else None,
            b_eq=np.array(lo)[eq] if eq.any() else None,
            bounds=list(zip(lb, ub)),
            method="highs",
        )
        return res.status == 0
    res = simplex(np.zeros(n), np.array(rows), np.array(lo), np.array(hi), lb, ub)
    if res.status == "error":
        raise RuntimeError("feasibility LP failed")
    return res.status == "optimal"


def _slack(net, dm, delta, v, f, t) -> float:
    return delta - dm(v, net.end(f, t))


def generate_nogood(
    net: Network,
    dm: DistanceMatrix,
    delim: Delimitation,
    delta: float,
    max_rank: int,
    method: str = "fm",
) -> list[CoverPattern]:
    """Infeasible connected patterns over edge subsets of size ``<= max_rank`` (1 or 2).

    Rank 1 uses the closed form ``(delta-d_a)_+ + (delta-d_b)_+ < l_e``. A
    two-edge pattern is skipped when one of its single-edge restrictions is
    already a rank-1 no-good, or when its triples are not connected;
    otherwise its LP decides. When the two restrictions share no variable the
    LP splits into their two (cached) single-edge LPs.
    """
    if max_rank not in (1, 2):
        raise ValueError("max_rank must be 1 or 2")
    out: list[CoverPattern] = []
    rank1: set[tuple[int, Triple, Triple]] = set()
    for e, edge in enumerate(net.edges):
        for fa, ta in delim.pairs[edge.a]:
            sa = max(_slack(net, dm, delta, edge.a, fa, ta), 0.0)
            for fb, tb in delim.pairs[edge.b]:
                sb = max(_slack(net, dm, delta, edge.b, fb, tb), 0.0)
                if sa + sb < edge.length - TOL:
                    ta_, tb_ = (edge.a, fa, ta), (edge.b, fb, tb)
                    rank1.add((e, ta_, tb_))
                    out.append(CoverPattern((e,), (ta_, tb_)))
    if max_rank == 1:
        return sorted(out)

    def lp(edges, triples) -> bool:
        return feasibility_lp(net, dm, delta, edges, triples, method)

    # single-edge assignments that survive the rank-1 test, with cached LP verdicts
    valid: dict[int, list[tuple[Triple, Triple, bool]]] = {}
    for e, edge in enumerate(net.edges):
        valid[e] = [
            (ta_, tb_, lp((e,), (ta_, tb_)))
            for ta_ in ((edge.a, f, t) for f, t in delim.pairs[edge.a])
            for tb_ in ((edge.b, f, t) for f, t in delim.pairs[edge.b])
            if (e, ta_, tb_) not in rank1
        ]

    rank2 = []
    for e1, e2 in itertools.combinations(range(net.m), 2):
        ends1 = (net.edges[e1].a, net.edges[e1].b)
        ends2 = (net.edges[e2].a, net.edges[e2].b)
        shared = set(ends1) & set(ends2)
        linked = any((min(u, w), max(u, w)) in net.edge_index for u in ends1 for w in ends2)
        if shared:
            (v,) = shared
            by_v: dict[Triple, list] = {}
            for item in valid[e2]:
                by_v.setdefault(item[0] if item[0][0] == v else item[1], []).append(item)
            for ta1, tb1, ok1 in valid[e1]:
                tv = ta1 if ta1[0] == v else tb1
                for ta2, tb2, ok2 in by_v.get(tv, ()):
                    trip = tuple(sorted({ta1, tb1, ta2, tb2}))
                    feasible = ok1 and ok2 and lp((e1, e2), trip)
                    if not feasible:
                        rank2.append(CoverPattern((e1, e2), trip))
            continue
        for ta1, tb1, ok1 in valid[e1]:
            q1 = {ta1[1], tb1[1]}
            for ta2, tb2, ok2 in valid[e2]:
                share_q = bool(q1 & {ta2[1], tb2[1]})
                if not (linked or share_q):
                    continue  # not connected
                trip = tuple(sorted((ta1, tb1, ta2, tb2)))
                if share_q:
                    feasible = ok1 and ok2 and lp((e1, e2), trip)
                else:
                    feasible = ok1 and ok2
                if not feasible:
                    rank2.append(CoverPattern((e1, e2), trip))
    return sorted(out) + sorted(rank2)
