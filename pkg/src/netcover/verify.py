"""Cover checking, an exhaustive optimality oracle and reference covers."""

from __future__ import annotations

import itertools
import time
from collections import deque

import numpy as np

from .delimit import Delimitation
from .formulations import Cover
from .network import TOL, DistanceMatrix, Network, Point, SplitResult, vertex_point, vertex_point_distance
from .solve.simplex import simplex


class OracleLimitError(RuntimeError):
    pass


def _check_points(net: Network, cover: Cover) -> None:
    for p in cover.points:
        if not 0 <= p.edge < net.m:
            raise ValueError(f"point {p} refers to an unknown edge")
        if not -TOL <= p.x <= net.length(p.edge) + TOL:
            raise ValueError(f"point {p} lies outside its edge")


def uncovered_edges(net: Network, dm: DistanceMatrix, delta: float, cover: Cover) -> list[int]:
    """Edges not entirely within ``delta`` of the cover.

    Each edge is checked as a union of closed intervals: ``[x - delta,
    x + delta]`` for points on it and the residual reach through either
    endpoint. This is exact for any edge length.
    """
    _check_points(net, cover)
    bad = []
    reach = {}
    for v in net.vertices:
        best = -np.inf
        for p in cover.points:
            best = max(best, delta - vertex_point_distance(net, dm, v, p))
        reach[v] = best
    for e, edge in enumerate(net.edges):
        length = edge.length
        spans = []
        if reach[edge.a] >= -TOL:
            spans.append((0.0, max(reach[edge.a], 0.0)))
        if reach[edge.b] >= -TOL:
            spans.append((length - max(reach[edge.b], 0.0), length))
        for p in cover.points:
            if p.edge == e:
                spans.append((p.x - delta, p.x + delta))
        spans.sort()
        covered = 0.0
        ok = False
        for lo, hi in spans:
            if lo > covered + TOL:
                break
            covered = max(covered, hi)
            if covered >= length - TOL:
                ok = True
                break
        if not ok:
            bad.append(e)
    return bad


def check_cover(net: Network, dm: DistanceMatrix, delta: float, cover: Cover) -> bool:
    return not uncovered_edges(net, dm, delta, cover)


def trivial_cover(split: SplitResult) -> Cover:
    """Every node of the split network, expressed on original edges."""
    net = split.original
    points = [vertex_point(net, v) for v in net.vertices]
    points += [Point(*split.vertex_position[v]) for v in sorted(split.vertex_position)]
    return Cover(tuple(points))


def spanning_tree_cover(net: Network) -> Cover:
    """One point per BFS-tree edge, placed at the child vertex.

    Every vertex hosts a point, so with ``l_e <= delta`` every edge is covered,
    and no edge carries two points.
    """
    root = net.vertices[0]
    seen = {root}
    queue = deque([root])
    points = []
    while queue:
        u = queue.popleft()
        for e in net.incident[u]:
            edge = net.edges[e]
            w = edge.b if edge.a == u else edge.a
            if w in seen:
                continue
            seen.add(w)
            queue.append(w)
            points.append(Point(e, 0.0 if edge.a == w else edge.length))
    return Cover(tuple(points))


# oracle ------------------------------------------------------------------

def place_points(net, dm, delta, support, assign, edges) -> dict[int, float] | None:
    """Coordinates on ``support`` meeting ``r_v <= delta - tau``, ``r >= 0``, ``l_e <= r_a + r_b``.

    ``assign`` maps each endpoint of ``edges`` to its serving ``(edge, tag)``
    or to ``None`` (no residual). Returns ``None`` when no placement exists.
    """
    verts = sorted({v for e in edges for v in (net.edges[e].a, net.edges[e].b)})
    col_q = {f: j for j, f in enumerate(support)}
    col_r = {v: len(support) + j for j, v in enumerate(verts)}
    n = len(support) + len(verts)
    rows, lo, hi = [], [], []
    ub = np.array([net.length(f) for f in support] + [np.inf] * len(verts))
    for v in verts:
        choice = assign[v]
        if choice is None:
            ub[col_r[v]] = 0.0
            continue
        f, t = choice
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
        lo.append(-np.inf)
        hi.append(rhs)
    for e in edges:
        edge = net.edges[e]
        row = np.zeros(n)
        row[col_r[edge.a]] += 1.0
        row[col_r[edge.b]] += 1.0
        rows.append(row)
        lo.append(edge.length)
        hi.append(np.inf)
    res = simplex(np.zeros(n), np.array(rows), np.array(lo), np.array(hi), np.zeros(n), ub)
    if res.status == "error":
        raise RuntimeError("placement LP failed")
    if res.status != "optimal":
        return None
    return {f: float(res.x[col_q[f]]) for f in support}


def support_feasible(
    net: Network, dm: DistanceMatrix, delim: Delimitation, delta: float, support
) -> bool:
    """Can one point on each edge of ``support`` be placed to cover the network?"""
    return find_placement(net, dm, delim, delta, support) is not None


def find_placement(
    net: Network, dm: DistanceMatrix, delim: Delimitation, delta: float, support
) -> dict[int, float] | None:
    """Coordinates for one point on each edge of ``support`` forming a cover, or ``None``."""
    support = tuple(sorted(support))
    chosen = set(support)
    rest = [e for e in range(net.m) if not (delim.complete[e] & chosen)]
    if not rest:
        return {f: 0.0 for f in support}
    verts = sorted({v for e in rest for v in (net.edges[e].a, net.edges[e].b)})
    options = {}
    for v in verts:
        opts = []
        for f in support:
            for t in ("a", "b"):
                s = delta - dm(v, net.end(f, t))
                if s >= -TOL:
                    opts.append((s, f, t))
        opts.sort(key=lambda o: (-o[0], o[1], o[2]))
        options[v] = opts
    best = {v: max([o[0] for o in options[v]] + [0.0]) for v in verts}
    for e in rest:
        edge = net.edges[e]
        if max(best[edge.a], 0.0) + max(best[edge.b], 0.0) < edge.length - TOL:
            return None

    # visit vertices so that edges close early
    order = []
    pending = set(verts)
    adj = {v: [] for v in verts}
    for e in rest:
        edge = net.edges[e]
        adj[edge.a].append(edge.b)
        adj[edge.b].append(edge.a)
    while pending:
        start = min(pending, key=lambda v: (-len(adj[v]), v))
        queue = deque([start])
        pending.discard(start)
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in sorted(adj[u]):
                if w in pending:
                    pending.discard(w)
                    queue.append(w)
    closes = {}
    placed = set()
    for v in order:
        placed.add(v)
        closes[v] = [e for e in rest if v in (net.edges[e].a, net.edges[e].b)
                     and net.edges[e].a in placed and net.edges[e].b in placed]

    assign: dict[int, tuple | None] = {}
    slack: dict[int, float] = {}

    found: list[dict[int, float]] = []

    def dfs(i: int) -> bool:
        if i == len(order):
            placed = place_points(net, dm, delta, support, assign, rest)
            if placed is None:
                return False
            found.append(placed)
            return True
        v = order[i]
        for choice in [(s, f, t) for s, f, t in options[v]] + [None]:
            if choice is None:
                assign[v], slack[v] = None, 0.0
            else:
                assign[v], slack[v] = (choice[1], choice[2]), max(choice[0], 0.0)
            ok = all(
                slack[net.edges[e].a] + slack[net.edges[e].b] >= net.edges[e].length - TOL
                for e in closes[v]
            )
            if ok and closes[v]:
                done = [e for u in order[: i + 1] for e in closes[u]]
                ok = place_points(net, dm, delta, support, assign, done) is not None
            if ok and dfs(i + 1):
                return True
        del assign[v], slack[v]
        return False

    return found[0] if dfs(0) else None


def improve_cover(
    net: Network,
    dm: DistanceMatrix,
    delim: Delimitation,
    delta: float,
    cover: Cover,
    time_budget: float = 2.0,
) -> Cover:
    """Local search over supports starting from ``cover``.

    Drops single edges from the support while the rest can still be placed,
    and when none can go, tries replacing two edges by one. Placements are
    exact (see ``find_placement``); the search stops at a local optimum or
    when ``time_budget`` seconds have passed.
    """
    start = time.perf_counter()
    cache: dict[tuple[int, ...], dict | None] = {}

    def place(support):
        key = tuple(sorted(support))
        if key not in cache:
            cache[key] = find_placement(net, dm, delim, delta, key)
        return cache[key]

    support = sorted({p.edge for p in cover.points})
    best = {p.edge: p.x for p in cover.points}
    improved = True
    while improved and time.perf_counter() - start < time_budget:
        improved = False
        for e in list(support):
            rest = [f for f in support if f != e]
            if rest and place(rest) is not None:
                support, best, improved = rest, place(rest), True
        if improved:
            continue
        for e1, e2 in itertools.combinations(support, 2):
            base = [f for f in support if f not in (e1, e2)]
            for f in range(net.m):
                if f in support or place(base + [f]) is None:
                    continue
                support, best, improved = sorted(base + [f]), place(base + [f]), True
                break
            if improved or time.perf_counter() - start > time_budget:
                break
    points = tuple(Point(e, min(max(best[e], 0.0), net.length(e))) for e in sorted(best))
    result = Cover(points)
    return result if check_cover(net, dm, delta, result) else cover


def oracle_optimum(
    net: Network, dm: DistanceMatrix, delim: Delimitation, delta: float, k_max: int = 6
) -> int:
    """Smallest number of points covering ``net`` found by exhaustive support search."""
    for k in range(1, k_max + 1):
        for support in itertools.combinations(range(net.m), k):
            if support_feasible(net, dm, delim, delta, support):
                return k
    raise OracleLimitError(f"no cover with at most {k_max} points")
