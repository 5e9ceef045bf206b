"""Delimitation sets restricting which installed points can serve a vertex."""

from __future__ import annotations

from dataclasses import dataclass

from .network import TAGS, TOL, DistanceMatrix, Network


class AssumptionError(ValueError):
    """An edge is longer than the covering radius; split the network first."""


Pair = tuple[int, str]


@dataclass(frozen=True)
class Delimitation:
    """Potential, complete and partial cover sets for one radius.

    ``pairs[v]`` lists the ``(edge, tag)`` pairs whose installed point may
    reach ``v`` through endpoint ``edge(tag)``; ``inverse[e]`` lists the
    ``(v, tag)`` pairs referring to edge ``e``.
    """

    delta: float
    potential: dict[int, frozenset[int]]
    complete: dict[int, frozenset[int]]
    partial: dict[int, frozenset[int]]
    pairs: dict[int, tuple[Pair, ...]]
    inverse: dict[int, tuple[Pair, ...]]
    trivial: bool = False

    def pair_count(self) -> int:
        return sum(len(p) for p in self.pairs.values())


@dataclass(frozen=True)
class BigMConstants:
    vertex: dict[int, float]
    pair: dict[tuple[int, int, str], float]


def check_assumption(net: Network, delta: float) -> None:
    for e in net.edges:
        if e.length > delta + TOL:
            raise AssumptionError(f"edge ({e.a}, {e.b}) of length {e.length} exceeds radius {delta}")


def _route_breakpoints(d_first: float, d_second: float, length: float) -> list[float]:
    # crossover of t + d_first and (length - t) + d_second
    t = (length + d_second - d_first) / 2.0
    return [min(max(t, 0.0), length)]


def worst_pair_distance(net: Network, dm: DistanceMatrix, e: int, f: int) -> float:
    """Exact ``max_{p in e, p' in f} d(p, p')``.

    For fixed ``p'`` the farthest point of ``e`` sits where the two routes
    through ``e``'s endpoints meet, giving ``(l_e + d(u, p') + d(w, p')) / 2``;
    the sum of the two concave route minima is maximised over the finite set
    of their breakpoints on ``f``.
    """
    ee, ff = net.edges[e], net.edges[f]
    if e == f:
        return (ee.length + dm(ee.a, ee.b)) / 2.0

    def to_point(v: int, t: float) -> float:
        return min(dm(v, ff.a) + t, dm(v, ff.b) + ff.length - t)

    candidates = [0.0, ff.length]
    for v in (ee.a, ee.b):
        candidates += _route_breakpoints(dm(v, ff.a), dm(v, ff.b), ff.length)
    best = max(to_point(ee.a, t) + to_point(ee.b, t) for t in candidates)
    return (ee.length + best) / 2.0


def build_delimitation(net: Network, dm: DistanceMatrix, delta: float) -> Delimitation:
    check_assumption(net, delta)
    reach = delta + TOL
    potential = {
        v: frozenset(
            k for k, e in enumerate(net.edges) if dm(v, e.a) <= reach or dm(v, e.b) <= reach
        )
        for v in net.vertices
    }
    complete = {
        e: frozenset(f for f in range(net.m) if worst_pair_distance(net, dm, e, f) <= reach)
        for e in range(net.m)
    }
    partial = {
        v: frozenset(
            f for f in potential[v] if any(f not in complete[e] for e in net.incident[v])
        )
        for v in net.vertices
    }
    pairs = {
        v: tuple(
            (f, tag)
            for f in sorted(partial[v])
            for tag in TAGS
            if dm(v, net.end(f, tag)) <= reach
        )
        for v in net.vertices
    }
    return Delimitation(delta, potential, complete, partial, pairs, _invert(net, pairs))


def trivial_delimitation(net: Network, delta: float | None = None) -> Delimitation:
    """No preprocessing: every edge may serve every vertex through both ends."""
    if delta is not None:
        check_assumption(net, delta)
    everything = frozenset(range(net.m))
    pairs = {v: tuple((f, tag) for f in range(net.m) for tag in TAGS) for v in net.vertices}
    return Delimitation(
        delta if delta is not None else float("nan"),
        potential={v: everything for v in net.vertices},
        complete={e: frozenset([e]) for e in range(net.m)},
        partial={v: everything for v in net.vertices},
        pairs=pairs,
        inverse=_invert(net, pairs),
        trivial=True,
    )


def _invert(net: Network, pairs: dict[int, tuple[Pair, ...]]) -> dict[int, tuple[Pair, ...]]:
    inverse: dict[int, list[Pair]] = {e: [] for e in range(net.m)}
    for v in net.vertices:
        for f, tag in pairs[v]:
            inverse[f].append((v, tag))
    return {e: tuple(vs) for e, vs in inverse.items()}


def bigm_constants(
    net: Network, dm: DistanceMatrix, delta: float, delim: Delimitation, tighten: bool = False
) -> BigMConstants:
    """Big-M constants for the vertex and pair rows.

    The trivial pair constant is ``max(delta, d) + l``; it equals
    ``delta + l`` on every delimited pair (``d <= delta``) and stays valid for
    the far pairs a trivial delimitation keeps. Tightening uses ``d + l``.
    """
    vertex = {v: delta for v in net.vertices}
    pair = {}
    for v in net.vertices:
        for f, tag in delim.pairs[v]:
            d = dm(v, net.end(f, tag))
            if tighten:
                pair[(v, f, tag)] = d + net.length(f)
            else:
                pair[(v, f, tag)] = max(delta, d) + net.length(f)
    return BigMConstants(vertex, pair)
