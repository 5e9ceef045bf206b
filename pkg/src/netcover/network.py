"""Network data model, instance parsing, shortest paths and edge splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

TOL = 1e-9

TAGS = ("a", "b")


class NetworkError(ValueError):
    """Base class for invalid instances."""


class MalformedLineError(NetworkError):
    pass


class NonPositiveLengthError(NetworkError):
    pass


class SelfLoopError(NetworkError):
    pass


class ParallelEdgeError(NetworkError):
    pass


class DisconnectedError(NetworkError):
    pass


class Edge(NamedTuple):
    a: int
    b: int
    length: float


class Point(NamedTuple):
    """A point on edge ``edge`` at distance ``x`` from its ``a`` endpoint."""

    edge: int
    x: float


@dataclass(frozen=True)
class Network:
    """Undirected connected network with positive edge lengths.

    Edges are stored with ``a < b``; an edge is identified by its position in
    ``edges``.
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    index: dict[int, int] = field(init=False, repr=False, compare=False)
    edge_index: dict[tuple[int, int], int] = field(init=False, repr=False, compare=False)
    incident: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(sorted(self.vertices))
        if len(set(vertices)) != len(vertices):
            raise NetworkError("duplicate vertex ids")
        index = {v: i for i, v in enumerate(vertices)}
        edges = []
        edge_index = {}
        incident = {v: [] for v in vertices}
        for k, (u, w, length) in enumerate(self.edges):
            if u == w:
                raise SelfLoopError(f"self-loop at vertex {u}")
            if u not in index or w not in index:
                raise NetworkError(f"edge ({u}, {w}) uses an unknown vertex")
            length = float(length)
            if not length > 0 or not math.isfinite(length):
                raise NonPositiveLengthError(f"edge ({u}, {w}) has length {length}")
            a, b = min(u, w), max(u, w)
            if (a, b) in edge_index:
                raise ParallelEdgeError(f"parallel edge ({a}, {b})")
            edge_index[(a, b)] = k
            edges.append(Edge(a, b, length))
            incident[a].append(k)
            incident[b].append(k)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "edge_index", edge_index)
        object.__setattr__(self, "incident", {v: tuple(es) for v, es in incident.items()})
        if len(vertices) > 1 and not self._connected():
            raise DisconnectedError("network is not connected")

    def _connected(self) -> bool:
        n_comp, _ = connected_components(self.adjacency(), directed=False)
        return n_comp == 1

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def length(self, e: int) -> float:
        return self.edges[e].length

    def end(self, e: int, tag: str) -> int:
        """Endpoint ``e(a)`` or ``e(b)``."""
        return self.edges[e].a if tag == "a" else self.edges[e].b

    def edge_id(self, u: int, w: int) -> int:
        return self.edge_index[(min(u, w), max(u, w))]

    def label(self, e: int) -> str:
        edge = self.edges[e]
        return f"{edge.a}_{edge.b}"

    def adjacency(self) -> csr_matrix:
        n = self.n
        rows = [self.index[e.a] for e in self.edges]
        cols = [self.index[e.b] for e in self.edges]
        data = [e.length for e in self.edges]
        return csr_matrix((data + data, (rows + cols, cols + rows)), shape=(n, n))

    def mean_edge_length(self) -> float:
        return math.fsum(e.length for e in self.edges) / self.m

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines += [f"{e.a} {e.b} {e.length!r}" for e in self.edges]
        return "\n".join(lines) + "\n"


def parse_instance(text: str) -> Network:
    """Parse the ``n m`` / ``u v len`` instance format.

    Vertex ids are 1-based; lines starting with ``#`` are comments.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line.split()))
    if not rows:
        raise MalformedLineError("empty instance")
    lineno, header = rows[0]
    try:
        n, m = (int(tok) for tok in header)
    except ValueError:
        raise MalformedLineError(f"line {lineno}: expected 'n m', got {' '.join(header)!r}") from None
    if n < 1 or m < 0:
        raise MalformedLineError(f"line {lineno}: bad header {n} {m}")
    body = rows[1:]
    if len(body) != m:
        raise MalformedLineError(f"expected {m} edge lines, found {len(body)}")
    edges = []
    for lineno, toks in body:
        if len(toks) != 3:
            raise MalformedLineError(f"line {lineno}: expected 'u v len'")
        try:
            u, w, length = int(toks[0]), int(toks[1]), float(toks[2])
        except ValueError:
            raise MalformedLineError(f"line {lineno}: cannot parse {' '.join(toks)!r}") from None
        if not (1 <= u <= n and 1 <= w <= n):
            raise MalformedLineError(f"line {lineno}: vertex id out of range 1..{n}")
        if not length > 0:
            raise NonPositiveLengthError(f"line {lineno}: nonpositive length {length}")
        edges.append((u, w, length))
    return Network(tuple(range(1, n + 1)), tuple(edges))


def read_instance(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


class DistanceMatrix:
    """Vertex-to-vertex shortest path lengths, addressed by vertex id."""

    def __init__(self, net: Network, array: np.ndarray):
        self.index = net.index
        self.array = array
        self.array.setflags(write=False)

    def __call__(self, u: int, w: int) -> float:
        return float(self.array[self.index[u], self.index[w]])


def all_pairs_distances(net: Network) -> DistanceMatrix:
    dist = dijkstra(net.adjacency(), directed=False)
    return DistanceMatrix(net, np.asarray(dist, dtype=float))


@dataclass(frozen=True)
class SplitResult:
    """Split network plus the map back to the original one.

    ``pieces[k] = (orig_edge, t_a, t_b)`` gives the original-edge coordinates
    of split edge ``k``'s ``a`` and ``b`` ends.
    """

    network: Network
    original: Network
    pieces: tuple[tuple[int, float, float], ...]
    vertex_position: dict[int, tuple[int, float]]

    @property
    def n_sd(self) -> int:
        return self.network.n

    def to_original(self, p: Point) -> Point:
        orig, ta, tb = self.pieces[p.edge]
        x = ta + math.copysign(1.0, tb - ta) * p.x
        return Point(orig, min(max(x, 0.0), self.original.length(orig)))

    def to_split(self, p: Point) -> Point:
        best = None
        for k, (orig, ta, tb) in enumerate(self.pieces):
            if orig != p.edge:
                continue
            lo, hi = min(ta, tb), max(ta, tb)
            if lo - TOL <= p.x <= hi + TOL:
                x = abs(p.x - ta)
                best = Point(k, min(max(x, 0.0), self.network.length(k)))
                break
        if best is None:
            raise ValueError(f"point {p} is outside edge {p.edge}")
        return best


def split_edges(net: Network, delta: float) -> SplitResult:
    """Split every edge longer than ``delta`` into ``ceil(l/delta)`` equal pieces."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    next_id = max(net.vertices) + 1
    edges = []
    pieces = []
    position = {}
    for k, e in enumerate(net.edges):
        count = max(1, math.ceil(e.length / delta - TOL))
        if count == 1:
            edges.append((e.a, e.b, e.length))
            pieces.append((k, 0.0, e.length))
            continue
        step = e.length / count
        chain = [e.a]
        for j in range(1, count):
            position[next_id] = (k, j * step)
            chain.append(next_id)
            next_id += 1
        chain.append(e.b)
        coords = [j * step for j in range(count)] + [e.length]
        for j in range(count):
            u, w = chain[j], chain[j + 1]
            if u < w:
                edges.append((u, w, step))
                pieces.append((k, coords[j], coords[j + 1]))
            else:
                edges.append((w, u, step))
                pieces.append((k, coords[j + 1], coords[j]))
    split = Network(tuple(net.vertices) + tuple(sorted(position)), tuple(edges))
    return SplitResult(split, net, tuple(pieces), position)


def point_distance(net: Network, dm: DistanceMatrix, p: Point, q: Point) -> float:
    ep, eq = net.edges[p.edge], net.edges[q.edge]
    if p.edge == q.edge:
        length = ep.length
        return min(
            abs(p.x - q.x),
            p.x + dm(ep.a, ep.b) + (length - q.x),
            (length - p.x) + dm(ep.b, ep.a) + q.x,
        )
    offsets_p = ((ep.a, p.x), (ep.b, ep.length - p.x))
    offsets_q = ((eq.a, q.x), (eq.b, eq.length - q.x))
    return min(op + dm(u, w) + oq for u, op in offsets_p for w, oq in offsets_q)


def vertex_point_distance(net: Network, dm: DistanceMatrix, v: int, p: Point) -> float:
    e = net.edges[p.edge]
    return min(dm(v, e.a) + p.x, dm(v, e.b) + e.length - p.x)


def vertex_point(net: Network, v: int) -> Point:
    """A point located at vertex ``v``, expressed on its first incident edge."""
    e = net.incident[v][0]
    return Point(e, 0.0 if net.edges[e].a == v else net.edges[e].length)


def tau(net: Network, dm: DistanceMatrix, v: int, e: int, tag: str, x: float) -> float:
    """Distance from ``v`` to the point at coordinate ``x`` of ``e`` routed via ``e(tag)``."""
    if tag == "a":
        return dm(v, net.end(e, "a")) + x
    return dm(v, net.end(e, "b")) + net.length(e) - x


def network_from_edges(edges: Iterable[tuple[int, int, float]]) -> Network:
    edges = tuple(edges)
    vertices = sorted({u for u, _, _ in edges} | {w for _, w, _ in edges})
    return Network(tuple(vertices), edges)
