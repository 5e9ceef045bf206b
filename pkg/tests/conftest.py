import itertools

import numpy as np
import pytest

from netcover.network import network_from_edges


def floyd_warshall(net):
    """Independent all-pairs oracle as a dict ``{(u, w): d}``."""
    vs = list(net.vertices)
    idx = {v: i for i, v in enumerate(vs)}
    d = np.full((len(vs), len(vs)), np.inf)
    np.fill_diagonal(d, 0.0)
    for e in net.edges:
        d[idx[e.a], idx[e.b]] = d[idx[e.b], idx[e.a]] = min(d[idx[e.a], idx[e.b]], e.length)
    for k in range(len(vs)):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return {(u, w): d[idx[u], idx[w]] for u in vs for w in vs}


def grid_points(net, e, count):
    return np.linspace(0.0, net.length(e), count)


def grid_distances(net, fw, e, f, xs, ys):
    """Shortest distances between grid points of edges ``e`` and ``f`` (all route choices)."""
    ea, eb, fa, fb = net.edges[e].a, net.edges[e].b, net.edges[f].a, net.edges[f].b
    le, lf = net.length(e), net.length(f)
    X = xs[:, None]
    Y = ys[None, :]
    options = [
        X + fw[(ea, fa)] + Y,
        X + fw[(ea, fb)] + (lf - Y),
        (le - X) + fw[(eb, fa)] + Y,
        (le - X) + fw[(eb, fb)] + (lf - Y),
    ]
    if e == f:
        options.append(np.abs(X - Y))
    return np.minimum.reduce(options)


@pytest.fixture
def p3():
    return network_from_edges([(1, 2, 1.0), (2, 3, 1.0)])


@pytest.fixture
def p2():
    return network_from_edges([(1, 2, 2.0)])


@pytest.fixture
def triangle():
    return network_from_edges([(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)])


def small_networks():
    """A handful of fixed irregular networks used across modules."""
    return [
        network_from_edges([(1, 2, 1.0), (2, 3, 1.0)]),
        network_from_edges([(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]),
        network_from_edges([(1, 2, 0.7), (2, 3, 1.3), (3, 4, 0.9), (4, 1, 1.1), (2, 4, 0.6)]),
        network_from_edges([(1, 2, 1.2), (1, 3, 0.5), (1, 4, 0.8), (4, 5, 1.4)]),
        network_from_edges([(1, 2, 0.55), (2, 3, 1.45), (3, 4, 1.0), (4, 5, 0.75), (5, 1, 1.2), (2, 5, 0.9)]),
    ]


def all_pairs(seq):
    return itertools.combinations(seq, 2)
