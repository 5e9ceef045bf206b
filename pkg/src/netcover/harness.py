"""Radius policies, random instances, the solve pipeline and benchmark metrics."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .formulations import Cover, Formulation, FormulationKind, formulate
from .network import Network, SplitResult, all_pairs_distances, network_from_edges, split_edges
from .solve import BnBConfig, SolveResult, branch_and_bound
from .delimit import build_delimitation
from .verify import improve_cover, spanning_tree_cover

log = logging.getLogger(__name__)

SENTINEL_TIME = 1800.0
CSV_FIELDS = ("instance", "form", "radius", "time_s", "sigma", "vr", "status", "nodes")
RADII = ("small", "large")
# placement decisions first; the rest follow most-fractional order
BRANCH_PRIORITY = ("y_",)


def radius_for(net: Network, kind: str) -> float:
    mean = net.mean_edge_length()
    if kind == "small":
        return mean
    if kind == "large":
        return 2.0 * mean
    raise ValueError(f"unknown radius kind {kind!r}")


def parse_radius(net: Network, text: str) -> float:
    if text in RADII:
        return radius_for(net, text)
    value = float(text)
    if not value > 0:
        raise ValueError("radius must be positive")
    return value


def sgm(values: Sequence[float], shift: float) -> float:
    """Shifted geometric mean ``(prod (v + s))^(1/M) - s``."""
    values = list(values)
    if not values:
        raise ValueError("sgm of an empty list")
    if any(v < 0 for v in values) or shift < 0:
        raise ValueError("sgm needs non-negative values and shift")
    if len(set(values)) == 1:  # exact for singletons and constant lists
        return float(values[0])
    if any(v + shift == 0 for v in values):
        return -float(shift)
    return math.exp(math.fsum(math.log(v + shift) for v in values) / len(values)) - shift


def metrics(result: SolveResult, n_sd: int) -> tuple[float, float]:
    """Relative gap and normalised primal bound; sentinel ``(1, 1)`` without an incumbent."""
    primal, dual = result.primal, result.dual
    if not math.isfinite(primal) or primal <= 0:
        return 1.0, 1.0
    sigma = min(max((primal - dual) / primal, 0.0), 1.0)
    return sigma, primal / n_sd


def gen_random(n: int, p: float, seed: int) -> Network:
    """Erdős–Rényi ``G(n, p)`` on vertices ``1..n``, repaired to be connected.

    Components are joined along a uniformly random labelled tree (via a Prüfer
    sequence) using a random vertex of each component. Lengths are uniform on
    ``[0.5, 1.5]``, rounded to 4 decimals.
    """
    if n < 2:
        raise ValueError("need at least 2 vertices")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    draws = rng.random(len(pairs))
    edges = [pair for pair, r in zip(pairs, draws) if r < p]

    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    comps: dict[int, list[int]] = {}
    for v in range(1, n + 1):
        comps.setdefault(find(v), []).append(v)
    groups = sorted(comps.values())
    c = len(groups)
    if c > 1:
        for i, j in _prufer_tree(c, rng):
            u = int(rng.choice(groups[i]))
            w = int(rng.choice(groups[j]))
            edges.append((min(u, w), max(u, w)))
    edges.sort()
    lengths = np.round(rng.uniform(0.5, 1.5, size=len(edges)), 4)
    return network_from_edges((a, b, float(x)) for (a, b), x in zip(edges, lengths))


def _prufer_tree(c: int, rng) -> list[tuple[int, int]]:
    if c == 2:
        return [(0, 1)]
    seq = [int(x) for x in rng.integers(0, c, size=c - 2)]
    degree = [1] * c
    for x in seq:
        degree[x] += 1
    out = []
    for x in seq:
        leaf = min(i for i in range(c) if degree[i] == 1)
        out.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, w = [i for i in range(c) if degree[i] == 1]
    out.append((u, w))
    return out


# solve pipeline ----------------------------------------------------------

@dataclass
class SolveOutcome:
    result: SolveResult
    formulation: Formulation
    split: SplitResult
    cover: Cover | None  # on the original network
    build_time: float

    @property
    def total_time(self) -> float:
        return self.build_time + self.result.time


def solve_instance(
    net: Network,
    radius: float,
    kind: FormulationKind | str,
    time_limit: float | None = None,
    method: str = "highs",
    node_limit: int | None = None,
    heuristic: bool = True,
) -> SolveOutcome:
    """Split, delimit, build, warm-start and solve one instance.

    The warm start is a BFS spanning-tree cover, shrunk by ``improve_cover``
    unless ``heuristic`` is off.
    """
    t0 = time.perf_counter()
    split = split_edges(net, radius)
    snet = split.network
    dm = all_pairs_distances(snet)
    form = formulate(snet, radius, kind, dm)
    delim = form.delim if form.kind.delimited else build_delimitation(snet, dm, radius)
    start_cover = spanning_tree_cover(snet)
    if heuristic:
        start_cover = improve_cover(snet, dm, delim, radius, start_cover)
    warm = form.assignment(start_cover)
    build_time = time.perf_counter() - t0
    remaining = None if time_limit is None else max(time_limit - build_time, 0.0)
    config = BnBConfig(
        time_limit=remaining,
        node_limit=node_limit,
        method=method,
        priority=BRANCH_PRIORITY,
    )
    result = branch_and_bound(form.model, config, warm)
    cover = None
    if result.values is not None:
        split_cover = form.extract(result.values)
        result.cover = split_cover
        cover = Cover(tuple(split.to_original(p) for p in split_cover.points))
    return SolveOutcome(result, form, split, cover, build_time)


# benchmark ---------------------------------------------------------------

@dataclass
class MetricsRecord:
    instance: str
    form: str
    radius: str
    time_s: float
    sigma: float
    vr: float
    status: str
    nodes: int

    @classmethod
    def sentinel(cls, instance: str, form: str, radius: str, status: str = "error") -> "MetricsRecord":
        return cls(instance, form, radius, SENTINEL_TIME, 1.0, 1.0, status, 0)

    @property
    def accepted(self) -> bool:
        return self.status != "error"

    @property
    def solved(self) -> bool:
        return self.status == "optimal"


def run_bench(
    instances: Iterable[tuple[str, Network]],
    forms: Sequence[str],
    radii: Sequence[str] = RADII,
    time_limit: float | None = None,
    timing: bool = True,
    method: str = "highs",
    tighten: bool = False,
    aggregate: bool = False,
) -> list[MetricsRecord]:
    """One record per (instance, form, radius); failures become sentinel rows."""
    records = []
    for name, net in instances:
        for radius_kind in radii:
            for form in forms:
                kind = FormulationKind(form, aggregate=aggregate, tighten=tighten)
                try:
                    radius = radius_for(net, radius_kind)
                    out = solve_instance(net, radius, kind, time_limit, method)
                except Exception as err:  # a failed cell never aborts the batch
                    log.warning("%s/%s/%s failed: %s", name, kind.tag, radius_kind, err)
                    records.append(MetricsRecord.sentinel(name, kind.tag, radius_kind))
                    continue
                res = out.result
                if res.values is None:
                    records.append(MetricsRecord.sentinel(name, kind.tag, radius_kind, res.status))
                    continue
                sigma, vr = metrics(res, out.split.n_sd)
                t = out.total_time if timing else 0.0
                records.append(
                    MetricsRecord(name, kind.tag, radius_kind, t, sigma, vr, res.status, res.nodes)
                )
    return records


def summarize(records: Sequence[MetricsRecord]) -> list[dict]:
    """SGM rows per (form, radius) plus an ``all`` radius row per form."""
    groups: dict[tuple[str, str], list[MetricsRecord]] = {}
    for r in records:
        groups.setdefault((r.form, r.radius), []).append(r)
        groups.setdefault((r.form, "all"), []).append(r)
    rows = []
    for (form, radius), rs in sorted(groups.items()):
        rows.append(
            {
                "form": form,
                "radius": radius,
                "count": len(rs),
                "solved": sum(r.solved for r in rs),
                "accepted": sum(r.accepted for r in rs),
                "sgm_time": sgm([r.time_s for r in rs], 1.0),
                "sgm_sigma": sgm([r.sigma for r in rs], 0.01),
                "sgm_vr": sgm([r.vr for r in rs], 0.01),
            }
        )
    return rows


def performance_profile(records: Sequence[MetricsRecord], steps: int = 100) -> list[dict]:
    """Number of instances per form whose relative gap is at most each threshold."""
    forms = sorted({r.form for r in records})
    rows = []
    for form in forms:
        sigmas = [r.sigma for r in records if r.form == form]
        for k in range(steps + 1):
            gap = k / steps
            rows.append({"form": form, "gap": gap, "instances": sum(s <= gap + 1e-12 for s in sigmas)})
    return rows


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(round(x, 6)) if math.isfinite(x) else str(x)
    return str(x)


def records_csv(records: Sequence[MetricsRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        row = asdict(r)
        writer.writerow([_fmt(row[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def rows_csv(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    fields = list(rows[0])
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in fields])
    return buf.getvalue()


def random_suite(count: int, max_edges: int = 14, seed: int = 0) -> list[tuple[str, Network]]:
    """Seeded ``G(n, p)`` instances with ``n`` in [4, 8] and ``p`` in [0.3, 0.7].

    Instances whose network split at the small radius has more than
    ``max_edges`` edges are skipped.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(4, 9))
        p = round(float(rng.uniform(0.3, 0.7)), 3)
        s = int(rng.integers(0, 2**31 - 1))
        net = gen_random(n, p, s)
        if split_edges(net, radius_for(net, "small")).network.m <= max_edges:
            out.append((f"g{n}_{p}_{s}", net))
    return out
