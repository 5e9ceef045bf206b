"""MILP formulations of the delimited edge model.

Every formulation shares placement ``y``, coordinate ``q`` and complete-cover
``w`` variables per edge, ``x``/``r`` per vertex and one ``z`` per
``(vertex, edge, tag)`` pair. They differ in how the residual cover ``r_v`` is
tied to the chosen pair: big-M rows, indicator constraints, or duplicated
variables from the disjunctive hull.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .delimit import (
    BigMConstants,
    Delimitation,
    bigm_constants,
    build_delimitation,
    trivial_delimitation,
)
from .milp import Model
from .network import TOL, DistanceMatrix, Network, Point, all_pairs_distances

FORMS = {
    "ef": "EF",
    "efp": "EF-P",
    "efpi": "EF-PI",
    "efpd": "EF-PD",
    "efpv1": "EF-PV1",
    "efpv2": "EF-PV2",
}


class InconsistentDelimitationError(ValueError):
    pass


class UnknownVariableError(KeyError):
    pass


@dataclass(frozen=True)
class FormulationKind:
    form: str
    aggregate: bool = False
    tighten: bool = False

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown formulation {self.form!r}; expected one of {sorted(FORMS)}")

    @property
    def tag(self) -> str:
        return FORMS[self.form]

    @property
    def delimited(self) -> bool:
        return self.form != "ef"

    @property
    def max_rank(self) -> int:
        return {"efpv1": 1, "efpv2": 2}.get(self.form, 0)


@dataclass(frozen=True)
class Cover:
    points: tuple[Point, ...]

    @property
    def objective(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)


# variable names -----------------------------------------------------------

def y_(net, e):
    return f"y_{net.label(e)}"


def q_(net, e):
    return f"q_{net.label(e)}"


def w_(net, e):
    return f"w_{net.label(e)}"


def x_(v):
    return f"x_{v}"


def r_(v):
    return f"r_{v}"


def z_(net, v, f, t):
    return f"z_{v}_{net.label(f)}_{t}"


def rv_(net, v, f, t):
    return f"rv_{v}_{net.label(f)}_{t}"


def qv_(net, v, f, t):
    return f"qv_{v}_{net.label(f)}_{t}"


def qn_(net, v, f):
    return f"qn_{v}_{net.label(f)}"


def residual_row(net: Network, dm: DistanceMatrix, delta: float, v: int, f: int, t: str):
    """``r_v <= delta - tau(q_f)`` as ``(q coefficient, rhs)`` of ``r_v + c q_f <= rhs``."""
    d = dm(v, net.end(f, t))
    if t == "a":
        return 1.0, delta - d
    return -1.0, delta - d - net.length(f)


def _check(net: Network, delim: Delimitation) -> None:
    for v in net.vertices:
        for f, _ in delim.pairs[v]:
            if f not in delim.partial[v]:
                raise InconsistentDelimitationError(
                    f"pair on edge {net.label(f)} for vertex {v} is not a partial cover"
                )


def _base(net: Network, delim: Delimitation, name: str) -> Model:
    _check(net, delim)
    m = Model(name)
    for e in range(net.m):
        m.binary(y_(net, e))
        m.add_var(q_(net, e), 0.0, net.length(e))
        m.binary(w_(net, e))
    for v in net.vertices:
        m.binary(x_(v))
        m.add_var(r_(v), 0.0)
    for v in net.vertices:
        for f, t in delim.pairs[v]:
            m.binary(z_(net, v, f, t))
    m.set_objective([(y_(net, e), 1.0) for e in range(net.m)])

    for e in range(net.m):
        for f in sorted(delim.complete[e]):
            m.add_constraint(f"cc1_{net.label(e)}_{net.label(f)}", [(w_(net, e), 1), (y_(net, f), -1)], ">=", 0)
        m.add_constraint(
            f"cc2_{net.label(e)}",
            [(w_(net, e), 1)] + [(y_(net, f), -1) for f in sorted(delim.complete[e])],
            "<=",
            0,
        )
    for v in net.vertices:
        inc = net.incident[v]
        m.add_constraint(f"x1_{v}", [(x_(v), 1)] + [(w_(net, e), -1) for e in inc], ">=", 1 - len(inc))
        for e in inc:
            m.add_constraint(f"x2_{v}_{net.label(e)}", [(x_(v), 1), (w_(net, e), -1)], "<=", 0)
        m.add_constraint(
            f"sos_{v}", [(x_(v), 1)] + [(z_(net, v, f, t), 1) for f, t in delim.pairs[v]], "=", 1
        )
        for f, t in delim.pairs[v]:
            m.add_constraint(f"zy_{v}_{net.label(f)}_{t}", [(z_(net, v, f, t), 1), (y_(net, f), -1)], "<=", 0)
    return m


def _covering_rows(m: Model, net: Network) -> None:
    for e, edge in enumerate(net.edges):
        m.add_constraint(
            f"cov_{net.label(e)}",
            [(w_(net, e), edge.length), (r_(edge.a), 1), (r_(edge.b), 1)],
            ">=",
            edge.length,
        )


def build_bigm(
    net: Network, dm: DistanceMatrix, delta: float, delim: Delimitation, bigm: BigMConstants
) -> Model:
    m = _base(net, delim, "bigm")
    for v in net.vertices:
        mv = bigm.vertex[v]
        m.add_constraint(f"rx_{v}", [(r_(v), 1), (x_(v), mv)], "<=", mv)
        for f, t in delim.pairs[v]:
            big = bigm.pair[(v, f, t)]
            coef, rhs = residual_row(net, dm, delta, v, f, t)
            m.add_constraint(
                f"rz_{v}_{net.label(f)}_{t}",
                [(r_(v), 1), (q_(net, f), coef), (z_(net, v, f, t), big)],
                "<=",
                rhs + big,
            )
    _covering_rows(m, net)
    return m


def build_indicator(net: Network, dm: DistanceMatrix, delta: float, delim: Delimitation) -> Model:
    m = _base(net, delim, "indicator")
    _covering_rows(m, net)
    for v in net.vertices:
        m.add_indicator(f"ind_x_{v}", x_(v), 1, [(r_(v), 1)], "<=", 0)
        for f, t in delim.pairs[v]:
            coef, rhs = residual_row(net, dm, delta, v, f, t)
            m.add_indicator(
                f"ind_z_{v}_{net.label(f)}_{t}",
                z_(net, v, f, t),
                1,
                [(r_(v), 1), (q_(net, f), coef)],
                "<=",
                rhs,
            )
    return m


def indicator_bigm(net: Network, bigm: BigMConstants, delim: Delimitation) -> dict[str, float]:
    """Big-M constants keyed by the indicator names of :func:`build_indicator`."""
    out = {}
    for v in net.vertices:
        out[f"ind_x_{v}"] = bigm.vertex[v]
        for f, t in delim.pairs[v]:
            out[f"ind_z_{v}_{net.label(f)}_{t}"] = bigm.pair[(v, f, t)]
    return out


def build_dp(
    net: Network, dm: DistanceMatrix, delta: float, delim: Delimitation, aggregate: bool = False
) -> Model:
    m = _base(net, delim, "dp-agg" if aggregate else "dp")
    for v in net.vertices:
        for f, t in delim.pairs[v]:
            if not aggregate:
                m.add_var(rv_(net, v, f, t), 0.0)
            m.add_var(qv_(net, v, f, t), 0.0, net.length(f))
        for f in sorted(delim.partial[v]):
            m.add_var(qn_(net, v, f), 0.0, net.length(f))

    for v in net.vertices:
        pairs = delim.pairs[v]
        if not aggregate:
            m.add_constraint(f"rsum_{v}", [(r_(v), 1)] + [(rv_(net, v, f, t), -1) for f, t in pairs], "=", 0)
        for f in sorted(delim.partial[v]):
            tags = [t for g, t in pairs if g == f]
            m.add_constraint(
                f"qsplit_{v}_{net.label(f)}",
                [(q_(net, f), 1), (qn_(net, v, f), -1)] + [(qv_(net, v, f, t), -1) for t in tags],
                "=",
                0,
            )
        hull_terms = []
        for f, t in pairs:
            # R(q, z) = (delta - d - 1_b l) z + (1_b - 1_a) q
            coef, rhs = residual_row(net, dm, delta, v, f, t)
            terms = [(z_(net, v, f, t), -rhs), (qv_(net, v, f, t), coef)]
            if aggregate:
                hull_terms += terms
            else:
                m.add_constraint(f"rdp_{v}_{net.label(f)}_{t}", [(rv_(net, v, f, t), 1)] + terms, "<=", 0)
        if aggregate:
            m.add_constraint(f"ragg_{v}", [(r_(v), 1)] + hull_terms, "<=", 0)
        for f, t in pairs:
            m.add_constraint(
                f"qz_{v}_{net.label(f)}_{t}",
                [(qv_(net, v, f, t), 1), (z_(net, v, f, t), -net.length(f))],
                "<=",
                0,
            )
        for f in sorted(delim.partial[v]):
            tags = [t for g, t in pairs if g == f]
            length = net.length(f)
            m.add_constraint(
                f"qnb_{v}_{net.label(f)}",
                [(qn_(net, v, f), 1)] + [(z_(net, v, f, t), length) for t in tags],
                "<=",
                length,
            )
    _covering_rows(m, net)
    return m


def attach_cuts(model: Model, cuts: Sequence, net: Network) -> Model:
    """Append each no-good as ``sum z <= |pattern| - 1``."""
    out = model.copy()
    for k, cut in enumerate(cuts):
        names = [z_(net, v, f, t) for v, f, t in cut.triples]
        for name in names:
            if name not in out.variables:
                raise UnknownVariableError(name)
        out.add_constraint(f"nogood_{k}", [(n, 1) for n in names], "<=", len(names) - 1)
    return out


@dataclass
class Formulation:
    kind: FormulationKind
    network: Network
    dm: DistanceMatrix
    delta: float
    delim: Delimitation
    bigm: BigMConstants | None
    model: Model
    cuts: list = field(default_factory=list)
    cut_time: float = 0.0

    def extract(self, values: Mapping[str, float]) -> Cover:
        return extract_solution(self, values)

    def assignment(self, cover: Cover) -> dict[str, float]:
        return cover_to_assignment(self, cover)


def formulate(
    net: Network,
    delta: float,
    kind: FormulationKind | str,
    dm: DistanceMatrix | None = None,
) -> Formulation:
    """Build the formulation ``kind`` on a network that already satisfies ``l_e <= delta``."""
    from .cuts import generate_nogood, to_inequality

    if isinstance(kind, str):
        kind = FormulationKind(kind)
    dm = dm if dm is not None else all_pairs_distances(net)
    if kind.delimited:
        delim = build_delimitation(net, dm, delta)
        bigm = bigm_constants(net, dm, delta, delim, tighten=kind.tighten)
    else:
        delim = trivial_delimitation(net, delta)
        bigm = bigm_constants(net, dm, delta, delim, tighten=False)
    cuts = []
    cut_time = 0.0
    if kind.form == "efpi":
        model = build_indicator(net, dm, delta, delim)
    elif kind.form == "efpd":
        model = build_dp(net, dm, delta, delim, aggregate=kind.aggregate)
    else:
        model = build_bigm(net, dm, delta, delim, bigm)
        if kind.max_rank:
            t0 = time.perf_counter()
            patterns = generate_nogood(net, dm, delim, delta, kind.max_rank)
            cuts = [to_inequality(p) for p in patterns]
            model = attach_cuts(model, cuts, net)
            cut_time = time.perf_counter() - t0
    model.name = kind.tag
    return Formulation(kind, net, dm, delta, delim, bigm, model, cuts, cut_time)


def extract_solution(form: Formulation, values: Mapping[str, float], tol: float = 1e-6) -> Cover:
    net = form.network
    points = []
    for e in range(net.m):
        y = values[y_(net, e)]
        if min(abs(y), abs(1 - y)) > tol:
            raise ValueError(f"fractional placement {y_(net, e)} = {y}")
        if y > 0.5:
            x = min(max(values[q_(net, e)], 0.0), net.length(e))
            points.append(Point(e, x))
    return Cover(tuple(points))


def cover_to_assignment(form: Formulation, cover: Cover) -> dict[str, float]:
    """Complete variable assignment realising ``cover`` in ``form.model``.

    Each vertex that is not fully served by complete covers picks the pair
    giving the largest residual ``delta - tau``; the duplicated variables of
    the disjunctive formulation follow that choice.
    """
    net, dm, delta, delim = form.network, form.dm, form.delta, form.delim
    placed: dict[int, float] = {}
    for p in cover.points:
        if p.edge in placed:
            raise ValueError(f"two points on edge {net.label(p.edge)}")
        if not -TOL <= p.x <= net.length(p.edge) + TOL:
            raise ValueError(f"coordinate {p.x} outside edge {net.label(p.edge)}")
        placed[p.edge] = min(max(p.x, 0.0), net.length(p.edge))

    vals: dict[str, float] = {}
    w = {}
    for e in range(net.m):
        vals[y_(net, e)] = 1.0 if e in placed else 0.0
        vals[q_(net, e)] = placed.get(e, 0.0)
        w[e] = any(f in placed for f in delim.complete[e])
        vals[w_(net, e)] = float(w[e])

    model_vars = form.model.variables
    for v in net.vertices:
        xv = all(w[e] for e in net.incident[v])
        vals[x_(v)] = float(xv)
        choice = None
        best = -float("inf")
        if not xv:
            for f, t in delim.pairs[v]:
                if f not in placed:
                    continue
                coef, rhs = residual_row(net, dm, delta, v, f, t)
                slack = rhs - coef * placed[f]
                if slack > best + 1e-12:
                    best, choice = slack, (f, t)
            if choice is None or best < -TOL:
                raise ValueError(f"vertex {v} has no installed point within reach")
        rv = max(best, 0.0) if choice else 0.0
        vals[r_(v)] = rv
        for f, t in delim.pairs[v]:
            on = choice == (f, t)
            vals[z_(net, v, f, t)] = 1.0 if on else 0.0
            if rv_(net, v, f, t) in model_vars:
                vals[rv_(net, v, f, t)] = rv if on else 0.0
            if qv_(net, v, f, t) in model_vars:
                vals[qv_(net, v, f, t)] = vals[q_(net, f)] if on else 0.0
        for f in delim.partial[v]:
            if qn_(net, v, f) in model_vars:
                chosen_here = choice is not None and choice[0] == f
                vals[qn_(net, v, f)] = 0.0 if chosen_here else vals[q_(net, f)]
    return vals
