"""Branch and bound over binary variables with lazily enforced indicators."""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..milp import Model
from .engines import make_engine
from .propagate import Propagator
from .simplex import FEAS_TOL

log = logging.getLogger(__name__)

INT_TOL = 1e-6
GAP_EPS = 1e-6


@dataclass
class BnBConfig:
    time_limit: float | None = None
    abs_gap: float = 1.0
    node_limit: int | None = None
    method: str = "highs"
    # name prefixes branched on first, in order; others come last
    priority: tuple[str, ...] = ()
    # activity-based fixing of binaries at every node
    propagate: bool = True


@dataclass
class SolveResult:
    status: str  # optimal | gap-limit | time-limit | node-limit | infeasible
    primal: float
    dual: float
    nodes: int
    time: float
    values: dict[str, float] | None = None
    cover: Any = None
    root_bound: float = -math.inf
    dual_trace: list[float] = field(default_factory=list)

    @property
    def gap(self) -> float:
        """Relative dual gap ``(primal - dual) / primal``."""
        if not math.isfinite(self.primal):
            return 1.0
        if self.primal == 0:
            return 0.0
        return (self.primal - self.dual) / self.primal


def _integral_objective(model: Model) -> bool:
    return all(
        float(c).is_integer() and model.variables[v].is_binary for v, c in model.objective.items()
    )


def branch_and_bound(
    model: Model,
    config: BnBConfig | None = None,
    warm_start: Mapping[str, float] | None = None,
) -> SolveResult:
    """Best-bound branch and bound with depth-first plunging to the first tree incumbent.

    Indicator rows join a node's LP once the node fixes their binary to the
    trigger value. An integral LP point that violates an unenforced indicator
    is branched on that indicator's binary.
    """
    config = config or BnBConfig()
    start = time.perf_counter()
    cm = model.compile()
    engine = make_engine(cm, config.method)
    integral = _integral_objective(model)
    sign = 1.0 if model.sense == "min" else -1.0

    def round_bound(b: float) -> float:
        return math.ceil(b - GAP_EPS) if integral and math.isfinite(b) else b

    bin_cols = np.flatnonzero(cm.binary)
    name_rank = np.empty(cm.n, dtype=int)
    name_rank[np.argsort(np.array(cm.names, dtype=object))] = np.arange(cm.n)
    klass = np.array(
        [next((k for k, pre in enumerate(config.priority) if name.startswith(pre)), len(config.priority))
         for name in cm.names],
        dtype=int,
    )

    propagator = Propagator(cm) if config.propagate else None
    incumbent = math.inf
    best_x: np.ndarray | None = None
    if warm_start is not None:
        bad = model.violations(warm_start)
        if bad:
            log.warning("warm start rejected: %d violations (%s...)", len(bad), bad[0])
        else:
            best_x = cm.vector(warm_start)
            incumbent = float(cm.c @ best_x)

    # node: (bound, seq, fixes) with fixes a tuple of (col, value)
    heap: list[tuple[float, int, tuple]] = [(-math.inf, 0, ())]
    dive: list[tuple[float, int, tuple]] = []
    seq = 1
    nodes = 0
    plunging = True
    root_bound = -math.inf
    dual = -math.inf
    trace: list[float] = []
    status = None

    def pruned(bound: float) -> bool:
        return incumbent - round_bound(bound) < config.abs_gap - GAP_EPS

    def open_bound() -> float:
        best = heap[0][0] if heap else math.inf
        return min([best] + [b for b, _, _ in dive])

    while heap or dive:
        if config.time_limit is not None and time.perf_counter() - start > config.time_limit:
            status = "time-limit"
            break
        if config.node_limit is not None and nodes >= config.node_limit:
            status = "node-limit"
            break
        lower = open_bound()
        if math.isfinite(lower):
            dual = max(dual, round_bound(lower))
        trace.append(dual)
        if not plunging and dive:
            heap.extend(dive)
            heapq.heapify(heap)
            dive.clear()
        if plunging and dive:
            bound, _, fixes = dive.pop()
        else:
            bound, _, fixes = heapq.heappop(heap)
        if pruned(bound):
            continue

        lb = cm.lb.copy()
        ub = cm.ub.copy()
        for j, val in fixes:
            lb[j] = ub[j] = val
        fixed_bin = lb[cm.ind_col] == ub[cm.ind_col]
        active = fixed_bin & (lb[cm.ind_col] == cm.ind_trigger)
        if propagator is not None:
            cutoff = incumbent - config.abs_gap + GAP_EPS if integral else None
            tightened = propagator.run(lb, ub, active, cutoff)
            if tightened is None:
                nodes += 1
                continue
            lb, ub = tightened
            fixed_bin = lb[cm.ind_col] == ub[cm.ind_col]
            active = fixed_bin & (lb[cm.ind_col] == cm.ind_trigger)
        engine.set_bounds(lb, ub)
        engine.set_active(active)
        res = engine.solve()
        nodes += 1
        if res.status == "infeasible":
            continue
        if res.status != "optimal":
            raise RuntimeError(f"LP relaxation failed at node {nodes}: {res.status}")
        obj = res.objective
        x = res.x
        if nodes == 1:
            root_bound = obj
            dual = max(dual, round_bound(obj))
        if pruned(obj):
            continue

        xb = x[bin_cols]
        frac = np.minimum(xb - np.floor(xb), np.ceil(xb) - xb)
        fractional = bin_cols[frac > INT_TOL]
        branch_col = None
        if fractional.size:
            fractional = fractional[klass[fractional] == klass[fractional].min()]
            score = np.minimum(x[fractional], 1 - x[fractional])
            best = score.max()
            ties = fractional[score >= best - 1e-12]
            branch_col = int(ties[np.argmin(name_rank[ties])])
        else:
            branch_col = _violated_indicator(cm, x, lb, ub)
            if branch_col is None:
                xr = x.copy()
                xr[bin_cols] = np.round(xr[bin_cols])
                value = float(cm.c @ xr)
                if value < incumbent - 1e-9:
                    incumbent = value
                    best_x = xr
                plunging = False
                continue

        preferred = 1 if x[branch_col] >= 0.5 else 0
        children = [(obj, fixes + ((branch_col, float(1 - preferred)),)),
                    (obj, fixes + ((branch_col, float(preferred)),))]
        for child_bound, child_fixes in children:
            item = (child_bound, seq, child_fixes)
            seq += 1
            if plunging:
                dive.append(item)
            else:
                heapq.heappush(heap, item)

    elapsed = time.perf_counter() - start
    if status is None:
        if best_x is None:
            status = "infeasible"
            dual = math.inf
        else:
            dual = max(dual, min(incumbent, round_bound(open_bound())))
            status = "optimal" if incumbent - dual < GAP_EPS else "gap-limit"
    else:
        lower = open_bound()
        if math.isfinite(lower):
            dual = max(dual, round_bound(lower))
    if best_x is not None:
        dual = min(dual, incumbent)
    trace.append(dual)
    values = cm.values(best_x) if best_x is not None else None
    return SolveResult(
        status=status,
        primal=sign * incumbent,
        dual=sign * dual,
        nodes=nodes,
        time=elapsed,
        values=values,
        root_bound=sign * root_bound,
        dual_trace=trace,
    )


def _violated_indicator(cm, x, lb, ub) -> int | None:
    if not len(cm.ind_col):
        return None
    at_trigger = np.round(x[cm.ind_col]) == cm.ind_trigger
    unfixed = lb[cm.ind_col] != ub[cm.ind_col]
    cand = np.flatnonzero(at_trigger & unfixed)
    if not cand.size:
        return None
    act = cm.ind_A[cand] @ x
    viol = np.maximum(cm.ind_lo[cand] - act, act - cm.ind_hi[cand])
    bad = cand[viol > FEAS_TOL]
    if not bad.size:
        return None
    return int(cm.ind_col[bad[0]])
