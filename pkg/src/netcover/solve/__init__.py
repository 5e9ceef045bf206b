"""LP relaxations and branch and bound."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from ..milp import CompiledModel, Model
from .bnb import BnBConfig, SolveResult, branch_and_bound
from .engines import make_engine
from .simplex import LPResult, simplex

__all__ = [
    "BnBConfig",
    "LPResult",
    "SolveResult",
    "branch_and_bound",
    "simplex",
    "solve_lp",
]


def solve_lp(
    model: Model | CompiledModel,
    enforce: Iterable[str] = (),
    bounds: Mapping[str, tuple[float, float]] | None = None,
    method: str = "simplex",
) -> LPResult:
    """Continuous relaxation of ``model``.

    Indicator constraints are dropped except those named in ``enforce``, which
    are added as plain rows. ``bounds`` overrides variable bounds by name.
    """
    cm = model if isinstance(model, CompiledModel) else model.compile()
    engine = make_engine(cm, method)
    lb, ub = cm.lb.copy(), cm.ub.copy()
    for name, (lo, hi) in (bounds or {}).items():
        j = cm.col[name]
        lb[j], ub[j] = lo, hi
    engine.set_bounds(lb, ub)
    wanted = set(enforce)
    names = [ind.name for ind in cm.model.indicators]
    unknown = wanted - set(names)
    if unknown:
        raise KeyError(f"unknown indicators {sorted(unknown)}")
    engine.set_active(np.array([n in wanted for n in names], dtype=bool))
    res = engine.solve()
    if res.x is not None:
        sign = 1.0 if cm.model.sense == "min" else -1.0
        res.objective *= sign
        res.values = cm.values(res.x)
    return res
