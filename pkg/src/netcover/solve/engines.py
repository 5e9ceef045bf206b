"""LP engines used by the branch-and-bound loop.

Both engines hold a compiled model and accept per-node column bounds and an
activity mask for indicator rows; inactive indicator rows are free.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import vstack

from ..milp import CompiledModel
from .simplex import LPResult, simplex


class SimplexEngine:
    def __init__(self, cm: CompiledModel):
        self.cm = cm
        self.lb = cm.lb.copy()
        self.ub = cm.ub.copy()
        self.active = np.zeros(len(cm.ind_col), dtype=bool)

    def set_bounds(self, lb: np.ndarray, ub: np.ndarray) -> None:
        self.lb, self.ub = lb, ub

    def set_active(self, active: np.ndarray) -> None:
        self.active = active

    def solve(self) -> LPResult:
        cm = self.cm
        if self.active.any():
            idx = np.flatnonzero(self.active)
            A = vstack([cm.A, cm.ind_A[idx]])
            lo = np.concatenate([cm.row_lo, cm.ind_lo[idx]])
            hi = np.concatenate([cm.row_hi, cm.ind_hi[idx]])
        else:
            A, lo, hi = cm.A, cm.row_lo, cm.row_hi
        return simplex(cm.c, A, lo, hi, self.lb, self.ub)


class HighsEngine:
    """Warm-started HiGHS dual simplex; indicator rows live in the LP permanently."""

    def __init__(self, cm: CompiledModel):
        import highspy

        self._hs = highspy
        self.cm = cm
        inf = highspy.kHighsInf
        self.n_lin = cm.A.shape[0]
        self.n_ind = cm.ind_A.shape[0]
        A = vstack([cm.A, cm.ind_A]).tocsc()
        lp = highspy.HighsLp()
        lp.num_col_ = cm.n
        lp.num_row_ = self.n_lin + self.n_ind
        lp.col_cost_ = cm.c.astype(float)
        lp.col_lower_ = np.where(np.isfinite(cm.lb), cm.lb, -inf)
        lp.col_upper_ = np.where(np.isfinite(cm.ub), cm.ub, inf)
        lo = np.concatenate([cm.row_lo, np.full(self.n_ind, -np.inf)])
        hi = np.concatenate([cm.row_hi, np.full(self.n_ind, np.inf)])
        lp.row_lower_ = np.where(np.isfinite(lo), lo, -inf)
        lp.row_upper_ = np.where(np.isfinite(hi), hi, inf)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr.astype(np.int32)
        lp.a_matrix_.index_ = A.indices.astype(np.int32)
        lp.a_matrix_.value_ = A.data.astype(float)
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("threads", 1)
        h.passModel(lp)
        self.h = h
        self._cols = np.arange(cm.n, dtype=np.int32)
        self._ind_rows = np.arange(self.n_lin, self.n_lin + self.n_ind, dtype=np.int32)
        self._ind_lo = np.where(np.isfinite(cm.ind_lo), cm.ind_lo, -inf)
        self._ind_hi = np.where(np.isfinite(cm.ind_hi), cm.ind_hi, inf)
        self._inf = inf
        self._active = np.zeros(self.n_ind, dtype=bool)

    def set_bounds(self, lb: np.ndarray, ub: np.ndarray) -> None:
        inf = self._inf
        self.h.changeColsBounds(
            len(self._cols),
            self._cols,
            np.where(np.isfinite(lb), lb, -inf),
            np.where(np.isfinite(ub), ub, inf),
        )

    def set_active(self, active: np.ndarray) -> None:
        if self.n_ind == 0 or np.array_equal(active, self._active):
            return
        lo = np.where(active, self._ind_lo, -self._inf)
        hi = np.where(active, self._ind_hi, self._inf)
        self.h.changeRowsBounds(self.n_ind, self._ind_rows, lo, hi)
        self._active = active.copy()

    def solve(self) -> LPResult:
        hs = self._hs
        self.h.run()
        status = self.h.getModelStatus()
        iters = self.h.getInfo().simplex_iteration_count
        if status == hs.HighsModelStatus.kOptimal:
            x = np.array(self.h.getSolution().col_value)
            return LPResult("optimal", float(self.cm.c @ x), x, iters)
        if status == hs.HighsModelStatus.kInfeasible:
            return LPResult("infeasible", np.nan, None, iters)
        if status in (hs.HighsModelStatus.kUnbounded, hs.HighsModelStatus.kUnboundedOrInfeasible):
            return LPResult("unbounded", -np.inf, None, iters)
        return LPResult("error", np.nan, None, iters)


ENGINES = {"simplex": SimplexEngine, "highs": HighsEngine}


def make_engine(cm: CompiledModel, method: str):
    try:
        return ENGINES[method](cm)
    except KeyError:
        raise ValueError(f"unknown LP method {method!r}") from None
