"""Activity-based bound propagation for binary columns."""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix, vstack

PROP_TOL = 1e-7


class Propagator:
    """Fixes binaries whose other value would make some row unsatisfiable.

    Works on the stacked matrix ``[A; ind_A; c]``; indicator rows take part
    only when marked active and the objective row only under a cutoff.
    """

    def __init__(self, cm, max_rounds: int = 20):
        M = vstack([cm.A, cm.ind_A, csr_matrix(cm.c.reshape(1, -1))]).tocoo()
        self.row = M.row
        self.col = M.col
        self.val = M.data
        self.n_rows = M.shape[0]
        self.n_lin = cm.A.shape[0]
        self.n_ind = cm.ind_A.shape[0]
        self.lo = np.concatenate([cm.row_lo, cm.ind_lo, [-np.inf]])
        self.hi = np.concatenate([cm.row_hi, cm.ind_hi, [np.inf]])
        self.binary = cm.binary
        self.max_rounds = max_rounds
        self.pos = self.val > 0

    def run(self, lb, ub, active=None, cutoff: float | None = None):
        """Tightened ``(lb, ub)``, or ``None`` when some row cannot be satisfied.

        ``cutoff`` bounds the objective ``c x`` from above.
        """
        lb, ub = lb.copy(), ub.copy()
        keep = np.zeros(self.n_rows, dtype=bool)
        keep[: self.n_lin] = True
        if active is not None and self.n_ind:
            keep[self.n_lin : self.n_lin + self.n_ind] = active
        hi = self.hi.copy()
        lo = self.lo
        if cutoff is not None and np.isfinite(cutoff):
            keep[-1] = True
            hi[-1] = cutoff
        ent = keep[self.row]
        row, col, val, pos = self.row[ent], self.col[ent], self.val[ent], self.pos[ent]
        free_bin = self.binary[col]
        with np.errstate(invalid="ignore"):
            for _ in range(self.max_rounds):
                lo_c = np.where(pos, val * lb[col], val * ub[col])
                hi_c = np.where(pos, val * ub[col], val * lb[col])
                minact = np.bincount(row, lo_c, minlength=self.n_rows)
                maxact = np.bincount(row, hi_c, minlength=self.n_rows)
                minact = np.where(np.isnan(minact), -np.inf, minact)
                maxact = np.where(np.isnan(maxact), np.inf, maxact)
                if np.any((minact > hi + PROP_TOL) & keep) or np.any((maxact < lo - PROP_TOL) & keep):
                    return None
                unfixed = free_bin & (lb[col] != ub[col])
                if not unfixed.any():
                    break
                # flipping the entry to its worse bound moves the activity by |val|
                push = np.abs(val)
                to_zero = unfixed & (
                    (pos & (minact[row] + push > hi[row] + PROP_TOL))
                    | (~pos & (maxact[row] - push < lo[row] - PROP_TOL))
                )
                to_one = unfixed & (
                    (~pos & (minact[row] + push > hi[row] + PROP_TOL))
                    | (pos & (maxact[row] - push < lo[row] - PROP_TOL))
                )
                if not (to_zero.any() or to_one.any()):
                    break
                ub[col[to_zero]] = 0.0
                lb[col[to_one]] = 1.0
                if np.any(lb[col[to_zero]] > ub[col[to_zero]]):
                    return None
        return lb, ub
