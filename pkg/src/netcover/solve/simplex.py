"""Dense bounded-variable primal simplex.

Solves ``min c x`` subject to ``row_lo <= A x <= row_hi`` and
``lb <= x <= ub``. Each row gets a slack ``s = A x`` carrying the row bounds,
so the working system is ``A x - s = 0``. Rows whose slack starts outside its
bounds receive an artificial variable that phase 1 drives to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-7
COST_TOL = 1e-9
PIVOT_TOL = 1e-9
STALL_LIMIT = 50
REFACTOR_EVERY = 100
MAX_REFACTOR_FAILURES = 3

AT_LOWER, AT_UPPER, FREE_ZERO, BASIC = 0, 1, 2, 3


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded | error
    objective: float
    x: np.ndarray | None
    iterations: int
    values: dict[str, float] | None = None


class _Tableau:
    def __init__(self, M, cost, lo, hi, x, basis, state):
        self.M = M
        self.cost = cost
        self.lo = lo
        self.hi = hi
        self.x = x
        self.basis = basis
        self.state = state
        self.iterations = 0
        self.refactor()

    def refactor(self) -> None:
        B = self.M[:, self.basis]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as err:
            raise _NumericalFailure(str(err)) from None
        self.T = Binv @ self.M
        nonbasic = self.state != BASIC
        self.x[self.basis] = -self.T[:, nonbasic] @ self.x[nonbasic]

    def run(self, max_iter: int) -> str:
        m = len(self.basis)
        bland = False
        stalled = 0
        failures = 0
        since_refactor = 0
        while True:
            if self.iterations >= max_iter:
                return "error"
            cb = self.cost[self.basis]
            d = self.cost - cb @ self.T if m else self.cost.copy()
            st = self.state
            fixed = self.lo == self.hi
            can_up = ((st == AT_LOWER) | (st == FREE_ZERO)) & (d < -COST_TOL) & ~fixed
            can_down = ((st == AT_UPPER) | (st == FREE_ZERO)) & (d > COST_TOL) & ~fixed
            cand = np.flatnonzero(can_up | can_down)
            if cand.size == 0:
                return "optimal"
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if can_up[j] else -1.0

            col = direction * self.T[:, j] if m else np.zeros(0)
            xb = self.x[self.basis]
            lob = self.lo[self.basis]
            hib = self.hi[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio_dec = np.where(col > PIVOT_TOL, (xb - lob) / col, np.inf)
                ratio_inc = np.where(col < -PIVOT_TOL, (hib - xb) / -col, np.inf)
            ratios = np.maximum(np.minimum(ratio_dec, ratio_inc), 0.0)
            step_flip = self.hi[j] - self.lo[j]
            t_row = ratios.min() if m else np.inf
            if min(t_row, step_flip) == np.inf:
                return "unbounded"

            self.iterations += 1
            if step_flip <= t_row:
                t = step_flip
                self.x[j] += direction * t
                self.x[self.basis] = xb - t * col
                self.state[j] = AT_UPPER if direction > 0 else AT_LOWER
            else:
                t = t_row
                ties = np.flatnonzero(ratios <= t + 1e-12)
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(col[ties]))])
                leaving = self.basis[r]
                self.x[j] += direction * t
                self.x[self.basis] = xb - t * col
                self.state[leaving] = AT_LOWER if col[r] > 0 else AT_UPPER
                self.x[leaving] = self.lo[leaving] if self.state[leaving] == AT_LOWER else self.hi[leaving]
                self.basis[r] = j
                self.state[j] = BASIC
                piv = self.T[r, j]
                self.T[r] /= piv
                factors = self.T[:, j].copy()
                factors[r] = 0.0
                self.T -= np.outer(factors, self.T[r])
                since_refactor += 1
            stalled = stalled + 1 if t <= 1e-12 else 0
            if stalled > STALL_LIMIT:
                bland = True
            if since_refactor >= REFACTOR_EVERY:
                since_refactor = 0
                try:
                    self.refactor()
                except _NumericalFailure:
                    failures += 1
                    if failures >= MAX_REFACTOR_FAILURES:
                        return "error"


class _NumericalFailure(RuntimeError):
    pass


def simplex(c, A, row_lo, row_hi, lb, ub, max_iter: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A.toarray() if hasattr(A, "toarray") else A, dtype=float)
    m, n = A.shape
    row_lo = np.asarray(row_lo, dtype=float)
    row_hi = np.asarray(row_hi, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub + FEAS_TOL) or np.any(row_lo > row_hi + FEAS_TOL):
        return LPResult("infeasible", np.nan, None, 0)

    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    state0 = np.where(np.isfinite(lb), AT_LOWER, np.where(np.isfinite(ub), AT_UPPER, FREE_ZERO))
    act = A @ x0
    s0 = np.clip(act, row_lo, row_hi)
    gap = s0 - act
    bad = np.flatnonzero(np.abs(gap) > FEAS_TOL)
    k = len(bad)

    N = n + m + k
    M = np.zeros((m, N))
    M[:, :n] = A
    M[:, n : n + m] = -np.eye(m)
    sigma = np.sign(gap[bad])
    M[bad, n + m + np.arange(k)] = sigma

    lo = np.concatenate([lb, row_lo, np.zeros(k)])
    hi = np.concatenate([ub, row_hi, np.full(k, np.inf)])
    x = np.concatenate([x0, s0, np.abs(gap[bad])])
    state = np.concatenate([state0, np.full(m, AT_LOWER), np.full(k, AT_LOWER)])
    basis = np.arange(n, n + m)
    basis[bad] = n + m + np.arange(k)
    slack_state = np.where(
        np.isclose(s0, row_lo) & np.isfinite(row_lo),
        AT_LOWER,
        np.where(np.isfinite(row_hi), AT_UPPER, FREE_ZERO),
    )
    state[n : n + m] = slack_state
    state[basis] = BASIC

    iterations = 0
    try:
        if k:
            cost1 = np.zeros(N)
            cost1[n + m :] = 1.0
            tab = _Tableau(M, cost1, lo, hi, x, basis, state)
            status = tab.run(max_iter)
            iterations = tab.iterations
            if status != "optimal":
                return LPResult("error", np.nan, None, iterations)
            if x[n + m :].sum() > FEAS_TOL * max(1, k):
                return LPResult("infeasible", np.nan, None, iterations)
            hi[n + m :] = 0.0
            x[n + m :] = np.clip(x[n + m :], 0.0, 0.0)
            state, basis = tab.state, tab.basis
        cost2 = np.concatenate([c, np.zeros(m + k)])
        tab = _Tableau(M, cost2, lo, hi, x, basis, state)
        tab.iterations = iterations
        status = tab.run(max_iter)
        iterations = tab.iterations
    except _NumericalFailure:
        return LPResult("error", np.nan, None, iterations)
    if status != "optimal":
        return LPResult(status, np.nan if status != "unbounded" else -np.inf, None, iterations)
    xs = tab.x[:n].copy()
    return LPResult("optimal", float(c @ xs), xs, iterations)
