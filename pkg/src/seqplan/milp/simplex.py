"""Bounded-variable primal simplex on a dense tableau.

Rows are brought to the form ``A x + s = b`` with one logical variable ``s``
per row whose bounds encode the row sense. Phase 1 starts from an artificial
basis and minimizes the sum of artificials; phase 2 keeps artificials pinned
at zero. Entering variables are priced by Dantzig's rule; after a run of
degenerate pivots the method falls back to Bland's rule until progress resumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

_PIV_TOL = 1e-9
_COST_TOL = 1e-9
_DEGENERATE_RUN = 30


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int


def solve_lp(
    c: np.ndarray,
    A: np.ndarray,
    senses: list[str],
    b: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    max_iter: int = 100_000,
    feas_tol: float = 1e-7,
) -> LpResult:
    """Minimize ``c @ x`` subject to ``A x (senses) b`` and ``lb <= x <= ub``.

    ``lb`` must be finite; ``ub`` may be ``inf``.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, len(c))
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape
    if np.any(lb > ub + 1e-12):
        return LpResult(INFEASIBLE, None, np.inf, 0)
    if m == 0:
        x = np.where(c > 0, lb, np.where(c < 0, ub, lb))
        if np.any(~np.isfinite(x)):
            return LpResult(UNBOUNDED, None, -np.inf, 0)
        return LpResult(OPTIMAL, x, float(c @ x), 0)

    s_lb = np.zeros(m)
    s_ub = np.zeros(m)
    for i, sense in enumerate(senses):
        if sense == "<=":
            s_ub[i] = np.inf
        elif sense == ">=":
            s_lb[i] = -np.inf
    # column layout: structural | logical | artificial
    lo = np.concatenate([lb, s_lb, np.zeros(m)])
    hi = np.concatenate([ub, s_ub, np.full(m, np.inf)])
    N = n + 2 * m
    at_upper = np.zeros(N, dtype=bool)
    # logicals of >= rows start at their finite upper bound 0
    at_upper[n : n + m] = ~np.isfinite(s_lb)
    xN = np.where(at_upper, hi, lo)
    xN[n + m :] = 0.0

    resid = b - A @ xN[:n]
    sign = np.where(resid >= 0, 1.0, -1.0)
    T = np.zeros((m, N))
    T[:, :n] = A * sign[:, None]
    T[:, n : n + m] = np.diag(sign)
    T[:, n + m :] = np.eye(m)
    basis = np.arange(n + m, N)
    is_basic = np.zeros(N, dtype=bool)
    is_basic[basis] = True
    xB = np.abs(resid)
    full_cols = np.concatenate([A, np.eye(m), np.diag(sign)], axis=1)

    iters = 0

    def refresh():
        nonlocal xB
        Binv = T[:, n + m :] * sign[None, :]
        xn = np.where(at_upper, hi, lo)
        xn[is_basic] = 0.0
        xn = np.where(np.isfinite(xn), xn, 0.0)
        xB = Binv @ (b - full_cols @ xn)

    def run(cost: np.ndarray) -> str:
        nonlocal iters, T, xB
        degenerate = 0
        while True:
            if iters >= max_iter:
                return ITERATION_LIMIT
            iters += 1
            if iters % 50 == 0:
                refresh()
            d = cost - cost[basis] @ T
            movable = (~is_basic) & (hi - lo > 0)
            inc = movable & ~at_upper & (d < -_COST_TOL)
            dec = movable & at_upper & (d > _COST_TOL)
            cand = np.flatnonzero(inc | dec)
            if cand.size == 0:
                return OPTIMAL
            bland = degenerate >= _DEGENERATE_RUN
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if inc[j] else -1.0
            col = T[:, j] * direction
            theta = hi[j] - lo[j]
            leave = -1
            leave_to_upper = False
            blo = lo[basis]
            bhi = hi[basis]
            for i in range(m):
                a = col[i]
                if a > _PIV_TOL:
                    t = (xB[i] - blo[i]) / a
                    up = False
                elif a < -_PIV_TOL and np.isfinite(bhi[i]):
                    t = (bhi[i] - xB[i]) / -a
                    up = True
                else:
                    continue
                t = max(t, 0.0)
                better = t < theta - 1e-12
                tie = leave >= 0 and abs(t - theta) <= 1e-12 and basis[i] < basis[leave]
                if better or (bland and tie):
                    theta, leave, leave_to_upper = t, i, up
            if not np.isfinite(theta):
                return UNBOUNDED
            degenerate = degenerate + 1 if theta <= 1e-12 else 0
            xB = xB - theta * col
            if leave < 0:
                at_upper[j] = not at_upper[j]
                continue
            entering_value = (hi[j] if at_upper[j] else lo[j]) + direction * theta
            old = basis[leave]
            piv = T[leave, j]
            T[leave] /= piv
            others = np.arange(m) != leave
            T[others] -= np.outer(T[others, j], T[leave])
            xB[leave] = entering_value
            basis[leave] = j
            is_basic[j] = True
            is_basic[old] = False
            at_upper[old] = leave_to_upper
            at_upper[j] = False

    cost1 = np.zeros(N)
    cost1[n + m :] = 1.0
    status = run(cost1)
    if status == ITERATION_LIMIT:
        return LpResult(status, None, np.nan, iters)
    refresh()
    infeas = float(np.sum(np.where(basis >= n + m, xB, 0.0)))
    if infeas > feas_tol * (1.0 + float(np.max(np.abs(b), initial=0.0))):
        return LpResult(INFEASIBLE, None, np.inf, iters)
    hi[n + m :] = 0.0
    at_upper[n + m :] = False
    cost2 = np.zeros(N)
    cost2[:n] = c
    status = run(cost2)
    if status != OPTIMAL:
        return LpResult(status, None, -np.inf if status == UNBOUNDED else np.nan, iters)
    refresh()
    x = np.where(at_upper, hi, lo)
    x[basis] = xB
    x = x[:n]
    x = np.clip(x, lb, ub)
    return LpResult(OPTIMAL, x, float(c @ x), iters)
