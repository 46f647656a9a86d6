"""Exact solving of :class:`MilpModel` instances.

Three routes are available:

* ``bnb`` -- best-bound branch-and-bound over the bounded-variable simplex in
  :mod:`seqplan.milp.simplex`. Reference method for desk-scale models.
* ``highs`` -- the HiGHS MILP solver shipped with SciPy, used for the larger
  transport models.
* :func:`solve_bruteforce` -- enumeration of every integer assignment, used as
  an oracle in tests.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, sparse

from seqplan.milp.model import MilpModel, ModelError
from seqplan.milp.simplex import INFEASIBLE as LP_INFEASIBLE
from seqplan.milp.simplex import OPTIMAL as LP_OPTIMAL
from seqplan.milp.simplex import UNBOUNDED as LP_UNBOUNDED
from seqplan.milp.simplex import solve_lp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
GAP_LIMIT = "gap_limit"

INT_TOL = 1e-6
FEAS_TOL = 1e-6


class TooLarge(ModelError):
    pass


@dataclass
class SolveOptions:
    time_limit: float | None = None
    gap_tol: float = 1e-9
    node_limit: int | None = None
    backend: str = "bnb"
    # relative gap at which a search may stop; 0 asks for a proven optimum
    rel_gap: float = 0.0

    def tol(self, best: float) -> float:
        if not math.isfinite(best):
            return self.gap_tol
        return max(self.gap_tol, self.rel_gap * abs(best))


@dataclass
class MilpSolution:
    status: str
    values: np.ndarray | None
    objective: float
    bound: float
    gap: float
    node_count: int = 0
    backend: str = ""
    seconds: float = field(default=0.0, compare=False)

    def __getitem__(self, var) -> float:
        return float(self.values[var.index])

    def value(self, expr) -> float:
        if hasattr(expr, "index"):
            return self[expr]
        return expr.value(self.values)

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    def assignment(self, model: MilpModel) -> dict[str, float]:
        return {v.name: float(self.values[v.index]) for v in model.vars}


@dataclass
class _Arrays:
    c: np.ndarray
    c0: float
    A: np.ndarray
    senses: list[str]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    is_int: np.ndarray


def to_arrays(model: MilpModel) -> _Arrays:
    n = model.num_vars
    c = np.zeros(n)
    for v, coef in model.objective.terms.items():
        c[v.index] += coef
    A = np.zeros((len(model.constraints), n))
    b = np.zeros(len(model.constraints))
    senses = []
    for i, con in enumerate(model.constraints):
        for v, coef in con.expr.terms.items():
            A[i, v.index] += coef
        b[i] = con.rhs - con.expr.constant
        senses.append(con.sense)
    lb = np.array([v.lb for v in model.vars], dtype=float)
    ub = np.array([v.ub for v in model.vars], dtype=float)
    is_int = np.array([v.is_integer for v in model.vars], dtype=bool)
    return _Arrays(c, model.objective.constant, A, senses, b, lb, ub, is_int)


def _require_frozen(model: MilpModel) -> None:
    if not model.frozen:
        raise ModelError("freeze the model before solving")


def _trivial(model: MilpModel, backend: str) -> MilpSolution | None:
    """Answer models decided without search: a violated constant row, or no variables."""
    for con in model.constraints:
        if not con.expr.normalized().terms and con.violation({}) > FEAS_TOL * (1.0 + abs(con.rhs)):
            return MilpSolution(INFEASIBLE, None, math.inf, math.inf, math.inf, 0, backend)
    if model.num_vars == 0:
        c0 = model.objective.constant
        return MilpSolution(OPTIMAL, np.zeros(0), c0, c0, 0.0, 0, backend)
    return None


def lp_relaxation(model: MilpModel) -> MilpSolution:
    """Solve the model with all integrality dropped."""
    _require_frozen(model)
    done = _trivial(model, "simplex")
    if done is not None:
        return done
    arr = to_arrays(model)
    res = solve_lp(arr.c, arr.A, arr.senses, arr.b, arr.lb, arr.ub)
    if res.status == LP_OPTIMAL:
        obj = res.objective + arr.c0
        return MilpSolution(OPTIMAL, res.x, obj, obj, 0.0, 1, "simplex")
    status = INFEASIBLE if res.status == LP_INFEASIBLE else UNBOUNDED
    return MilpSolution(status, None, math.inf, math.inf, math.inf, 1, "simplex")


def solve(model: MilpModel, opts: SolveOptions | None = None) -> MilpSolution:
    opts = opts or SolveOptions()
    _require_frozen(model)
    start = time.perf_counter()
    if opts.backend not in ("bnb", "highs"):
        raise ValueError(f"unknown backend {opts.backend!r}")
    done = _trivial(model, opts.backend)
    if done is not None:
        return done
    if opts.backend == "bnb":
        sol = _branch_and_bound(model, opts)
    else:
        sol = _solve_highs(model, opts)
    sol.seconds = time.perf_counter() - start
    return sol


def _branch_and_bound(model: MilpModel, opts: SolveOptions) -> MilpSolution:
    arr = to_arrays(model)
    int_idx = np.flatnonzero(arr.is_int)
    # integer bounds can be rounded inward without losing solutions
    lb0 = arr.lb.copy()
    ub0 = arr.ub.copy()
    lb0[int_idx] = np.ceil(lb0[int_idx] - INT_TOL)
    ub0[int_idx] = np.floor(ub0[int_idx] + INT_TOL)
    start = time.perf_counter()

    def relax(lb, ub):
        return solve_lp(arr.c, arr.A, arr.senses, arr.b, lb, ub)

    incumbent = None
    best = math.inf
    nodes = 0
    counter = itertools.count()
    heap: list = []
    root = relax(lb0, ub0)
    nodes += 1
    if root.status == LP_UNBOUNDED:
        return MilpSolution(UNBOUNDED, None, -math.inf, -math.inf, math.inf, nodes, "bnb")
    if root.status == LP_OPTIMAL:
        heapq.heappush(heap, (root.objective, next(counter), lb0, ub0, root.x))
    limited = False
    while heap:
        bound, _, lb, ub, x = heap[0]
        if bound >= best - opts.tol(best):
            break
        if opts.node_limit is not None and nodes >= opts.node_limit:
            limited = True
            break
        if opts.time_limit is not None and time.perf_counter() - start > opts.time_limit:
            limited = True
            break
        heapq.heappop(heap)
        frac = np.abs(x[int_idx] - np.round(x[int_idx]))
        if frac.size == 0 or frac.max() <= INT_TOL:
            xr = x.copy()
            xr[int_idx] = np.round(xr[int_idx])
            val = float(arr.c @ xr)
            if val < best - opts.tol(best):
                best, incumbent = val, xr
            continue
        # most fractional, lowest index on ties (argmax returns the first)
        score = np.minimum(frac, 1.0 - frac)
        k = int(int_idx[int(np.argmax(score))])
        down_ub = ub.copy()
        down_ub[k] = math.floor(x[k])
        up_lb = lb.copy()
        up_lb[k] = math.ceil(x[k])
        for clb, cub in ((lb, down_ub), (up_lb, ub)):
            if clb[k] > cub[k]:
                continue
            child = relax(clb, cub)
            nodes += 1
            if child.status == LP_OPTIMAL and child.objective < best - opts.tol(best):
                heapq.heappush(heap, (child.objective, next(counter), clb, cub, child.x))
    lower = heap[0][0] if heap else best
    lower = min(lower, best)
    if incumbent is None:
        if limited:
            return MilpSolution(GAP_LIMIT, None, math.inf, lower + arr.c0, math.inf, nodes, "bnb")
        return MilpSolution(INFEASIBLE, None, math.inf, math.inf, math.inf, nodes, "bnb")
    obj = best + arr.c0
    if limited and best - lower > opts.gap_tol:
        return MilpSolution(GAP_LIMIT, incumbent, obj, lower + arr.c0, best - lower, nodes, "bnb")
    return MilpSolution(OPTIMAL, incumbent, obj, obj, 0.0, nodes, "bnb")


def _solve_highs(model: MilpModel, opts: SolveOptions) -> MilpSolution:
    n = model.num_vars
    c = np.zeros(n)
    for v, coef in model.objective.terms.items():
        c[v.index] += coef
    rows, cols, data = [], [], []
    lo, hi = [], []
    for i, con in enumerate(model.constraints):
        for v, coef in con.expr.terms.items():
            rows.append(i)
            cols.append(v.index)
            data.append(coef)
        rhs = con.rhs - con.expr.constant
        lo.append(rhs if con.sense in (">=", "==") else -np.inf)
        hi.append(rhs if con.sense in ("<=", "==") else np.inf)
    integrality = np.array([1 if v.is_integer else 0 for v in model.vars])
    bounds = optimize.Bounds([v.lb for v in model.vars], [v.ub for v in model.vars])
    constraints = []
    if model.constraints:
        A = sparse.csr_array((data, (rows, cols)), shape=(len(model.constraints), n))
        constraints.append(optimize.LinearConstraint(A, lo, hi))
    options = {"mip_rel_gap": float(opts.rel_gap), "presolve": True, "disp": False}
    if opts.time_limit is not None:
        options["time_limit"] = float(opts.time_limit)
    if opts.node_limit is not None:
        options["node_limit"] = int(opts.node_limit)
    res = optimize.milp(c, constraints=constraints, integrality=integrality, bounds=bounds, options=options)
    c0 = model.objective.constant
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.status == 2:
        return MilpSolution(INFEASIBLE, None, math.inf, math.inf, math.inf, nodes, "highs")
    if res.status == 3:
        return MilpSolution(UNBOUNDED, None, -math.inf, -math.inf, math.inf, nodes, "highs")
    if res.x is None:
        bound = getattr(res, "mip_dual_bound", None)
        bound = -math.inf if bound is None else float(bound) + c0
        return MilpSolution(GAP_LIMIT, None, math.inf, bound, math.inf, nodes, "highs")
    x = np.asarray(res.x, dtype=float).copy()
    ints = integrality.astype(bool)
    x[ints] = np.round(x[ints])
    obj = float(c @ x) + c0
    if res.status == 0:
        return MilpSolution(OPTIMAL, x, obj, obj, 0.0, nodes, "highs")
    bound = getattr(res, "mip_dual_bound", None)
    bound = obj if bound is None else float(bound) + c0
    return MilpSolution(GAP_LIMIT, x, obj, bound, max(0.0, obj - bound), nodes, "highs")


_BATCH = 1 << 16


def _box_min(A: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Row-wise minimum of ``A @ x`` over ``lo <= x <= hi`` (may be -inf)."""
    with np.errstate(invalid="ignore"):
        pick = np.where(A > 0, A * lo, A * hi)
    return np.where(A == 0, 0.0, pick).sum(axis=1)


def _interval_lp(a, rhs, le, ge, tol, lo: float, hi: float, c: float):
    """One continuous variable: its feasible set is an interval, so the LP is closed-form."""
    for r in range(a.size):
        if a[r] == 0:
            continue
        t = rhs[r] / a[r]
        if not ge[r]:  # a x <= rhs (also half of an equality)
            lo, hi = (lo, min(hi, t)) if a[r] > 0 else (max(lo, t), hi)
        if not le[r]:
            lo, hi = (max(lo, t), hi) if a[r] > 0 else (lo, min(hi, t))
    if lo > hi + FEAS_TOL * (1 + abs(hi)):
        return None
    x = lo if c > 0 else hi if c < 0 else (lo if math.isfinite(lo) else hi)
    if not math.isfinite(x):
        return None
    return np.array([min(max(x, lo), hi)])


def solve_bruteforce(model: MilpModel, max_assignments: int = 10**7) -> MilpSolution:
    """Enumerate all integer assignments; optimize the continuous remainder by LP.

    The continuous subproblems go through SciPy's ``linprog`` so that this
    oracle shares no code path with the branch-and-bound solver.
    """
    _require_frozen(model)
    arr = to_arrays(model)
    int_idx = np.flatnonzero(arr.is_int)
    cont_idx = np.flatnonzero(~arr.is_int)
    domains = []
    size = 1
    for k in int_idx:
        lo, hi = math.ceil(arr.lb[k] - INT_TOL), math.floor(arr.ub[k] + INT_TOL)
        domains.append(range(int(lo), int(hi) + 1))
        size *= max(0, int(hi) - int(lo) + 1)
        if size > max_assignments:
            raise TooLarge(f"more than {max_assignments} integer assignments")
    A_int = arr.A[:, int_idx]
    A_cont = arr.A[:, cont_idx]
    le = np.array([s == "<=" for s in arr.senses], dtype=bool)
    ge = np.array([s == ">=" for s in arr.senses], dtype=bool)
    eq = ~(le | ge)
    tol = FEAS_TOL * (1.0 + np.abs(arr.b))
    # interval bounds of the continuous part over its box prune without an LP
    lo_c, hi_c = arr.lb[cont_idx], arr.ub[cont_idx]
    row_min = _box_min(A_cont, lo_c, hi_c)
    row_max = -_box_min(-A_cont, lo_c, hi_c)
    cost_min = float(_box_min(arr.c[cont_idx][None, :], lo_c, hi_c)[0]) if cont_idx.size else 0.0
    upper, lower = le | eq, ge | eq
    c_int = arr.c[int_idx]
    best = math.inf
    best_x = None
    count = 0
    combos = itertools.product(*domains)
    while batch := list(itertools.islice(combos, _BATCH)):
        count += len(batch)
        X = np.array(batch, dtype=float).reshape(len(batch), int_idx.size)
        R = arr.b[None, :] - X @ A_int.T
        ok = np.all(row_min[upper] <= R[:, upper] + tol[upper], axis=1) & np.all(
            row_max[lower] >= R[:, lower] - tol[lower], axis=1
        )
        bound = X @ c_int + cost_min
        # increasing bound; ties keep enumeration order
        for k in np.flatnonzero(ok)[np.argsort(bound[ok], kind="stable")]:
            if bound[k] >= best - 1e-12:
                break
            xi, rhs = X[k], R[k]
            if cont_idx.size == 0:
                xc = np.zeros(0)
                val = float(bound[k])
            elif cont_idx.size == 1:
                xc = _interval_lp(A_cont[:, 0], rhs, le, ge, tol, lo_c[0], hi_c[0], arr.c[cont_idx][0])
                if xc is None:
                    continue
                val = float(c_int @ xi + arr.c[cont_idx] @ xc)
            else:
                A_ub = np.vstack([A_cont[le], -A_cont[ge]])
                b_ub = np.concatenate([rhs[le], -rhs[ge]])
                res = optimize.linprog(
                    arr.c[cont_idx],
                    A_ub=A_ub if A_ub.size else None,
                    b_ub=b_ub if A_ub.size else None,
                    A_eq=A_cont[eq] if eq.any() else None,
                    b_eq=rhs[eq] if eq.any() else None,
                    bounds=list(zip(lo_c, hi_c)),
                    method="highs",
                )
                if res.status != 0:
                    continue
                xc = res.x
                val = float(c_int @ xi + arr.c[cont_idx] @ xc)
            if val < best - 1e-12:
                best = val
                best_x = np.zeros(model.num_vars)
                best_x[int_idx] = xi
                best_x[cont_idx] = xc
    if best_x is None:
        return MilpSolution(INFEASIBLE, None, math.inf, math.inf, math.inf, count, "bruteforce")
    obj = best + arr.c0
    return MilpSolution(OPTIMAL, best_x, obj, obj, 0.0, count, "bruteforce")
