"""Sequential processes, their (partial) integration and the price of sequentiality.

A process is a list of :class:`Stage` objects. Stage ``i`` owns a block of
decision variables and may refer to the blocks of every earlier stage. An
earlier block is handed to a stage either as plain numbers (it was fixed by a
previous solve) or as model variables (it is optimized jointly). Stages
write their constraints and objective so that both cases work; when a
product of two decision variables appears, the stage adds its own
linearization.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Callable, Sequence

from seqplan.milp import (
    GAP_LIMIT,
    OPTIMAL,
    LinExpr,
    MilpModel,
    MilpSolution,
    SolveOptions,
    Var,
    solve,
)

log = logging.getLogger(__name__)

SEQUENTIAL = "sequential"
HEURISTIC = "heuristic"


class ProcessError(Exception):
    pass


class StageInfeasible(ProcessError):
    def __init__(self, stage: int, status: str = "infeasible"):
        super().__init__(f"stage {stage} is {status} given its predecessors")
        self.stage = stage
        self.status = status


class IntegrationInfeasible(ProcessError):
    def __init__(self, k: int, l: int, status: str = "infeasible"):
        super().__init__(f"integrated stages {k}..{l} are {status} given the prefix")
        self.k = k
        self.l = l
        self.status = status


class NonpositiveOptimal(ProcessError):
    pass


class EmptyIndexSet(ProcessError):
    pass


class Stage:
    """One stage of a sequential process.

    Subclasses implement :meth:`declare`, :meth:`constrain` and
    :meth:`objective`. ``upstream`` is the list of blocks of stages
    ``1..i-1`` in order; each entry is either numbers or model variables.
    """

    name = "stage"

    def declare(self, model: MilpModel, upstream: list) -> Any:
        raise NotImplementedError

    def constrain(self, model: MilpModel, block: Any, upstream: list) -> None:
        raise NotImplementedError

    def objective(self, model: MilpModel, block: Any, upstream: list) -> LinExpr:
        raise NotImplementedError

    def evaluate(self, values: Any, upstream_values: list) -> float:
        """Stage objective at fixed values of this and all earlier stages."""
        expr = self.objective(MilpModel(name="eval"), values, upstream_values)
        return float(LinExpr.of(expr).constant)

    def extract(self, sol: MilpSolution, block: Any) -> Any:
        return resolve(block, sol)

    heuristic: Callable[[list], Any] | None = None


class LinearStage(Stage):
    """A stage given by callables over its variable(s) and upstream values.

    ``variables`` maps names to ``(lb, ub, kind)``. The callables receive the
    block (dict name -> Var or number) and the upstream list.
    """

    def __init__(
        self,
        name: str,
        variables: dict[str, tuple[float, float, str]],
        constraints: Callable[[dict, list], list],
        objective: Callable[[dict, list], Any],
        heuristic: Callable[[list], dict] | None = None,
    ):
        self.name = name
        self.variables = variables
        self._constraints = constraints
        self._objective = objective
        self.heuristic = heuristic

    def declare(self, model, upstream):
        from seqplan.milp import VarDef

        return {
            k: model.add_var(VarDef(f"{self.name}_{k}", kind, lb, ub), tag=self.name)
            for k, (lb, ub, kind) in self.variables.items()
        }

    def constrain(self, model, block, upstream):
        for j, con in enumerate(self._constraints(block, upstream)):
            if isinstance(con, bool):
                if not con:
                    model.add_constraint(LinExpr() >= 1, f"{self.name}_infeasible_{j}", tag=self.name)
                continue
            model.add_constraint(con, f"{self.name}_c{j}_{len(model.constraints)}", tag=self.name)

    def objective(self, model, block, upstream):
        return LinExpr.of(self._objective(block, upstream))


def resolve(block: Any, sol: MilpSolution) -> Any:
    """Replace every Var/LinExpr inside a nested block by its solution value."""
    if isinstance(block, Var):
        v = sol[block]
        return float(round(v)) if block.is_integer else v
    if isinstance(block, LinExpr):
        return block.value(sol.values)
    if isinstance(block, dict):
        return {k: resolve(v, sol) for k, v in block.items()}
    if isinstance(block, (list, tuple)):
        return type(block)(resolve(v, sol) for v in block)
    return block


@dataclass(frozen=True)
class Weights:
    values: tuple[float, ...]

    def __post_init__(self):
        if any((not isinstance(w, Real)) or w < 0 or math.isnan(w) for w in self.values):
            raise ValueError("weights must be nonnegative numbers")
        if not any(w > 0 for w in self.values):
            raise ValueError("at least one weight must be positive")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]


def as_weights(w) -> Weights:
    return w if isinstance(w, Weights) else Weights(tuple(float(x) for x in w))


@dataclass
class SolveRecord:
    stages: tuple[int, ...]
    status: str
    objective: float
    bound: float
    gap: float
    nodes: int
    seconds: float


@dataclass
class PipelineResult:
    values: list
    f: list[float]
    weights: Weights
    tags: list[str]
    solves: list[SolveRecord] = field(default_factory=list)
    k: int | None = None
    l: int | None = None

    @property
    def total(self) -> float:
        return sum(w * fi for w, fi in zip(self.weights.values, self.f))

    @property
    def optimal(self) -> bool:
        return all(s.status == OPTIMAL for s in self.solves)

    @property
    def gap(self) -> float:
        return max((s.gap for s in self.solves), default=0.0)

    @property
    def integrated_objective(self) -> float | None:
        """MILP objective of the joint solve of stages ``k..l``."""
        if self.k is None:
            return None
        want = tuple(range(self.k, self.l + 1))
        return next((s.objective for s in self.solves if s.stages == want), None)

    def to_dict(self, pos: float | None = None) -> dict:
        out = {
            "stages": [{"i": i + 1, "f_i": f, "tag": t} for i, (f, t) in enumerate(zip(self.f, self.tags))],
            "total": self.total,
            "weights": list(self.weights.values),
        }
        if pos is not None:
            out["pos"] = pos
        return out

    def to_json(self, pos: float | None = None) -> str:
        return json.dumps(self.to_dict(pos), sort_keys=True)


def build_block(
    stages: Sequence[Stage],
    first: int,
    last: int,
    upstream_values: list,
    weights: Weights | None,
    name: str,
) -> tuple[MilpModel, list]:
    """Frozen model for stages ``first..last`` (0-based, inclusive) and their variable blocks."""
    model = MilpModel(name=name)
    upstream = list(upstream_values)
    blocks = []
    for i in range(first, last + 1):
        block = stages[i].declare(model, upstream)
        stages[i].constrain(model, block, upstream)
        blocks.append(block)
        upstream.append(block)
    obj = LinExpr()
    for i in range(first, last + 1):
        w = 1.0 if weights is None else weights[i]
        if w == 0:
            continue
        obj = obj + w * stages[i].objective(model, blocks[i - first], upstream[:i])
    model.set_objective(obj)
    return model.freeze(), blocks


def _solve_block(
    stages: Sequence[Stage],
    first: int,
    last: int,
    upstream_values: list,
    weights: Weights | None,
    opts: SolveOptions,
    name: str,
) -> tuple[list, MilpSolution]:
    model, blocks = build_block(stages, first, last, upstream_values, weights, name)
    sol = solve(model, opts)
    if not sol.has_solution:
        return blocks, sol
    return [stages[i].extract(sol, blocks[i - first]) for i in range(first, last + 1)], sol


def _record(first: int, last: int, sol: MilpSolution) -> SolveRecord:
    return SolveRecord(
        tuple(range(first + 1, last + 2)), sol.status, sol.objective, sol.bound, sol.gap, sol.node_count, sol.seconds
    )


def run_integrated(
    stages: Sequence[Stage],
    weights,
    k: int,
    l: int,
    opts: SolveOptions | None = None,
    heuristic_prefix: bool = False,
    prefix: list | None = None,
) -> PipelineResult:
    """Solve stages ``1..k-1`` sequentially, ``k..l`` jointly, ``l+1..n`` sequentially.

    ``k`` and ``l`` are 1-based and inclusive. With ``heuristic_prefix`` the
    stages before ``k`` use their registered heuristic when they have one.
    ``prefix`` supplies already computed values for stages ``1..k-1``.
    """
    weights = as_weights(weights)
    n = len(stages)
    if len(weights) != n:
        raise ValueError(f"{n} stages but {len(weights)} weights")
    if not 1 <= k <= l <= n:
        raise ValueError(f"need 1 <= k <= l <= n, got k={k}, l={l}, n={n}")
    opts = opts or SolveOptions()
    values: list = []
    tags: list[str] = []
    records: list[SolveRecord] = []
    if prefix is not None:
        if len(prefix) != k - 1:
            raise ValueError("prefix must hold exactly the values of stages 1..k-1")
        values = list(prefix)
        tags = [HEURISTIC if heuristic_prefix else SEQUENTIAL] * (k - 1)
    else:
        for i in range(k - 1):
            stage = stages[i]
            if heuristic_prefix and stage.heuristic is not None:
                values.append(stage.heuristic(list(values)))
                tags.append(HEURISTIC)
                continue
            vals, sol = _solve_block(stages, i, i, values, None, opts, f"seq{i + 1}")
            records.append(_record(i, i, sol))
            if not sol.has_solution:
                raise StageInfeasible(i + 1, sol.status)
            values.append(vals[0])
            tags.append(SEQUENTIAL)
    if k == l:
        vals, sol = _solve_block(stages, k - 1, k - 1, values, None, opts, f"seq{k}")
        tag = SEQUENTIAL
    else:
        vals, sol = _solve_block(stages, k - 1, l - 1, values, weights, opts, f"int{k}_{l}")
        tag = f"integrated({k}..{l})"
    records.append(_record(k - 1, l - 1, sol))
    if not sol.has_solution:
        if k == l:
            raise StageInfeasible(k, sol.status)
        raise IntegrationInfeasible(k, l, sol.status)
    values.extend(vals)
    tags.extend([tag] * (l - k + 1))
    for i in range(l, n):
        vals, sol = _solve_block(stages, i, i, values, None, opts, f"seq{i + 1}")
        records.append(_record(i, i, sol))
        if not sol.has_solution:
            raise StageInfeasible(i + 1, sol.status)
        values.append(vals[0])
        tags.append(SEQUENTIAL)
    f = [stages[i].evaluate(values[i], values[:i]) for i in range(n)]
    return PipelineResult(values, f, weights, tags, records, k, l)


def run_sequential(stages: Sequence[Stage], weights, opts: SolveOptions | None = None) -> PipelineResult:
    """Solve every stage on its own objective, feeding optima forward."""
    res = run_integrated(stages, weights, 1, 1, opts)
    res.k = res.l = None
    return res


def run_msp(stages: Sequence[Stage], weights, opts: SolveOptions | None = None) -> PipelineResult:
    return run_integrated(stages, weights, 1, len(stages), opts)


def pos(f_candidate: float, f_optimal: float) -> float:
    """Relative excess of a candidate objective over the integrated optimum."""
    if not f_optimal > 0:
        raise NonpositiveOptimal(f"price of sequentiality needs a positive optimum, got {f_optimal}")
    return (f_candidate - f_optimal) / f_optimal


def pos_bound_weighted(per_objective_pos: Sequence[float], weights) -> float:
    """Largest single-objective price over the stages with positive weight."""
    vals = [p for p, w in zip(per_objective_pos, weights) if w > 0]
    if not vals:
        raise EmptyIndexSet("no stage has a positive weight")
    return max(vals)


def suffix_chain(
    stages: Sequence[Stage], weights, opts: SolveOptions | None = None, heuristic_prefix: bool = False
) -> list[PipelineResult]:
    """Results of ``Int(k, n)`` for ``k = 1..n``; entry ``k-1`` holds the run for ``k``.

    All runs share the same (possibly heuristic) prefix so that the chain of
    totals is nonincreasing as ``k`` decreases.
    """
    n = len(stages)
    opts = opts or SolveOptions()
    # one prefix, reused by every suffix integration
    base = run_integrated(stages, weights, n, n, opts, heuristic_prefix=heuristic_prefix)
    out = []
    for k in range(1, n + 1):
        if k == n:
            out.append(base)
        else:
            res = run_integrated(stages, weights, k, n, opts, heuristic_prefix=heuristic_prefix, prefix=base.values[: k - 1])
            res.tags[: k - 1] = base.tags[: k - 1]
            out.append(res)
    return out
