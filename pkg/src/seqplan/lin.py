"""Line planning: choose lines from the pool within edge frequency bounds at least cost."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from seqplan.framework import Stage, StageInfeasible
from seqplan.milp import LinExpr, MilpModel, SolveOptions, VarDef, quicksum, solve
from seqplan.ptn import PtnInstance

TAG = "lin"


class Infeasible(StageInfeasible):
    def __init__(self, status: str = "infeasible"):
        super().__init__(1, status)


@dataclass(frozen=True)
class LinePlan:
    chosen: dict[int, int]
    cost: float

    @property
    def lines(self) -> list[int]:
        return sorted(l for l, y in self.chosen.items() if y)

    def to_csv(self) -> str:
        return "line_id;chosen\n" + "".join(f"{l};{y}\n" for l, y in sorted(self.chosen.items()))

    def write(self, path) -> Path:
        p = Path(path)
        p.write_text(self.to_csv())
        return p


def edge_counts(inst: PtnInstance, y) -> dict[int, object]:
    """Frequency of every edge as a sum over one line per twin pair."""
    out: dict[int, object] = {e.id: 0 for e in inst.edges}
    for l in inst.frequency_lines():
        for eid in l.edges:
            out[eid] = out[eid] + y[l.id]
    return out


def build_lin(inst: PtnInstance, model: MilpModel) -> dict:
    y = {l.id: model.add_var(VarDef.binary(f"y_{l.id}"), tag=TAG) for l in inst.pool}
    for e in inst.edges:
        load = LinExpr.of(quicksum(y[l.id] for l in inst.frequency_lines() if e.id in l.edges))
        model.add_constraint(load >= e.f_min, f"lin_fmin_{e.id}", tag=TAG)
        model.add_constraint(load <= e.f_max, f"lin_fmax_{e.id}", tag=TAG)
    for l in inst.pool:
        if l.twin is not None and l.id < l.twin:
            model.add_constraint(y[l.id] - y[l.twin] == 0, f"lin_twin_{l.id}", tag=TAG)
    return y


def f1(inst: PtnInstance, y) -> LinExpr:
    return LinExpr.of(quicksum(l.cost * y[l.id] for l in inst.pool))


class LinStage(Stage):
    name = TAG

    def __init__(self, inst: PtnInstance):
        self.inst = inst

    def declare(self, model, upstream):
        return build_lin(self.inst, model)

    def constrain(self, model, block, upstream):
        pass

    def objective(self, model, block, upstream):
        return f1(self.inst, block)

    def extract(self, sol, block):
        return {l: int(round(sol[v])) for l, v in block.items()}


def plan_of(inst: PtnInstance, y: dict) -> LinePlan:
    chosen = {l.id: int(round(y[l.id])) for l in inst.pool}
    return LinePlan(chosen, sum(l.cost * chosen[l.id] for l in inst.pool))


def solve_lin(inst: PtnInstance, opts: SolveOptions | None = None) -> LinePlan:
    model = MilpModel(name="lin")
    y = build_lin(inst, model)
    model.set_objective(f1(inst, y))
    sol = solve(model.freeze(), opts or SolveOptions())
    if not sol.has_solution:
        raise Infeasible(sol.status)
    return plan_of(inst, {l: sol[v] for l, v in y.items()})
