"""The four transport stages as one process, and the ways to run it.

Stage order: line planning, passenger routing, timetabling, vehicle
scheduling. An approach picks which consecutive stages are solved jointly:

=============  ==========  ==========================================
approach       joint       objective of the joint model
=============  ==========  ==========================================
``seq``        none        each stage on its own objective
``timpass``    2..3        lambda3 f3
``lintimpass`` 1..3        lambda1 f1 + lambda3 f3
``timveh``     3..4        lambda3 f3 + lambda4 f4
``timpassveh`` 2..4        lambda3 f3 + lambda4 f4
``full``       1..4        lambda3 f3 + lambda4 f4
=============  ==========  ==========================================

Reports always recompute f1..f4 from the produced plan, routes, timetable
and schedule, and score ``lambda3 f3 + lambda4 f4``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from seqplan.ean import EventActivityNetwork, build_ean, extend_for_routing
from seqplan.framework import (
    IntegrationInfeasible,
    PipelineResult,
    ProcessError,
    SolveRecord,
    Weights,
    build_block,
    pos,
    run_integrated,
)
from seqplan.lin import LinePlan, LinStage, plan_of
from seqplan.milp import GAP_LIMIT, OPTIMAL, MilpModel, SolveOptions
from seqplan.milp.stats import BlockStats, model_stats
from seqplan.ptn import PtnInstance, derive_turnarounds
from seqplan.routing import PassStage, RoutingResult, routing_of
from seqplan.timetable import Timetable, TimStage, evaluate_f3, timetable_of
from seqplan.vehicles import CostBreakdown, Trip, VehicleSchedule, VehStage, evaluate_f4, rollout, schedule_of

log = logging.getLogger(__name__)

APPROACHES: dict[str, tuple[int, int]] = {
    "seq": (1, 1),
    "timpass": (2, 3),
    "lintimpass": (1, 3),
    "timveh": (3, 4),
    "timpassveh": (2, 4),
    "full": (1, 4),
}
STAGE_TAGS = ["lin", "pass", "tim", "veh"]

# transport solves go to HiGHS; the pure-Python branch and bound is too slow for them
DEFAULT_OPTS = SolveOptions(backend="highs")


@dataclass(frozen=True)
class Lambdas:
    lambda1: float = 0.0
    lambda3: float = 1.0
    lambda4: float = 1.0

    def __post_init__(self):
        if min(self.lambda1, self.lambda3, self.lambda4) < 0:
            raise ValueError("lambda weights must be nonnegative")
        if self.lambda3 == 0 and self.lambda4 == 0:
            raise ValueError("lambda3 and lambda4 must not both be zero")

    @classmethod
    def of(cls, inst: PtnInstance) -> Lambdas:
        p = inst.params
        return cls(p.lambda1, p.lambda3, p.lambda4)

    def weights(self, approach: str) -> Weights:
        l1 = self.lambda1 if approach == "lintimpass" else 0.0
        return Weights((l1, 0.0, self.lambda3, self.lambda4))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lambda1, self.lambda3, self.lambda4)


@dataclass
class Network:
    """Instance with derived deadheads, its extended EAN and the four stages."""

    inst: PtnInstance
    ean: EventActivityNetwork
    stages: list

    @classmethod
    def of(cls, inst: PtnInstance) -> Network:
        inst = derive_turnarounds(inst)
        ean = extend_for_routing(build_ean(inst), inst)
        return cls(inst, ean, [LinStage(inst), PassStage(inst, ean), TimStage(inst, ean), VehStage(inst, ean)])


@dataclass
class PlanReport:
    instance: str
    approach: str
    lambdas: Lambdas
    plan: LinePlan
    routing: RoutingResult
    timetable: Timetable
    trips: list[Trip]
    schedule: VehicleSchedule
    costs: CostBreakdown
    f1: float
    f2: float
    f3: float
    f4: float
    solves: list[SolveRecord] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)
    pos: float | None = None
    reference_total: float | None = None
    reference_gap: float | None = None

    @property
    def total(self) -> float:
        return self.lambdas.lambda3 * self.f3 + self.lambdas.lambda4 * self.f4

    @property
    def optimal(self) -> bool:
        return all(s.status == OPTIMAL for s in self.solves)

    @property
    def gap(self) -> float:
        return max((s.gap for s in self.solves), default=0.0)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "approach": self.approach,
            "joint_stages": list(APPROACHES[self.approach]) if self.approach != "seq" else [],
            "lambda": {"lambda1": self.lambdas.lambda1, "lambda3": self.lambdas.lambda3, "lambda4": self.lambdas.lambda4},
            "f1": self.f1,
            "f2": self.f2,
            "f3": self.f3,
            "f4": self.f4,
            "total": self.total,
            "pos": self.pos,
            "reference": {"total": self.reference_total, "gap": self.reference_gap},
            "stage_tags": self.tags,
            "line_plan": {str(l): y for l, y in sorted(self.plan.chosen.items())},
            "routes": [
                {"u": u, "v": v, "demand": self.routing.demand[(u, v)], "activities": list(p)}
                for (u, v), p in sorted(self.routing.paths.items())
            ],
            "timetable": {
                "pi": {str(e): v for e, v in sorted(self.timetable.pi.items())},
                "z": {str(a): v for a, v in sorted(self.timetable.z.items())},
                "eta": {str(a): v for a, v in sorted(self.timetable.eta.items())},
            },
            "trips": [
                {"period": t.period, "line": t.line, "alpha": t.alpha, "omega": t.omega, "delta": t.delta}
                for t in self.trips
            ],
            "vehicles": [[list(k) for k in ch] for ch in self.schedule.chains()],
            "vehicle_costs": self.costs.to_dict(),
            # wall-clock times are left out so reports are reproducible byte for byte
            "solves": [
                {
                    "stages": list(s.stages),
                    "status": s.status,
                    "objective": _finite(s.objective),
                    "bound": _finite(s.bound),
                    "gap": _finite(s.gap),
                }
                for s in self.solves
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, directory, net: Network) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(self.to_json())
        return [
            d / "report.json",
            self.plan.write(d / "lineplan.csv"),
            self.timetable.write(d / "timetable.csv", net.ean),
            self.routing.write(d / "routes.csv", net.ean, net.inst),
            self.schedule.write(d / "schedule.csv", self.costs),
        ]


def _finite(x: float):
    return x if math.isfinite(x) else None


def report_of(net: Network, approach: str, lam: Lambdas, res: PipelineResult) -> PlanReport:
    inst, ean = net.inst, net.ean
    y, p, tt_block, veh = res.values
    plan = plan_of(inst, y)
    routing = routing_of(inst, ean, p)
    tt = timetable_of(inst, tt_block)
    trips = rollout(inst, ean, plan.lines, tt)
    sched = schedule_of(veh)
    costs = evaluate_f4(inst, plan.lines, trips, sched)
    f3 = evaluate_f3(inst, ean, routing, tt)
    return PlanReport(
        inst.name, approach, lam, plan, routing, tt, trips, sched, costs,
        plan.cost, routing.f2, f3, costs.total, list(res.solves), list(res.tags),
    )


def run_approach(
    inst: PtnInstance | Network,
    approach: str,
    lam: Lambdas | None = None,
    opts: SolveOptions | None = None,
    reference: PlanReport | None = None,
) -> PlanReport:
    """Run one approach; with ``reference`` (a full-model report) the PoS is filled in."""
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}; choose from {', '.join(APPROACHES)}")
    net = inst if isinstance(inst, Network) else Network.of(inst)
    lam = lam or Lambdas.of(net.inst)
    k, l = APPROACHES[approach]
    log.info("running %s on %s", approach, net.inst.name)
    res = run_integrated(net.stages, lam.weights(approach), k, l, opts or DEFAULT_OPTS)
    rep = report_of(net, approach, lam, res)
    if reference is not None:
        attach_pos(rep, reference)
    return rep


def attach_pos(rep: PlanReport, reference: PlanReport) -> PlanReport:
    rep.reference_total = reference.total
    rep.reference_gap = reference.gap
    rep.pos = pos(rep.total, reference.total) if reference.total > 0 else None
    return rep


def reference_run(
    net: PtnInstance | Network, lam: Lambdas | None = None, opts: SolveOptions | None = None, fallbacks=()
) -> PlanReport:
    """The full model; if it stops without a solution, the best of ``fallbacks`` stands in.

    A stand-in carries an infinite gap so that PoS values are flagged as relative
    to an incumbent, not to a proven optimum.
    """
    net = net if isinstance(net, Network) else Network.of(net)
    try:
        return run_approach(net, "full", lam, opts)
    except IntegrationInfeasible as exc:
        if exc.status != GAP_LIMIT or not fallbacks:
            raise
        best = min(fallbacks, key=lambda r: r.total)
        log.warning("full model hit its limit without a solution; using %s as incumbent", best.approach)
        stand_in = PlanReport(**{**best.__dict__})
        stand_in.solves = [SolveRecord((1, 2, 3, 4), GAP_LIMIT, best.total, -math.inf, math.inf, 0, 0.0)]
        return stand_in


def pos_table(
    inst: PtnInstance | Network,
    lam: Lambdas | None = None,
    approaches=("seq", "timpass", "lintimpass", "timveh", "timpassveh"),
    opts: SolveOptions | None = None,
) -> list[PlanReport]:
    """All requested approaches plus the full model, each with its PoS."""
    net = inst if isinstance(inst, Network) else Network.of(inst)
    reports = [run_approach(net, a, lam, opts) for a in approaches if a != "full"]
    ref = reference_run(net, lam, opts, reports)
    for r in reports:
        attach_pos(r, ref)
    attach_pos(ref, ref)
    return reports + [ref]


@dataclass
class SweepPoint:
    report: PlanReport
    dominated: bool


def pareto_sweep(
    inst: PtnInstance | Network,
    lambdas: list[Lambdas],
    approaches=("full",),
    opts: SolveOptions | None = None,
) -> list[SweepPoint]:
    """One report per (approach, lambda); flags points dominated in the (f3, f4) plane."""
    net = inst if isinstance(inst, Network) else Network.of(inst)
    reports = [run_approach(net, a, lam, opts) for lam in lambdas for a in approaches]
    out = []
    for r in reports:
        dom = any(
            q.f3 <= r.f3 + 1e-9 and q.f4 <= r.f4 + 1e-9 and (q.f3 < r.f3 - 1e-9 or q.f4 < r.f4 - 1e-9)
            for q in reports
        )
        out.append(SweepPoint(r, dom))
    return out


SUMMARY_FIELDS = ["approach", "lambda1", "lambda3", "lambda4", "f1", "f2", "f3", "f4", "total", "pos", "gap"]


def summary_csv(reports: list[PlanReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=";", lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in reports:
        w.writerow(
            [r.approach, *r.lambdas.as_tuple(), r.f1, r.f2, r.f3, r.f4, r.total,
             "" if r.pos is None else r.pos, _finite(r.gap) if _finite(r.gap) is not None else "inf"]
        )
    return buf.getvalue()


def approach_model(
    inst: PtnInstance | Network, approach: str, lam: Lambdas | None = None, opts: SolveOptions | None = None
) -> MilpModel:
    """The joint model an approach solves (for ``seq``: the line planning model).

    Stages before the joint block are solved sequentially to fix their values.
    """
    net = inst if isinstance(inst, Network) else Network.of(inst)
    lam = lam or Lambdas.of(net.inst)
    k, l = APPROACHES[approach]
    prefix = []
    if k > 1:
        pre = run_integrated(net.stages, lam.weights(approach), k - 1, k - 1, opts or DEFAULT_OPTS)
        prefix = pre.values[: k - 1]
    weights = None if k == l else lam.weights(approach)
    model, _ = build_block(net.stages, k - 1, l - 1, prefix, weights, f"{approach}_{net.inst.name}")
    return model


def approach_stats(inst, approach: str, lam: Lambdas | None = None, opts: SolveOptions | None = None) -> BlockStats:
    return model_stats(approach_model(inst, approach, lam, opts), STAGE_TAGS)


__all__ = [
    "APPROACHES",
    "Lambdas",
    "Network",
    "PlanReport",
    "ProcessError",
    "SweepPoint",
    "approach_model",
    "approach_stats",
    "attach_pos",
    "pareto_sweep",
    "pos_table",
    "reference_run",
    "run_approach",
    "summary_csv",
]
