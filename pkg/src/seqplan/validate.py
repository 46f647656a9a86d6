"""Feasibility checks written against the instance data, not the models.

Each function returns a list of human-readable violations; empty means valid.
"""

from __future__ import annotations

from seqplan.ean import AUX, SOURCE, TARGET, TRANSFER, EventActivityNetwork
from seqplan.lin import LinePlan
from seqplan.ptn import PtnInstance, derive_turnarounds
from seqplan.routing import RoutingResult
from seqplan.timetable import Timetable
from seqplan.vehicles import Trip, VehicleSchedule


def check_plan(inst: PtnInstance, plan: LinePlan) -> list[str]:
    out = []
    on = {l for l, y in plan.chosen.items() if y == 1}
    if set(plan.chosen) != {l.id for l in inst.pool}:
        out.append("plan does not cover exactly the pool")
    seen_pairs = set()
    freq = {e.id: 0 for e in inst.edges}
    for l in inst.pool:
        if l.twin is not None:
            if (l.id in on) != (l.twin in on):
                out.append(f"line {l.id} and its twin {l.twin} differ")
            pair = frozenset((l.id, l.twin))
            if pair in seen_pairs:
                continue
            seen_pairs.add(pair)
        if l.id in on or l.twin in on:
            for eid in l.edges:
                freq[eid] += 1
    for e in inst.edges:
        if not e.f_min <= freq[e.id] <= e.f_max:
            out.append(f"edge {e.id} has frequency {freq[e.id]} outside [{e.f_min}, {e.f_max}]")
    cost = sum(l.cost for l in inst.pool if l.id in on)
    if abs(cost - plan.cost) > 1e-6:
        out.append(f"plan cost {plan.cost} differs from {cost}")
    return out


def check_routing(inst: PtnInstance, ean: EventActivityNetwork, plan: LinePlan, routing: RoutingResult) -> list[str]:
    out = []
    on = {l for l, y in plan.chosen.items() if y == 1}
    want = {k for k, c in inst.od.items() if c > 0}
    if set(routing.paths) != want:
        out.append("routed OD pairs differ from the pairs with demand")
    for (u, v), path in routing.paths.items():
        if not path:
            out.append(f"({u},{v}) has an empty route")
            continue
        acts = [ean.activities[a] for a in path]
        first, last = ean.events[acts[0].tail], ean.events[acts[-1].head]
        if (first.kind, first.stop) != (SOURCE, u) or (last.kind, last.stop) != (TARGET, v):
            out.append(f"({u},{v}) route does not run from source {u} to target {v}")
        for a, b in zip(acts, acts[1:]):
            if a.head != b.tail:
                out.append(f"({u},{v}) route breaks between activities {a.id} and {b.id}")
        visited = [acts[0].tail] + [a.head for a in acts]
        if len(set(visited)) != len(visited):
            out.append(f"({u},{v}) route is not simple")
        for a in acts:
            if not set(a.lines) <= on:
                out.append(f"({u},{v}) route uses activity {a.id} of a line that is not operated")
    return out


def check_timetable(inst: PtnInstance, ean: EventActivityNetwork, plan: LinePlan, tt: Timetable) -> list[str]:
    out = []
    on = {l for l, y in plan.chosen.items() if y == 1}
    T = inst.period
    for e, p in tt.pi.items():
        if not 0 <= p <= T - 1:
            out.append(f"event {e} at {p} outside [0, {T - 1}]")
    for a in ean.activities.values():
        if a.kind in AUX:
            continue
        active = set(a.lines) <= on
        if a.kind == TRANSFER and tt.eta.get(a.id, 0) != int(active):
            out.append(f"transfer {a.id}: eta {tt.eta.get(a.id)} but line product {int(active)}")
        if not active:
            continue
        if a.tail not in tt.pi or a.head not in tt.pi:
            out.append(f"activity {a.id} has an untimed event")
            continue
        d = tt.pi[a.head] - tt.pi[a.tail] + tt.z.get(a.id, 0) * T
        if not a.lower <= d <= a.upper:
            out.append(f"activity {a.id} lasts {d}, outside [{a.lower}, {a.upper}]")
    return out


def check_schedule(inst: PtnInstance, plan: LinePlan, trips: list[Trip], sched: VehicleSchedule) -> list[str]:
    out = []
    inst = derive_turnarounds(inst)
    on = sorted(l for l, y in plan.chosen.items() if y == 1)
    keys = {(t, l) for t in inst.params.periods for l in on}
    by_key = {tr.key: tr for tr in trips}
    if set(by_key) != keys:
        out.append("trips differ from operated lines times periods")
    indeg = {k: 0 for k in by_key}
    outdeg = {k: 0 for k in by_key}
    for k1, k2 in sched.links:
        if k1 not in by_key or k2 not in by_key:
            out.append(f"link {k1}->{k2} touches a trip that does not run")
            continue
        outdeg[k1] += 1
        indeg[k2] += 1
        need = inst.deadhead[(k1[1], k2[1])].time
        slack = by_key[k2].alpha - by_key[k1].omega
        if slack < need:
            out.append(f"link {k1}->{k2}: {slack} minutes available, {need} needed")
    for k in sched.pull_out:
        if k in indeg:
            indeg[k] += 1
        else:
            out.append(f"pull-out to trip {k} that does not run")
    for k in sched.pull_in:
        if k in outdeg:
            outdeg[k] += 1
        else:
            out.append(f"pull-in from trip {k} that does not run")
    for k in by_key:
        if indeg[k] != 1 or outdeg[k] != 1:
            out.append(f"trip {k}: in-degree {indeg[k]}, out-degree {outdeg[k]}")
    if len(sched.pull_out) != len(sched.pull_in):
        out.append("pull-outs and pull-ins differ in number")
    return out


def check_report(rep, net) -> list[str]:
    """All checks for one plan report."""
    return (
        check_plan(net.inst, rep.plan)
        + check_routing(net.inst, net.ean, rep.plan, rep.routing)
        + check_timetable(net.inst, net.ean, rep.plan, rep.timetable)
        + check_schedule(net.inst, rep.plan, rep.trips, rep.schedule)
    )
