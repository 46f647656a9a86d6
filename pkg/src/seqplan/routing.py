"""Passenger routing on the extended event-activity network.

Every OD pair with positive demand sends one unit of flow from its source
event to its target event. Drive and wait activities of a line are usable
only when the line is operated. Routes are measured by activity lower bounds
(plus an optional transfer penalty).

Blocks handed downstream are nested dicts ``{(u, v): {activity_id: p}}``
where ``p`` is a model variable, or ``1`` for activities on the route (absent
entries are ``0``).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path

from seqplan.ean import AUX, DRIVE, SOURCE, TARGET, TRANSFER, WAIT, EventActivityNetwork, restrict
from seqplan.framework import Stage
from seqplan.milp import LinExpr, MilpModel, Var, VarDef, quicksum
from seqplan.ptn import PtnInstance

TAG = "pass"


class Unroutable(Exception):
    def __init__(self, u: int, v: int):
        super().__init__(f"no route from stop {u} to stop {v} on the chosen lines")
        self.u = u
        self.v = v


def weight(inst: PtnInstance, a) -> float:
    return a.lower + (inst.params.transfer_penalty if a.kind == TRANSFER else 0.0)


def is_fixed(block) -> bool:
    """True when no entry of a (nested) block is a model variable."""
    if isinstance(block, (Var, LinExpr)):
        return False
    if isinstance(block, dict):
        return all(is_fixed(v) for v in block.values())
    return True


@dataclass(frozen=True)
class RoutingResult:
    paths: dict[tuple[int, int], tuple[int, ...]]
    demand: dict[tuple[int, int], float]
    f2: float
    loads: dict[int, float]

    def to_csv(self, ean: EventActivityNetwork, inst: PtnInstance) -> str:
        rows = ["u;v;activity_ids;length"]
        for (u, v), path in sorted(self.paths.items()):
            length = sum(weight(inst, ean.activities[a]) for a in path)
            rows.append(f"{u};{v};{','.join(map(str, path))};{length:g}")
        return "\n".join(rows) + "\n"

    def write(self, path, ean, inst) -> Path:
        p = Path(path)
        p.write_text(self.to_csv(ean, inst))
        return p


def result_of(inst: PtnInstance, ean: EventActivityNetwork, paths: dict) -> RoutingResult:
    loads: dict[int, float] = {}
    f2 = 0.0
    demand = {}
    for od, path in paths.items():
        c = inst.od[od]
        demand[od] = c
        for a in path:
            loads[a] = loads.get(a, 0.0) + c
            f2 += c * weight(inst, ean.activities[a])
    return RoutingResult(dict(sorted(paths.items())), demand, f2, dict(sorted(loads.items())))


def path_from_flow(ean: EventActivityNetwork, u: int, v: int, used: set[int]) -> tuple[int, ...]:
    """Source-to-target path inside a 0/1 flow; circulations are dropped."""
    node = ean.event_id(SOURCE, u)
    goal = ean.event_id(TARGET, v)
    path: list[int] = []
    at = {node: 0}  # event -> length of the path when it was reached
    left = set(used)
    while node != goal:
        nxt = sorted(a for a in ean.out_arcs[node] if a in left)
        if not nxt:
            raise ValueError(f"flow for ({u},{v}) is not a source-target flow")
        a = nxt[0]
        left.discard(a)
        path.append(a)
        node = ean.activities[a].head
        if node in at:
            cut = at[node]
            for b in path[cut:]:
                h = ean.activities[b].head
                if h != node:
                    at.pop(h, None)
            del path[cut:]
        else:
            at[node] = len(path)
    return tuple(path)


def paths_of(block: dict) -> dict:
    return {od: tuple(sorted(a for a, p in row.items() if round(p) == 1)) for od, row in block.items()}


class PassStage(Stage):
    name = TAG

    def __init__(self, inst: PtnInstance, ean: EventActivityNetwork):
        if not ean.extended:
            raise ValueError("passenger routing needs the extended network")
        self.inst = inst
        self.ean = ean

    def declare(self, model: MilpModel, upstream: list) -> dict:
        y = upstream[0]
        y_fixed = is_fixed(y)
        p = {}
        for (u, v) in self.inst.demand_pairs():
            row = {}
            for a in self.ean.activities.values():
                if y_fixed and any(round(y[l]) == 0 for l in a.lines):
                    continue
                row[a.id] = model.add_var(VarDef.binary(f"p_{u}_{v}_{a.id}"), tag=TAG)
            p[(u, v)] = row
        return p

    def constrain(self, model: MilpModel, block: dict, upstream: list) -> None:
        y = upstream[0]
        y_fixed = is_fixed(y)
        for (u, v), row in block.items():
            b = self.ean.b_vector(u, v)
            for ev in self.ean.events:
                out = [row[a] for a in self.ean.out_arcs[ev] if a in row]
                inn = [row[a] for a in self.ean.in_arcs[ev] if a in row]
                rhs = b.get(ev, 0)
                if not out and not inn and rhs == 0:
                    continue
                model.add_constraint(quicksum(out) - quicksum(inn) == rhs, f"pass_flow_{u}_{v}_{ev}", tag=TAG)
            if y_fixed:
                continue
            for aid, var in row.items():
                a = self.ean.activities[aid]
                if a.kind in (DRIVE, WAIT):
                    model.add_constraint(var - y[a.line] <= 0, f"pass_line_{u}_{v}_{aid}", tag=TAG)

    def objective(self, model, block, upstream) -> LinExpr:
        out = LinExpr()
        for od, row in block.items():
            c = self.inst.od[od]
            for aid, p in row.items():
                w = weight(self.inst, self.ean.activities[aid])
                if w:
                    out = out._iadd(LinExpr.of(p), c * w)
        return out

    def extract(self, sol, block) -> dict:
        out = {}
        for (u, v), row in block.items():
            used = {aid for aid, var in row.items() if sol[var] > 0.5}
            out[(u, v)] = {a: 1 for a in path_from_flow(self.ean, u, v, used)}
        return out


def route_oracle(inst: PtnInstance, ean: EventActivityNetwork, chosen) -> RoutingResult:
    """Shortest routes per OD pair on the chosen lines by label setting.

    Labels are ``(length, activity ids)``; among routes of equal length the
    lexicographically smallest id sequence wins.
    """
    sub = restrict(ean, chosen)
    paths = {}
    for (u, v) in inst.demand_pairs():
        src = sub.event_id(SOURCE, u)
        goal = sub.event_id(TARGET, v)
        best: dict[int, tuple[float, tuple[int, ...]]] = {src: (0.0, ())}
        heap = [(0.0, (), src)]
        done = set()
        while heap:
            d, path, node = heapq.heappop(heap)
            if node in done:
                continue
            done.add(node)
            if node == goal:
                break
            for aid in sub.out_arcs[node]:
                a = sub.activities[aid]
                if a.head in done:
                    continue
                lab = (d + weight(inst, a), path + (aid,))
                if a.head not in best or lab < best[a.head]:
                    best[a.head] = lab
                    heapq.heappush(heap, (lab[0], lab[1], a.head))
        if goal not in done:
            raise Unroutable(u, v)
        paths[(u, v)] = best[goal][1]
    return result_of(inst, ean, paths)


def routing_of(inst: PtnInstance, ean: EventActivityNetwork, block: dict) -> RoutingResult:
    """Routing result of an extracted block (activity ids in route order)."""
    paths = {}
    for (u, v), row in block.items():
        paths[(u, v)] = path_from_flow(ean, u, v, {a for a, p in row.items() if round(p) == 1})
    return result_of(inst, ean, paths)


def timed_loads(ean: EventActivityNetwork, routing: RoutingResult) -> dict[int, float]:
    """Loads restricted to activities with a timetable duration."""
    return {a: w for a, w in routing.loads.items() if ean.activities[a].kind not in AUX}
