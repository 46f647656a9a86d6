"""Periodic timetabling with line activation.

Event times ``pi`` live in ``{0, ..., T-1}``; an activity ``a = (i, j)`` lasts
``pi_j - pi_i + z_a * T``. The window ``[L_a, U_a]`` is enforced only when
``eta_a = 1``, i.e. when all lines owning ``a`` are operated. With a fixed
line plan only the operated lines get variables.

Blocks are dicts ``{"pi": {event: .}, "z": {activity: .}, "eta": {activity: .}}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

from seqplan.ean import AUX, TRANSFER, ARR, EventActivityNetwork
from seqplan.framework import Stage
from seqplan.milp import LinExpr, MilpModel, VarDef
from seqplan.ptn import PtnInstance
from seqplan.routing import RoutingResult, is_fixed

TAG = "tim"


class InfeasibleTimetable(Exception):
    pass


@dataclass(frozen=True)
class Timetable:
    pi: dict[int, int]
    z: dict[int, int]
    eta: dict[int, int]
    period: int

    def dur(self, a) -> int:
        return self.pi.get(a.head, 0) - self.pi.get(a.tail, 0) + self.z.get(a.id, 0) * self.period

    def write(self, path, ean: EventActivityNetwork) -> Path:
        p = Path(path)
        rows = ["event_id;pi"] + [f"{e};{v}" for e, v in sorted(self.pi.items())]
        p.write_text("\n".join(rows) + "\n")
        acts = ["activity_id;z;eta;duration"] + [
            f"{a};{self.z[a]};{self.eta.get(a, 0)};{self.dur(ean.activities[a])}" for a in sorted(self.z)
        ]
        p.with_name(p.stem + "_activities.csv").write_text("\n".join(acts) + "\n")
        return p


def big_m(inst: PtnInstance, ean: EventActivityNetwork) -> float:
    if inst.params.big_m is not None:
        return inst.params.big_m
    return inst.period + max((a.upper for a in ean.timed()), default=0)


def z_bounds(inst: PtnInstance, a, m: float) -> tuple[int, int]:
    return -1, math.ceil((a.upper + m) / inst.period) + 1


def _lin(x) -> LinExpr:
    return LinExpr.of(x)


def activation(y, a):
    """``eta_a`` as a number when ``y`` is fixed, else the owner line variable (drive/wait)."""
    if is_fixed(y):
        return int(all(round(y[l]) == 1 for l in a.lines))
    return y[a.line] if a.kind != TRANSFER else None


class TimStage(Stage):
    name = TAG

    def __init__(self, inst: PtnInstance, ean: EventActivityNetwork):
        self.inst = inst
        self.ean = ean
        self.m = big_m(inst, ean)
        self.m_d = max((a.upper for a in ean.timed()), default=0) + self.m

    def _active(self, y) -> set[int]:
        if not is_fixed(y):
            return set(self.ean.activities)
        return {a.id for a in self.ean.timed() if activation(y, a) == 1}

    def declare(self, model: MilpModel, upstream: list) -> dict:
        y = upstream[0]
        T = self.inst.period
        active = self._active(y)
        events = set()
        for a in self.ean.timed():
            if a.id in active:
                events.update((a.tail, a.head))
        pi = {}
        for e in sorted(self.ean.events):
            if e in events:
                pi[e] = model.add_var(VarDef.integer(f"pi_{e}", 0, T - 1), tag=TAG)
            elif self.ean.events[e].line is not None:
                pi[e] = 0
        z, eta = {}, {}
        for a in self.ean.timed():
            if a.id not in active:
                z[a.id] = 0
                eta[a.id] = 0
                continue
            lo, hi = z_bounds(self.inst, a, self.m)
            z[a.id] = model.add_var(VarDef.integer(f"z_{a.id}", lo, hi), tag=TAG)
            act = activation(y, a)
            if act is None:
                act = model.add_var(VarDef.binary(f"eta_{a.id}"), tag=TAG)
            eta[a.id] = act
        return {"pi": pi, "z": z, "eta": eta}

    def dur(self, block, a) -> LinExpr:
        pi = block["pi"]
        return _lin(pi[a.head]) - _lin(pi[a.tail]) + self.inst.period * _lin(block["z"][a.id])

    def constrain(self, model: MilpModel, block: dict, upstream: list) -> None:
        y = upstream[0]
        p = upstream[1] if len(upstream) > 1 else {}
        y_fixed = is_fixed(y)
        for a in self.ean.timed():
            if isinstance(block["z"][a.id], int):
                continue  # line not operated
            d = self.dur(block, a)
            eta = block["eta"][a.id]
            model.add_constraint(d - a.lower * _lin(eta) >= 0, f"tim_lo_{a.id}", tag=TAG)
            model.add_constraint(d + self.m * _lin(eta) <= a.upper + self.m, f"tim_up_{a.id}", tag=TAG)
            if a.kind == TRANSFER and not y_fixed:
                l1, l2 = a.lines
                model.add_constraint(eta - y[l1] <= 0, f"tim_eta1_{a.id}", tag=TAG)
                model.add_constraint(eta - y[l2] <= 0, f"tim_eta2_{a.id}", tag=TAG)
                model.add_constraint(eta - y[l1] - y[l2] >= -1, f"tim_eta3_{a.id}", tag=TAG)
        if is_fixed(p) or y_fixed:
            return
        for (u, v), row in p.items():
            for aid, var in row.items():
                if self.ean.activities[aid].kind == TRANSFER:
                    model.add_constraint(var - block["eta"][aid] <= 0, f"tim_pass_{u}_{v}_{aid}", tag=TAG)

    def objective(self, model: MilpModel, block: dict, upstream: list) -> LinExpr:
        p = upstream[1]
        out = LinExpr()
        if is_fixed(p):
            for od, row in p.items():
                c = self.inst.od[od]
                for aid, val in row.items():
                    a = self.ean.activities[aid]
                    if val and a.kind not in AUX:
                        out._iadd(self.dur(block, a), c * val)
            return out
        for (u, v), row in p.items():
            c = self.inst.od[(u, v)]
            for aid, var in row.items():
                a = self.ean.activities[aid]
                if a.kind in AUX:
                    continue
                # d >= dur - M_d (1 - p), d >= 0
                d = model.add_var(VarDef.continuous(f"d_{u}_{v}_{aid}", 0, self.m_d), tag=TAG)
                model.add_constraint(
                    d - self.dur(block, a) - self.m_d * _lin(var) >= -self.m_d, f"tim_d_{u}_{v}_{aid}", tag=TAG
                )
                if a.lower:
                    # valid cut: a used activity is active, so it lasts at least L_a
                    model.add_constraint(d - a.lower * _lin(var) >= 0, f"tim_dl_{u}_{v}_{aid}", tag=TAG)
                out._iadd(d, c)
        return out

    def extract(self, sol, block) -> dict:
        def val(x):
            return int(round(sol.value(x))) if not isinstance(x, (int, float)) else int(x)

        return {k: {i: val(x) for i, x in block[k].items()} for k in ("pi", "z", "eta")}


def timetable_of(inst: PtnInstance, block: dict) -> Timetable:
    return Timetable(dict(block["pi"]), dict(block["z"]), dict(block["eta"]), inst.period)


def evaluate_f3(inst: PtnInstance, ean: EventActivityNetwork, routing: RoutingResult, tt: Timetable) -> float:
    """Passenger travel time of the given routes under the timetable."""
    total = 0.0
    for od, path in routing.paths.items():
        c = inst.od[od]
        for aid in path:
            a = ean.activities[aid]
            if a.kind in AUX:
                continue
            d = tt.dur(a)
            if not a.lower <= d <= a.upper:
                raise InfeasibleTimetable(f"activity {aid} lasts {d}, outside [{a.lower}, {a.upper}]")
            total += c * d
    return total


def line_duration(ean: EventActivityNetwork, tt: Timetable, line: int) -> int:
    return sum(tt.dur(a) for a in ean.line_activities(line))


def first_event(ean: EventActivityNetwork, inst: PtnInstance, line: int) -> int:
    """Arrival event at the first stop; trips start there so the first wait counts."""
    return ean.event_id(ARR, inst.line(line).first, line)


def pesp_bruteforce(
    inst: PtnInstance, ean: EventActivityNetwork, chosen, loads: dict[int, float], max_events: int = 7
) -> float | None:
    """Minimum weighted duration over all event times (None if infeasible).

    For fixed ``pi`` the best ``z`` gives ``dur_a = L_a + ((pi_j - pi_i - L_a) mod T)``.
    """
    chosen = set(chosen)
    acts = [a for a in ean.timed() if set(a.lines) <= chosen]
    events = sorted({e for a in acts for e in (a.tail, a.head)})
    if len(events) > max_events:
        raise ValueError(f"{len(events)} events exceed the enumeration limit")
    T = inst.period
    best = None
    for times in itertools.product(range(T), repeat=len(events)):
        pi = dict(zip(events, times))
        total = 0.0
        for a in acts:
            d = a.lower + (pi[a.head] - pi[a.tail] - a.lower) % T
            if d > a.upper:
                break
            total += loads.get(a.id, 0.0) * d
        else:
            if best is None or total < best:
                best = total
    return best
