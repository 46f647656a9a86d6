"""Trip roll-out and vehicle scheduling.

Each operated line runs once per planning period ``t``: the trip starts at
``alpha = t*T + pi_first`` and ends at ``omega = alpha + delta_l`` with
``delta_l`` the summed duration of the line's drive and wait activities.
Vehicles leave the depot, serve a chain of trips and return. A link
``(t1, l1) -> (t2, l2)`` needs ``alpha_2 - omega_1 >= L_{l1,l2}``.

Costs, each weighted by its gamma: line durations, line lengths, idle and
depot times, deadhead distances, vehicles.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from seqplan.ean import EventActivityNetwork
from seqplan.framework import Stage
from seqplan.milp import LinExpr, MilpModel, VarDef, quicksum
from seqplan.ptn import PtnInstance, derive_turnarounds
from seqplan.routing import is_fixed
from seqplan.timetable import Timetable, big_m, first_event, line_duration

TAG = "veh"
DEPOT = "depot"


class InvalidSchedule(Exception):
    pass


@dataclass(frozen=True, order=True)
class Trip:
    period: int
    line: int
    alpha: int
    omega: int
    delta: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.period, self.line)


@dataclass(frozen=True)
class CostBreakdown:
    trip_time: float
    trip_distance: float
    empty_time: float
    empty_distance: float
    vehicles: float

    @property
    def total(self) -> float:
        return self.trip_time + self.trip_distance + self.empty_time + self.empty_distance + self.vehicles

    def to_dict(self) -> dict:
        return {**asdict(self), "total": self.total}


@dataclass(frozen=True)
class VehicleSchedule:
    links: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    pull_out: tuple[tuple[int, int], ...]
    pull_in: tuple[tuple[int, int], ...]

    @property
    def vehicles(self) -> int:
        return len(self.pull_out)

    def chains(self) -> list[list[tuple[int, int]]]:
        """Depot-to-depot trip sequences, one per vehicle."""
        nxt = dict(self.links)
        out = []
        for start in sorted(self.pull_out):
            chain = [start]
            seen = {start}
            while chain[-1] in nxt:
                chain.append(nxt[chain[-1]])
                if chain[-1] in seen:
                    raise InvalidSchedule("vehicle links contain a cycle")
                seen.add(chain[-1])
            out.append(chain)
        return out

    def write(self, path, costs: CostBreakdown | None = None) -> Path:
        rows = ["vehicle_id;trip_sequence"]
        for i, ch in enumerate(self.chains(), start=1):
            rows.append(f"{i};{','.join(f'{t}:{l}' for t, l in ch)}")
        p = Path(path)
        p.write_text("\n".join(rows) + "\n")
        if costs is not None:
            p.with_name(p.stem + "_costs.json").write_text(json.dumps(costs.to_dict(), sort_keys=True) + "\n")
        return p


def rollout(inst: PtnInstance, ean: EventActivityNetwork, chosen, tt: Timetable) -> list[Trip]:
    trips = []
    T = inst.period
    for t in sorted(inst.params.periods):
        for l in sorted(chosen):
            delta = line_duration(ean, tt, l)
            alpha = t * T + tt.pi[first_event(ean, inst, l)]
            trips.append(Trip(t, l, alpha, alpha + delta, delta))
    return trips


def _lin(x) -> LinExpr:
    return LinExpr.of(x)


def _num(x) -> bool:
    return isinstance(x, (int, float))


class VehStage(Stage):
    name = TAG

    def __init__(self, inst: PtnInstance, ean: EventActivityNetwork):
        self.inst = derive_turnarounds(inst)
        self.ean = ean
        self.m_tim = big_m(inst, ean)

    # ---- times as numbers (fixed timetable) or expressions (joint timetable)

    def _lines(self, y) -> list[int]:
        if is_fixed(y):
            return [l.id for l in self.inst.pool if round(y[l.id]) == 1]
        return [l.id for l in self.inst.pool]

    def _times(self, tt: dict, lines):
        T = self.inst.period
        delta, alpha, omega = {}, {}, {}
        for l in lines:
            d = LinExpr()
            for a in self.ean.line_activities(l):
                d = d + _lin(tt["pi"][a.head]) - _lin(tt["pi"][a.tail]) + T * _lin(tt["z"][a.id])
            delta[l] = d.constant if not d.terms else d
            first = tt["pi"][first_event(self.ean, self.inst, l)]
            for t in self.inst.params.periods:
                alpha[(t, l)] = t * T + first if _num(first) else t * T + _lin(first)
                omega[(t, l)] = alpha[(t, l)] + delta[l]
        return delta, alpha, omega

    def delta_bound(self, l: int, y_fixed: bool) -> float:
        extra = 0 if y_fixed else self.m_tim
        return sum(a.upper + extra for a in self.ean.line_activities(l))

    def big_m_prime(self, y_fixed: bool) -> float:
        if self.inst.params.big_m_prime is not None:
            return self.inst.params.big_m_prime
        T = self.inst.period
        return (max(self.inst.params.periods) + 1) * T + max(
            (self.delta_bound(l.id, y_fixed) for l in self.inst.pool), default=0
        )

    def _dh(self, a, b) -> tuple[float, float]:
        d = self.inst.deadhead[(a, b)]
        return d.time, d.distance

    # ---- stage interface

    def declare(self, model: MilpModel, upstream: list) -> dict:
        y, tt = upstream[0], upstream[2]
        lines = self._lines(y)
        trips = [(t, l) for t in sorted(self.inst.params.periods) for l in lines]
        fixed_times = is_fixed(tt)
        _, alpha, omega = self._times(tt, lines) if fixed_times else ({}, {}, {})
        x = {}
        for k1 in trips:
            for k2 in trips:
                if k1 == k2 or k2[0] < k1[0]:
                    continue
                if fixed_times and alpha[k2] - omega[k1] < self._dh(k1[1], k2[1])[0]:
                    continue
                x[(k1, k2)] = model.add_var(VarDef.binary(f"x_{k1[0]}_{k1[1]}_{k2[0]}_{k2[1]}"), tag=TAG)
        out = {k: model.add_var(VarDef.binary(f"xo_{k[0]}_{k[1]}"), tag=TAG) for k in trips}
        inn = {k: model.add_var(VarDef.binary(f"xi_{k[0]}_{k[1]}"), tag=TAG) for k in trips}
        return {"x": x, "out": out, "in": inn}

    def constrain(self, model: MilpModel, block: dict, upstream: list) -> None:
        y, tt = upstream[0], upstream[2]
        y_fixed = is_fixed(y)
        x, out, inn = block["x"], block["out"], block["in"]
        preds: dict = {k: [] for k in out}
        succs: dict = {k: [] for k in out}
        for (k1, k2), var in x.items():
            succs[k1].append(var)
            preds[k2].append(var)
        for k in out:
            t, l = k
            tag = f"{t}_{l}"
            model.add_constraint(quicksum(preds[k]) + out[k] - _lin(y[l]) == 0, f"veh_in_{tag}", tag=TAG)
            model.add_constraint(quicksum(succs[k]) + inn[k] - _lin(y[l]) == 0, f"veh_out_{tag}", tag=TAG)
        if not y_fixed:
            for (k1, k2), var in x.items():
                lab = f"{k1[0]}_{k1[1]}_{k2[0]}_{k2[1]}"
                model.add_constraint(var - y[k1[1]] <= 0, f"veh_sup_out_{lab}", tag=TAG)
                model.add_constraint(var - y[k2[1]] <= 0, f"veh_sup_in_{lab}", tag=TAG)
            for k in out:
                model.add_constraint(out[k] - y[k[1]] <= 0, f"veh_sup_po_{k[0]}_{k[1]}", tag=TAG)
                model.add_constraint(inn[k] - y[k[1]] <= 0, f"veh_sup_pi_{k[0]}_{k[1]}", tag=TAG)
        if is_fixed(tt):
            return  # incompatible pairs were never created
        _, alpha, omega = self._times(tt, sorted({k[1] for k in out}))
        mp = self.big_m_prime(y_fixed)
        for (k1, k2), var in x.items():
            lo = self._dh(k1[1], k2[1])[0]
            lab = f"{k1[0]}_{k1[1]}_{k2[0]}_{k2[1]}"
            # alpha_2 - omega_1 >= L x - M'(1 - x)
            model.add_constraint(
                _lin(alpha[k2]) - _lin(omega[k1]) - (lo + mp) * _lin(var) >= -mp, f"veh_turn_{lab}", tag=TAG
            )

    def objective(self, model: MilpModel, block: dict, upstream: list) -> LinExpr:
        y, tt = upstream[0], upstream[2]
        g1, g2, g3, g4, g5 = self.inst.params.gamma
        x, out, inn = block["x"], block["out"], block["in"]
        lines = sorted({k[1] for k in out}) if out else self._lines(y)
        delta, alpha, omega = self._times(tt, lines)
        y_fixed = is_fixed(y)
        obj = LinExpr()
        for l in lines:
            line = self.inst.line(l)
            obj._iadd(_lin(y[l]), g2 * line.length)
            if not g1:
                continue
            if _num(y[l]):
                obj._iadd(_lin(delta[l]), g1 * y[l])
                continue
            if _num(delta[l]):
                obj._iadd(y[l], g1 * delta[l])
                continue
            mb = self.delta_bound(l, y_fixed)
            u = model.add_var(VarDef.continuous(f"u_{l}", 0, mb), tag=TAG)
            model.add_constraint(u - delta[l] - mb * _lin(y[l]) >= -mb, f"veh_yd_{l}", tag=TAG)
            low = sum(a.lower for a in self.ean.line_activities(l))
            model.add_constraint(u - low * _lin(y[l]) >= 0, f"veh_ydl_{l}", tag=TAG)
            obj._iadd(u, g1)
        mp = self.big_m_prime(y_fixed)
        for (k1, k2), var in x.items():
            t_dh, d_dh = self._dh(k1[1], k2[1])
            obj._iadd(_lin(var), g4 * d_dh)
            if not g3:
                continue
            gap = _lin(alpha[k2]) - _lin(omega[k1])
            if _num(var):
                obj._iadd(gap, g3 * var)
                continue
            if not gap.terms:
                obj._iadd(var, g3 * gap.constant)
                continue
            lab = f"{k1[0]}_{k1[1]}_{k2[0]}_{k2[1]}"
            g = model.add_var(VarDef.continuous(f"g_{lab}", 0, mp), tag=TAG)
            model.add_constraint(g - gap - mp * _lin(var) >= -mp, f"veh_gap_{lab}", tag=TAG)
            model.add_constraint(g - t_dh * _lin(var) >= 0, f"veh_gapl_{lab}", tag=TAG)
            obj._iadd(g, g3)
        for k in out:
            t_o, d_o = self._dh(DEPOT, k[1])
            t_i, d_i = self._dh(k[1], DEPOT)
            obj._iadd(_lin(out[k]), g3 * t_o + g4 * d_o + g5)
            obj._iadd(_lin(inn[k]), g3 * t_i + g4 * d_i)
        return obj

    def extract(self, sol, block) -> dict:
        return {k: {i: int(round(sol[v])) for i, v in block[k].items()} for k in ("x", "out", "in")}


def schedule_of(block: dict) -> VehicleSchedule:
    links = tuple(sorted(k for k, v in block["x"].items() if v))
    return VehicleSchedule(
        links,
        tuple(sorted(k for k, v in block["out"].items() if v)),
        tuple(sorted(k for k, v in block["in"].items() if v)),
    )


def check_schedule(inst: PtnInstance, trips: list[Trip], sched: VehicleSchedule) -> None:
    """Raise :class:`InvalidSchedule` unless every trip has one predecessor and one successor
    and every link leaves enough turnaround time."""
    inst = derive_turnarounds(inst)
    by_key = {tr.key: tr for tr in trips}
    pred = {k: 0 for k in by_key}
    succ = {k: 0 for k in by_key}
    for k1, k2 in sched.links:
        if k1 not in by_key or k2 not in by_key:
            raise InvalidSchedule(f"link {k1}->{k2} uses a trip that is not operated")
        succ[k1] += 1
        pred[k2] += 1
        need = inst.deadhead[(k1[1], k2[1])].time
        if by_key[k2].alpha - by_key[k1].omega < need:
            raise InvalidSchedule(f"link {k1}->{k2} leaves less than {need} minutes")
    for k in sched.pull_out:
        if k not in by_key:
            raise InvalidSchedule(f"pull-out to unknown trip {k}")
        pred[k] += 1
    for k in sched.pull_in:
        if k not in by_key:
            raise InvalidSchedule(f"pull-in from unknown trip {k}")
        succ[k] += 1
    for k in by_key:
        if pred[k] != 1 or succ[k] != 1:
            raise InvalidSchedule(f"trip {k} has {pred[k]} predecessors and {succ[k]} successors")


def evaluate_f4(inst: PtnInstance, chosen, trips: list[Trip], sched: VehicleSchedule) -> CostBreakdown:
    inst = derive_turnarounds(inst)
    check_schedule(inst, trips, sched)
    g1, g2, g3, g4, g5 = inst.params.gamma
    by_key = {tr.key: tr for tr in trips}
    delta = {tr.line: tr.delta for tr in trips}
    trip_time = g1 * sum(delta.get(l, 0) for l in sorted(chosen))
    trip_dist = g2 * sum(inst.line(l).length for l in sorted(chosen))
    empty_time = 0.0
    empty_dist = 0.0
    for k1, k2 in sched.links:
        empty_time += by_key[k2].alpha - by_key[k1].omega
        empty_dist += inst.deadhead[(k1[1], k2[1])].distance
    for k in sched.pull_out:
        dh = inst.deadhead[(DEPOT, k[1])]
        empty_time += dh.time
        empty_dist += dh.distance
    for k in sched.pull_in:
        dh = inst.deadhead[(k[1], DEPOT)]
        empty_time += dh.time
        empty_dist += dh.distance
    return CostBreakdown(trip_time, trip_dist, g3 * empty_time, g4 * empty_dist, g5 * len(sched.pull_out))
