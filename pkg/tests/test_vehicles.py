from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import instance, solve_stage
from seqplan.integrated import Network, run_approach
from seqplan.milp import MilpModel
from seqplan.ptn import Deadhead, make_random, make_small
from seqplan.timetable import Timetable, first_event
from seqplan.validate import check_schedule as report_schedule
from seqplan.vehicles import (
    InvalidSchedule,
    Trip,
    VehicleSchedule,
    check_schedule,
    evaluate_f4,
    rollout,
    schedule_of,
)


def chain_timetable(inst, ean, line, start, durations):
    """Event times along ``line`` from its first event, with the given activity durations."""
    acts = {a.tail: a for a in ean.line_activities(line)}
    T = inst.period
    e = first_event(ean, inst, line)
    pi, z, t = {e: start % T}, {}, start
    for d in durations:
        a = acts[e]
        t += d
        pi[a.head] = t % T
        z[a.id] = (pi[a.tail] + d - pi[a.head]) // T
        e = a.head
    return Timetable(pi, z, {a: 1 for a in z}, T)


def one_line(periods=(0, 1), **kw):
    return instance(2, [(1, 2)], [(1, 2)], {(1, 2): 1}, periods=periods, **kw)


def test_rollout_times():
    net = Network.of(one_line())
    tt = chain_timetable(net.inst, net.ean, 1, 3, [1, 5, 1])
    trips = rollout(net.inst, net.ean, {1}, tt)
    assert [(t.alpha, t.omega) for t in trips] == [(3, 10), (13, 20)]
    assert all(t.delta == 7 for t in trips)


def test_rollout_without_lines():
    net = Network.of(one_line())
    assert rollout(net.inst, net.ean, set(), Timetable({}, {}, {}, 10)) == []


def test_small_trip_count():
    rep = run_approach(make_small(periods=(0, 1)), "seq")
    assert len(rep.trips) == len(rep.plan.lines) * 2


def schedule_for(inst, durations=(1, 2, 1)):
    """Vehicle stage on a hand-built timetable of line 1; returns (network, trips, schedule, solution)."""
    net = Network.of(inst)
    tt = chain_timetable(net.inst, net.ean, 1, 0, durations)
    block, sol = solve_stage(net.stages, 3, [{1: 1}, {}, {"pi": tt.pi, "z": tt.z, "eta": tt.eta}])
    return net, rollout(net.inst, net.ean, {1}, tt), schedule_of(block), sol


def test_one_vehicle_serves_both_trips():
    net, trips, sched, sol = schedule_for(one_line())
    assert [(t.alpha, t.omega) for t in trips] == [(0, 4), (10, 14)]
    assert sched.vehicles == 1
    assert sched.chains() == [[(0, 1), (1, 1)]]
    assert evaluate_f4(net.inst, {1}, trips, sched).total == pytest.approx(sol.objective)


def test_long_turnaround_needs_second_vehicle():
    inst = replace(one_line(), deadhead={(1, 1): Deadhead(20, 0)})
    net, trips, sched, sol = schedule_for(inst)
    assert sched.vehicles == 2 and sched.links == ()


def test_links_vanish_for_closed_lines():
    inst = instance(3, [(1, 2), (2, 3)], [(1, 2), (2, 3)], {(1, 2): 1}, f_min=0)
    net = Network.of(inst)
    y = {1: 1, 2: 0}
    tt = chain_timetable(net.inst, net.ean, 1, 0, [1, 2, 1])
    veh = net.stages[3]
    m = MilpModel()
    block = veh.declare(m, [y, {}, {"pi": tt.pi, "z": tt.z, "eta": tt.eta}])
    assert all(2 not in (k1[1], k2[1]) for k1, k2 in block["x"])
    assert set(block["out"]) == {(0, 1)}


def test_f4_single_trip_formula():
    inst = one_line(periods=(0,), gamma=(1.0, 2.0, 3.0, 4.0, 5.0), depot_stop=1)
    net = Network.of(inst)
    trip = Trip(0, 1, 0, 6, 6)
    sched = VehicleSchedule((), ((0, 1),), ((0, 1),))
    back = net.inst.deadhead[(1, "depot")]
    out = net.inst.deadhead[("depot", 1)]
    line = net.inst.line(1)
    expected = 6 + 2 * line.length + 3 * (out.time + back.time) + 4 * (out.distance + back.distance) + 5
    assert evaluate_f4(net.inst, {1}, [trip], sched).total == pytest.approx(expected)


def test_f4_of_empty_schedule():
    net = Network.of(one_line())
    assert evaluate_f4(net.inst, set(), [], VehicleSchedule((), (), ())).total == 0


def test_invalid_schedules_rejected():
    net = Network.of(one_line())
    trips = [Trip(0, 1, 0, 6, 6), Trip(1, 1, 10, 16, 6)]
    with pytest.raises(InvalidSchedule):
        check_schedule(net.inst, trips, VehicleSchedule((), ((0, 1),), ((0, 1),)))
    tight = [Trip(0, 1, 0, 9, 9), Trip(1, 1, 10, 19, 9)]
    with pytest.raises(InvalidSchedule):
        check_schedule(net.inst, tight, VehicleSchedule((((0, 1), (1, 1)),), ((0, 1),), ((1, 1),)))


def test_small_evaluation_matches_solver():
    rep = run_approach(make_small(), "seq")
    assert rep.f4 == pytest.approx(rep.solves[-1].objective)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_random_schedules_are_valid_chains(seed):
    net = Network.of(make_random(seed))
    rep = run_approach(net, "seq")
    assert report_schedule(net.inst, rep.plan, rep.trips, rep.schedule) == []
    served = [k for ch in rep.schedule.chains() for k in ch]
    assert sorted(served) == sorted(t.key for t in rep.trips)
    assert rep.f4 == pytest.approx(rep.solves[-1].objective)


def test_schedule_files(tmp_path):
    net, trips, sched, _ = schedule_for(one_line())
    path = sched.write(tmp_path / "schedule.csv", evaluate_f4(net.inst, {1}, trips, sched))
    assert path.read_text() == "vehicle_id;trip_sequence\n1;0:1,1:1\n"
    assert (tmp_path / "schedule_costs.json").exists()
