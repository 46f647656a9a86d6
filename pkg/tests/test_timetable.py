import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import instance, solve_stage
from seqplan.ean import DRIVE, TRANSFER
from seqplan.integrated import Network
from seqplan.lin import build_lin, plan_of
from seqplan.milp import OPTIMAL, MilpModel, SolveOptions, solve
from seqplan.ptn import make_small
from seqplan.routing import RoutingResult, route_oracle
from seqplan.timetable import Timetable, TimStage, evaluate_f3, pesp_bruteforce, timetable_of
from seqplan.validate import check_timetable
from seqplan.framework import run_sequential


def timetable_for(inst, chosen, backend="highs"):
    """Route on the chosen lines, then timetable; returns (net, routing, timetable, solution)."""
    net = Network.of(inst)
    y = {l.id: int(l.id in chosen) for l in inst.pool}
    routing = route_oracle(net.inst, net.ean, chosen)
    p = {od: {a: 1 for a in path} for od, path in routing.paths.items()}
    block, sol = solve_stage(net.stages, 2, [y, p], backend)
    return net, routing, (None if block is None else timetable_of(net.inst, block)), sol


def test_single_drive_takes_its_lower_bound():
    inst = instance(2, [(1, 2)], [(1, 2)], {(1, 2): 1})
    net, routing, tt, sol = timetable_for(inst, {1})
    drive = net.ean.of_kind(DRIVE)[0]
    assert tt.dur(drive) == 2
    assert sol.objective == evaluate_f3(net.inst, net.ean, routing, tt) == 2


def test_deactivated_activity_accepts_any_duration():
    inst = instance(2, [(1, 2)], [(1, 2)], {})
    net = Network.of(inst)
    tim = TimStage(net.inst, net.ean)
    drive = net.ean.of_kind(DRIVE)[0]
    for k in range(inst.period):
        m = MilpModel()
        y = build_lin(net.inst, m)
        block = tim.declare(m, [y, {}])
        tim.constrain(m, block, [y, {}])
        m.add_constraint(y[1] + 0 == 0, "off")
        m.add_constraint(tim.dur(block, drive) == k, "dur")
        # the lower frequency bound would force the line on
        m.constraints = [c for c in m.constraints if not c.label.startswith("lin_fmin")]
        assert solve(m.freeze(), SolveOptions(backend="highs")).status == OPTIMAL


def test_transfer_instance_matches_enumeration():
    inst = instance(
        3, [(1, 2), (2, 3)], [(1, 2), (2, 3)], {(1, 3): 2, (1, 2): 1},
        T=4, l_drive=1, u_drive=3, l_wait=1, u_wait=2, l_trans=1,
    )
    net, routing, tt, sol = timetable_for(inst, {1, 2})
    loads = {a: w for a, w in routing.loads.items()}
    best = pesp_bruteforce(net.inst, net.ean, {1, 2}, loads, max_events=8)
    assert sol.objective == pytest.approx(best)
    assert evaluate_f3(net.inst, net.ean, routing, tt) == pytest.approx(best)


@settings(max_examples=15, deadline=None)
@given(
    st.integers(3, 5),
    st.lists(st.tuples(st.integers(1, 3), st.integers(0, 2)), min_size=2, max_size=2),
    st.integers(0, 2),
    st.integers(1, 3),
)
def test_single_line_matches_enumeration(T, drives, wait_slack, demand):
    drive = {i: (lo, lo + min(sl, T - 1)) for i, (lo, sl) in enumerate(drives)}
    inst = instance(
        3, [(1, 2), (2, 3)], [(1, 2, 3)], {(1, 3): demand, (2, 3): 1},
        T=T, drive=drive, l_wait=1, u_wait=1 + min(wait_slack, T - 1),
    )
    net, routing, tt, sol = timetable_for(inst, {1})
    best = pesp_bruteforce(net.inst, net.ean, {1}, routing.loads, max_events=6)
    assert sol.objective == pytest.approx(best)


def test_evaluate_examples():
    inst = instance(2, [(1, 2)], [(1, 2)], {(1, 2): 10}, drive={0: (2, 5)})
    net = Network.of(inst)
    drive = net.ean.of_kind(DRIVE)[0]
    routing = route_oracle(net.inst, net.ean, {1})
    tt = Timetable({drive.tail: 1, drive.head: 4}, {drive.id: 0}, {}, inst.period)
    assert evaluate_f3(net.inst, net.ean, routing, tt) == 30
    empty = RoutingResult({}, {}, 0.0, {})
    assert evaluate_f3(net.inst, net.ean, empty, tt) == 0


def test_small_sequential_evaluation_matches_solver():
    net = Network.of(make_small())
    res = run_sequential(net.stages, (0, 0, 1, 1), SolveOptions(backend="highs"))
    tim_solve = res.solves[2]
    assert tim_solve.stages == (3,)
    assert res.f[2] == pytest.approx(tim_solve.objective)
    plan = plan_of(net.inst, res.values[0])
    assert check_timetable(net.inst, net.ean, plan, timetable_of(net.inst, res.values[2])) == []


def test_shifted_timetable_keeps_objective():
    inst = make_small(od={(1, 4): 5.0, (4, 2): 3.0})
    net, routing, tt, sol = timetable_for(inst, {1, 2, 3, 4})
    T = inst.period
    y = {l.id: 1 if l.id <= 4 else 0 for l in net.inst.pool}
    p = {od: {a: 1 for a in path} for od, path in routing.paths.items()}
    for shift in (1, 3, 7):
        tim = net.stages[2]
        model = MilpModel()
        block = tim.declare(model, [y, p])
        tim.constrain(model, block, [y, p])
        model.set_objective(tim.objective(model, block, [y, p]))
        for e, var in block["pi"].items():
            if not isinstance(var, int):
                model.add_constraint(var + 0 == (tt.pi[e] + shift) % T, f"fix_{e}")
        shifted = solve(model.freeze(), SolveOptions(backend="highs"))
        assert shifted.status == OPTIMAL
        assert shifted.objective == pytest.approx(sol.objective)


def test_eta_is_product_of_line_choices():
    net = Network.of(make_small())
    res = run_sequential(net.stages, (0, 0, 1, 1), SolveOptions(backend="highs"))
    on = {l for l, v in res.values[0].items() if v}
    for a in net.ean.of_kind(TRANSFER):
        assert res.values[2]["eta"][a.id] == int(set(a.lines) <= on)


def test_timetable_files(tmp_path):
    inst = instance(2, [(1, 2)], [(1, 2)], {(1, 2): 1})
    net, routing, tt, sol = timetable_for(inst, {1})
    path = tt.write(tmp_path / "timetable.csv", net.ean)
    assert path.read_text().splitlines()[0] == "event_id;pi"
    acts = (tmp_path / "timetable_activities.csv").read_text().splitlines()
    assert acts[0] == "activity_id;z;eta;duration" and len(acts) == 4
