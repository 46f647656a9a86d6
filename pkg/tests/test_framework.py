import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqplan.fixtures import interior_trap, unbounded_pos
from seqplan.framework import (
    HEURISTIC,
    EmptyIndexSet,
    IntegrationInfeasible,
    LinearStage,
    NonpositiveOptimal,
    StageInfeasible,
    Weights,
    pos,
    pos_bound_weighted,
    run_integrated,
    run_msp,
    run_sequential,
    suffix_chain,
)
from seqplan.milp import CONTINUOUS, INTEGER, MilpModel, SolveOptions


def xs(res):
    return [v["x"] for v in res.values]


@pytest.mark.parametrize("N", [2, 10, 100])
def test_two_stage_fixture(N):
    seq = run_sequential(unbounded_pos(N), (1, 1))
    msp = run_msp(unbounded_pos(N), (1, 1))
    assert xs(seq) == [0.0, 1.0]
    assert seq.total == pytest.approx(1)
    assert msp.total == pytest.approx(1 / N)
    assert pos(seq.total, msp.total) == pytest.approx(N - 1)


def test_three_stage_sequential():
    res = run_sequential(interior_trap(10), (1, 1, 1))
    assert xs(res) == pytest.approx([0, 1, 0])
    assert res.total == pytest.approx(1)


def test_three_stage_partial_and_full():
    part = run_integrated(interior_trap(10), (1, 1, 1), 1, 2)
    assert xs(part) == pytest.approx([0.1, 0, 10])
    assert part.total == pytest.approx(10.1)
    full = run_integrated(interior_trap(10), (1, 1, 1), 1, 3)
    assert xs(full) == pytest.approx([0, 1, 0])
    assert full.total == pytest.approx(1)


@pytest.mark.parametrize("N", [2, 3, 10])
def test_interior_integration_can_be_worse(N):
    seq = run_sequential(interior_trap(N), (1, 1, 1))
    part = run_integrated(interior_trap(N), (1, 1, 1), 1, 2)
    assert part.total > seq.total


def test_single_stage():
    st1 = LinearStage("s", {"x": (0.0, 1.0, CONTINUOUS)}, lambda b, up: [], lambda b, up: b["x"])
    res = run_sequential([st1], (1,))
    assert xs(res) == [0.0] and res.total == 0


@pytest.mark.parametrize("i", [1, 2, 3])
def test_diagonal_integration_is_sequential(i):
    a = run_integrated(interior_trap(10), (1, 1, 1), i, i)
    b = run_sequential(interior_trap(10), (1, 1, 1))
    assert xs(a) == pytest.approx(xs(b))


def test_pos_examples():
    assert pos(1, 0.1) == pytest.approx(9)
    assert pos(5, 5) == 0
    assert pos(10.1, 1) == pytest.approx(9.1)
    with pytest.raises(NonpositiveOptimal):
        pos(1, 0)


def test_weighted_bound():
    assert pos_bound_weighted((3, 7), (1, 1)) == 7
    assert pos_bound_weighted((3, 7), (1, 0)) == 3
    with pytest.raises(EmptyIndexSet):
        pos_bound_weighted((3, 7), (0, 0))


def test_weights_validation():
    with pytest.raises(ValueError):
        Weights((0.0, 0.0))
    with pytest.raises(ValueError):
        Weights((1.0, -1.0))
    with pytest.raises(ValueError):
        run_sequential(unbounded_pos(2), (1, 1, 1))
    with pytest.raises(ValueError):
        run_integrated(unbounded_pos(2), (1, 1), 2, 1)


def test_infeasible_stage_and_block():
    bad = LinearStage("bad", {"x": (0.0, 1.0, CONTINUOUS)}, lambda b, up: [b["x"] >= 2], lambda b, up: b["x"])
    with pytest.raises(StageInfeasible):
        run_sequential([bad], (1,))
    with pytest.raises(IntegrationInfeasible):
        run_integrated([unbounded_pos(2)[0], bad], (1, 1), 1, 2)


def test_suffix_chain_on_trap():
    chain = suffix_chain(interior_trap(10), (1, 1, 1))
    totals = [r.total for r in chain]
    assert totals[0] <= totals[1] + 1e-9 <= totals[2] + 2e-9


def test_heuristic_prefix_is_shared():
    calls = []

    def greedy(up):
        calls.append(1)
        return {"x": 0.5}

    s1 = LinearStage("s1", {"x": (0.0, 1.0, CONTINUOUS)}, lambda b, up: [], lambda b, up: b["x"], heuristic=greedy)
    rest = unbounded_pos(4)[1:]
    third = LinearStage("s3", {"x": (0.0, 9.0, CONTINUOUS)}, lambda b, up: [b["x"] - up[1]["x"] >= 0], lambda b, up: b["x"])
    stages = [s1, *rest, third]
    chain = suffix_chain(stages, (1, 1, 1), heuristic_prefix=True)
    assert len(calls) == 1
    assert all(r.values[0] == {"x": 0.5} for r in chain[1:])
    assert chain[2].tags[0] == HEURISTIC
    totals = [r.total for r in chain]
    assert totals[1] <= totals[2] + 1e-9


def _random_stages(rng: random.Random):
    """Three stages over small integers coupled by random linear rows."""
    n = 3
    coupling = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
    rhs = [rng.randint(-2, 2) for _ in range(n)]
    cost = [rng.randint(-3, 3) for _ in range(n)]
    stages = []
    for i in range(n):
        def cons(b, up, i=i):
            expr = b["x"] * 1
            for j, u in enumerate(up):
                expr = expr + coupling[i][j] * u["x"]
            return [expr >= rhs[i]]

        def obj(b, up, i=i):
            return cost[i] * b["x"] + 4

        stages.append(LinearStage(f"r{i}", {"x": (0.0, 3.0, INTEGER)}, cons, obj))
    return stages


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(1, 3), min_size=3, max_size=3))
def test_integration_never_hurts_and_suffix_chain(seed, lam):
    stages = _random_stages(random.Random(seed))
    try:
        chain = suffix_chain(stages, lam)
    except (StageInfeasible, IntegrationInfeasible):
        return
    totals = [r.total for r in chain]
    for a, b in zip(totals, totals[1:]):
        assert a <= b + 1e-6
    assert run_msp(stages, lam).total <= run_sequential(stages, lam).total + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_integrated_block_not_worse_than_sequential_stages(seed):
    stages = _random_stages(random.Random(seed))
    lam = (1, 1, 1)
    try:
        seq = run_sequential(stages, lam)
        part = run_integrated(stages, lam, 2, 3)
    except (StageInfeasible, IntegrationInfeasible):
        return
    joint = part.integrated_objective
    assert joint <= seq.f[1] + seq.f[2] + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_measured_pos_respects_weighted_bound(seed):
    """Two-stage LPs: the combined price never exceeds the largest single-objective price."""
    rng = random.Random(seed)
    a, b, c = rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 5)
    s1 = LinearStage("s1", {"x": (0.0, 4.0, CONTINUOUS)}, lambda bl, up: [], lambda bl, up: bl["x"] + 1)
    s2 = LinearStage(
        "s2", {"x": (0.0, 20.0, CONTINUOUS)}, lambda bl, up: [bl["x"] + a * up[0]["x"] >= c], lambda bl, up: b * bl["x"] + 1
    )
    stages = [s1, s2]
    lam = (rng.randint(0, 3), rng.randint(1, 3))
    seq = run_sequential(stages, lam)
    opt = run_msp(stages, lam)
    per = []
    for i, w in enumerate(((1, 0), (0, 1))):
        best = run_msp(stages, w) if w[0] == 0 else run_sequential(stages, w)
        per.append(pos(seq.f[i], best.f[i]))
    assert pos(seq.total, opt.total) <= pos_bound_weighted(per, lam) + 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_coupled_objective_matches_fixed_evaluation(seed):
    rng = random.Random(seed)
    stages = _random_stages(rng)
    for i, s in enumerate(stages):
        model = MilpModel()
        up_vars = [{"x": model.integer(f"u{j}", 0, 3)} for j in range(i)]
        block = s.declare(model, up_vars)
        coupled = s.objective(model, block, up_vars)
        for _ in range(100):
            values = [{"x": float(rng.randint(0, 3))} for _ in range(i + 1)]
            point = {block["x"]: values[i]["x"], **{u["x"]: v["x"] for u, v in zip(up_vars, values)}}
            assert coupled.value(point) == pytest.approx(s.evaluate(values[i], values[:i]), abs=1e-9)


def test_backends_agree_on_fixture():
    a = run_msp(interior_trap(7), (1, 1, 1), SolveOptions(backend="highs"))
    b = run_msp(interior_trap(7), (1, 1, 1))
    assert a.total == pytest.approx(b.total)
