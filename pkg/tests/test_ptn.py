from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqplan.ptn import (
    Deadhead,
    ParseError,
    ValidationError,
    derive_turnarounds,
    load_instance,
    make_random,
    make_small,
    make_toy,
    save_instance,
    validate,
)

TWO_STOPS = {
    "stops.csv": "# two stops\nid;name;L_wait;U_wait;L_trans;U_trans\n1;a;1;3;2;11\n2;b;1;3;2;11\n",
    "edges.csv": "id;u;v;length;L_drive;U_drive;f_min;f_max\n1;1;2;1.5;2;4;1;1\n",
    "od.csv": "u;v;demand\n1;2;5\n",
    "pool.csv": "line_id;edge_ids;cost;twin\n1;1;3\n",
    "config.csv": "key;value\nperiod_T;10\nperiods;0\n",
}


def write_dir(path, files):
    path.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (path / name).write_text(text)
    return path


def test_load_two_stop_directory(tmp_path):
    inst = load_instance(write_dir(tmp_path / "two", TWO_STOPS))
    assert len(inst.stops) == 2 and len(inst.edges) == 1
    assert inst.name == "two"
    assert inst.pool[0].stops == (1, 2) and inst.pool[0].cost == 3
    assert inst.od == {(1, 2): 5.0}
    assert inst.params.periods == (0,)


def test_unknown_edge_in_pool(tmp_path):
    files = dict(TWO_STOPS, **{"pool.csv": "line_id;edge_ids;cost\n1;7;3\n"})
    with pytest.raises(ValidationError):
        load_instance(write_dir(tmp_path / "bad", files))


def test_parse_errors_carry_location(tmp_path):
    files = dict(TWO_STOPS, **{"od.csv": "u;v;demand\n1;2;lots\n"})
    with pytest.raises(ParseError) as err:
        load_instance(write_dir(tmp_path / "bad", files))
    assert "od.csv" in str(err.value) and "2" in str(err.value)


def test_missing_file(tmp_path):
    files = dict(TWO_STOPS)
    del files["config.csv"]
    with pytest.raises(ParseError):
        load_instance(write_dir(tmp_path / "bad", files))


def test_unknown_config_key(tmp_path):
    files = dict(TWO_STOPS, **{"config.csv": "key;value\ncolour;blue\n"})
    with pytest.raises(ParseError):
        load_instance(write_dir(tmp_path / "bad", files))


def test_small_sizes():
    inst = make_small()
    assert (len(inst.stops), len(inst.edges), len(inst.pool)) == (4, 3, 6)


def test_toy_sizes():
    inst = make_toy()
    assert (len(inst.stops), len(inst.edges), len(inst.pool)) == (8, 8, 16)


def test_overrides():
    assert make_small(T=10).params.period == 10
    assert make_small(T=7).stops[0].u_trans == 2 + 7 - 1
    assert len(make_toy(periods=(0, 1)).params.periods) == 2
    assert make_small(od={(1, 4): 3.0}).od == {(1, 4): 3.0}


def test_twins_are_reverses():
    inst = make_toy()
    for l in inst.pool:
        assert inst.line(l.twin).stops == tuple(reversed(l.stops))
    assert len(inst.frequency_lines()) == 8


@pytest.mark.parametrize("make", [make_small, make_toy])
def test_save_load_round_trip(tmp_path, make):
    inst = make()
    files = save_instance(inst, tmp_path / inst.name)
    assert len(files) == 5
    assert load_instance(tmp_path / inst.name) == inst


def test_round_trip_with_deadheads(tmp_path):
    inst = derive_turnarounds(make_small(depot_stop=3, transfer_penalty=1.5))
    save_instance(inst, tmp_path / "small")
    assert load_instance(tmp_path / "small") == inst


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_round_trip(tmp_path_factory, seed):
    inst = make_random(seed)
    d = tmp_path_factory.mktemp("rnd")
    save_instance(inst, d)
    assert load_instance(d, inst.name) == inst


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_random_family_shape(seed):
    inst = validate(make_random(seed))
    T = inst.period
    assert 4 <= len(inst.stops) <= 6
    assert len(inst.pool) <= 6
    assert len(inst.params.periods) <= 2
    assert 1 <= len(inst.demand_pairs()) <= 6
    covered = {e for l in inst.pool for e in l.edges}
    assert covered == {e.id for e in inst.edges}
    for e in inst.edges:
        assert e.l_drive >= 1 and e.u_drive - e.l_drive <= T - 1 and e.f_min >= 1
    for s in inst.stops:
        assert s.l_wait >= 1 and s.u_wait - s.l_wait <= T - 1
        assert s.l_trans >= 1 and s.u_trans - s.l_trans <= T - 1


def test_random_is_reproducible():
    assert make_random(11) == make_random(11)


def test_turnaround_same_stop():
    inst = derive_turnarounds(make_small())
    # line 3 runs 1-2-3 and its twin 4 runs back 3-2-1
    assert inst.line(3).last == inst.line(4).first
    assert inst.deadhead[(3, 4)] == Deadhead(1, 0)


def test_turnaround_by_shortest_path():
    inst = derive_turnarounds(make_small())
    l1 = next(l for l in inst.pool if l.last == 1)
    l2 = next(l for l in inst.pool if l.first == 3)
    edges = {e.id: e for e in inst.edges}
    assert inst.deadhead[(l1.id, l2.id)].time == edges[1].l_drive + edges[2].l_drive + 1
    assert inst.deadhead[(l1.id, l2.id)].distance == edges[1].length + edges[2].length


def test_depot_pull_out_without_turnaround():
    inst = derive_turnarounds(make_small(depot_stop=1))
    assert inst.deadhead[("depot", 1)] == Deadhead(0, 0)


def test_turnarounds_idempotent_and_keep_explicit():
    base = make_small()
    fixed = derive_turnarounds(replace(base, deadhead={(1, 2): Deadhead(9, 9)}))
    assert fixed.deadhead[(1, 2)] == Deadhead(9, 9)
    assert derive_turnarounds(fixed) == fixed


def test_validation_rejects_bad_bounds():
    inst = make_small()
    with pytest.raises(ValidationError):
        validate(inst.with_params(period=1))
    with pytest.raises(ValidationError):
        validate(inst.with_params(depot_stop=99))
    with pytest.raises(ValidationError):
        validate(replace(inst, od={(1, 9): 1.0}))
