import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import instance
from seqplan.ean import (
    ARR,
    AUX,
    AUX_IN,
    AUX_OUT,
    DEP,
    DRIVE,
    SOURCE,
    TARGET,
    TRANSFER,
    WAIT,
    build_ean,
    extend_for_routing,
    restrict,
)
from seqplan.ptn import make_random, make_small, make_toy


def hand_count(inst):
    """Activity counts from the pool alone: stops, edges and stop-sharing line pairs."""
    drive = sum(len(l.edges) for l in inst.pool)
    wait = sum(len(l.stops) for l in inst.pool)
    transfer = sum(
        1 for l1, l2 in itertools.permutations(inst.pool, 2) for s in set(l1.stops) & set(l2.stops)
    )
    return {DRIVE: drive, WAIT: wait, TRANSFER: transfer}


def kinds(ean):
    out = {}
    for a in ean.activities.values():
        out[a.kind] = out.get(a.kind, 0) + 1
    return out


def test_one_line_one_edge():
    ean = build_ean(instance(2, [(1, 2)], [(1, 2)], {(1, 2): 1}))
    assert len(ean.events) == 4
    assert kinds(ean) == {DRIVE: 1, WAIT: 2}


def test_two_lines_sharing_one_stop():
    ean = build_ean(instance(3, [(1, 2), (2, 3)], [(1, 2), (2, 3)], {(1, 3): 1}))
    assert kinds(ean)[TRANSFER] == 2


@pytest.mark.parametrize("make", [make_small, make_toy])
def test_counts_match_hand_enumeration(make):
    inst = make()
    ean = build_ean(inst)
    assert {k: v for k, v in kinds(ean).items()} == hand_count(inst)
    n = sum(len(l.stops) for l in inst.pool)
    assert len(ean.of_kind(DRIVE)) == sum(len(l.edges) for l in inst.pool)
    assert sum(1 for e in ean.events.values() if e.kind == ARR) == n
    assert sum(1 for e in ean.events.values() if e.kind == DEP) == n


def test_small_sizes():
    ean = build_ean(make_small())
    ext = extend_for_routing(ean, make_small())
    assert (len(ean.events), len(ean.activities)) == (40, 118)
    assert (len(ext.events), len(ext.activities)) == (48, 158)


def test_bounds_copied_from_ptn():
    inst = make_random(5)
    ean = build_ean(inst)
    stops, edges = inst._stop_map(), inst._edge_map()
    for a in ean.activities.values():
        if a.kind == DRIVE:
            assert (a.lower, a.upper) == (edges[a.edge].l_drive, edges[a.edge].u_drive)
        elif a.kind == WAIT:
            s = stops[ean.events[a.tail].stop]
            assert (a.lower, a.upper) == (s.l_wait, s.u_wait)
        elif a.kind == TRANSFER:
            s = stops[ean.events[a.tail].stop]
            assert (a.lower, a.upper) == (s.l_trans, s.u_trans)


def test_extension_adds_two_events_per_stop():
    inst = make_small()
    ext = extend_for_routing(build_ean(inst), inst)
    assert sum(1 for e in ext.events.values() if e.kind in (SOURCE, TARGET)) == 8
    assert extend_for_routing(ext, inst) is ext


def test_aux_arcs_per_serving_line():
    inst = instance(3, [(1, 2), (2, 3)], [(1, 2), (2, 3)], {(1, 3): 1})
    ext = extend_for_routing(build_ean(inst), inst)
    at2 = [a for a in ext.of_kind(*AUX) if ext.events[a.tail].stop == 2 or ext.events[a.head].stop == 2]
    assert sum(a.kind == AUX_IN for a in at2) == 2
    assert sum(a.kind == AUX_OUT for a in at2) == 2
    for a in ext.of_kind(AUX_IN):
        assert ext.events[a.head].kind == DEP and (a.lower, a.upper) == (0, 0)


def test_b_vector():
    inst = make_small()
    ext = extend_for_routing(build_ean(inst), inst)
    b = ext.b_vector(1, 4)
    assert b == {ext.event_id(SOURCE, 1): 1, ext.event_id(TARGET, 4): -1}
    assert sum(b.values()) == 0
    with pytest.raises(ValueError):
        build_ean(inst).b_vector(1, 4)


def test_restrict_cases():
    inst = make_small()
    ext = extend_for_routing(build_ean(inst), inst)
    empty = restrict(ext, set())
    assert {e.kind for e in empty.events.values()} == {SOURCE, TARGET}
    assert not empty.activities
    full = restrict(ext, {l.id for l in inst.pool})
    assert full.events == ext.events and full.activities == ext.activities
    one = restrict(ext, {1})
    assert not one.of_kind(TRANSFER)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_restrict_idempotent_and_ids_stable(seed, data):
    inst = make_random(seed)
    ext = extend_for_routing(build_ean(inst), inst)
    chosen = data.draw(st.sets(st.sampled_from([l.id for l in inst.pool])))
    once = restrict(ext, chosen)
    twice = restrict(once, chosen)
    assert once.events == twice.events and once.activities == twice.activities
    for aid, a in once.activities.items():
        assert ext.activities[aid] == a


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_counts_and_b_vectors(seed):
    inst = make_random(seed)
    ean = build_ean(inst)
    assert kinds(ean).get(TRANSFER, 0) == hand_count(inst)[TRANSFER]
    ext = extend_for_routing(ean, inst)
    for u, v in inst.demand_pairs():
        assert sum(ext.b_vector(u, v).values()) == 0
    inc = ext.incidence()
    assert len(inc) == 2 * len(ext.activities)


def test_dump(tmp_path):
    inst = make_small()
    files = build_ean(inst).dump(tmp_path)
    assert files[0].read_text().splitlines()[0] == "id;kind;stop;line"
    assert len(files[1].read_text().splitlines()) == 119
