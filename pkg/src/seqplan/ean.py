"""Event-activity network over the full line pool and its routing extension.

Events are arrivals and departures of every pool line at every stop of the
line. Activities are drives along the line's edges, waits at every stop
(terminals included) and transfers between every ordered pair of distinct
lines meeting at a stop. The routing extension adds one source and one target
event per stop, joined to the departures resp. arrivals there by zero-length
auxiliary arcs.

Ids are stable: :func:`restrict` keeps the ids of the surviving events and
activities, so results on a subnetwork map back to the full network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from seqplan.ptn import PtnInstance

ARR, DEP, SOURCE, TARGET = "arrival", "departure", "source", "target"
DRIVE, WAIT, TRANSFER, AUX_IN, AUX_OUT = "drive", "wait", "transfer", "aux_in", "aux_out"
AUX = (AUX_IN, AUX_OUT)


@dataclass(frozen=True)
class Event:
    id: int
    kind: str
    stop: int
    line: int | None = None


@dataclass(frozen=True)
class Activity:
    id: int
    kind: str
    tail: int
    head: int
    lower: int
    upper: int
    # drive/wait/aux: (l,); transfer: (l1, l2)
    lines: tuple[int, ...]
    edge: int | None = None

    @property
    def line(self) -> int:
        return self.lines[0]


@dataclass
class EventActivityNetwork:
    events: dict[int, Event]
    activities: dict[int, Activity]
    extended: bool = False
    out_arcs: dict[int, list[int]] = field(default_factory=dict)
    in_arcs: dict[int, list[int]] = field(default_factory=dict)
    _by_key: dict[tuple, int] = field(default_factory=dict)

    def __post_init__(self):
        self.out_arcs = {e: [] for e in self.events}
        self.in_arcs = {e: [] for e in self.events}
        for a in self.activities.values():
            self.out_arcs[a.tail].append(a.id)
            self.in_arcs[a.head].append(a.id)
        self._by_key = {(ev.kind, ev.stop, ev.line): ev.id for ev in self.events.values()}

    def event_id(self, kind: str, stop: int, line: int | None = None) -> int:
        return self._by_key[(kind, stop, line)]

    def has_event(self, kind: str, stop: int, line: int | None = None) -> bool:
        return (kind, stop, line) in self._by_key

    def of_kind(self, *kinds: str) -> list[Activity]:
        return [a for a in self.activities.values() if a.kind in kinds]

    def line_activities(self, line: int) -> list[Activity]:
        """The set of drive and wait activities of ``line``."""
        return [a for a in self.activities.values() if a.kind in (DRIVE, WAIT) and a.lines == (line,)]

    def timed(self) -> list[Activity]:
        """Activities that carry a timetable duration (everything but aux arcs)."""
        return [a for a in self.activities.values() if a.kind not in AUX]

    def owners(self, a: Activity) -> set[int]:
        return set(a.lines)

    def b_vector(self, u: int, v: int) -> dict[int, int]:
        """Nonzero entries of the demand vector for OD pair ``(u, v)``."""
        if not self.extended:
            raise ValueError("demand vectors need the extended network")
        return {self.event_id(SOURCE, u): 1, self.event_id(TARGET, v): -1}

    def incidence(self) -> dict[tuple[int, int], int]:
        """Node-arc incidence entries ``(event, activity) -> +1 (tail) / -1 (head)``."""
        out = {}
        for a in self.activities.values():
            out[(a.tail, a.id)] = 1
            out[(a.head, a.id)] = -1
        return out

    def dump(self, directory) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        ev = ["id;kind;stop;line"] + [
            f"{e.id};{e.kind};{e.stop};{'' if e.line is None else e.line}" for e in self.events.values()
        ]
        ac = ["id;kind;tail;head;lower;upper;lines"] + [
            f"{a.id};{a.kind};{a.tail};{a.head};{a.lower};{a.upper};{','.join(map(str, a.lines))}"
            for a in self.activities.values()
        ]
        (d / "events.csv").write_text("\n".join(ev) + "\n")
        (d / "activities.csv").write_text("\n".join(ac) + "\n")
        return [d / "events.csv", d / "activities.csv"]


def build_ean(inst: PtnInstance) -> EventActivityNetwork:
    stops = inst._stop_map()
    edges = inst._edge_map()
    events: dict[int, Event] = {}
    key: dict[tuple, int] = {}

    def add_event(kind, stop, line=None):
        eid = len(events)
        events[eid] = Event(eid, kind, stop, line)
        key[(kind, stop, line)] = eid
        return eid

    for l in inst.pool:
        for s in l.stops:
            add_event(ARR, s, l.id)
            add_event(DEP, s, l.id)
    acts: dict[int, Activity] = {}

    def add(kind, tail, head, lo, hi, lines, edge=None):
        aid = len(acts)
        acts[aid] = Activity(aid, kind, tail, head, lo, hi, lines, edge)

    for l in inst.pool:
        for j, s in enumerate(l.stops):
            st = stops[s]
            add(WAIT, key[(ARR, s, l.id)], key[(DEP, s, l.id)], st.l_wait, st.u_wait, (l.id,))
            if j < len(l.edges):
                e = edges[l.edges[j]]
                add(DRIVE, key[(DEP, s, l.id)], key[(ARR, l.stops[j + 1], l.id)], e.l_drive, e.u_drive, (l.id,), e.id)
    for st in sorted(inst.stops, key=lambda s: s.id):
        through = [l for l in inst.pool if st.id in l.stops]
        for l1 in through:
            for l2 in through:
                if l1.id != l2.id:
                    add(TRANSFER, key[(ARR, st.id, l1.id)], key[(DEP, st.id, l2.id)], st.l_trans, st.u_trans, (l1.id, l2.id))
    return EventActivityNetwork(events, acts)


def extend_for_routing(ean: EventActivityNetwork, inst: PtnInstance) -> EventActivityNetwork:
    if ean.extended:
        return ean
    events = dict(ean.events)
    acts = dict(ean.activities)
    nxt_e = max(events, default=-1) + 1
    nxt_a = max(acts, default=-1) + 1
    for st in sorted(inst.stops, key=lambda s: s.id):
        src, tgt = nxt_e, nxt_e + 1
        events[src] = Event(src, SOURCE, st.id)
        events[tgt] = Event(tgt, TARGET, st.id)
        nxt_e += 2
        for l in inst.pool:
            if st.id in l.stops:
                acts[nxt_a] = Activity(nxt_a, AUX_IN, src, ean.event_id(DEP, st.id, l.id), 0, 0, (l.id,))
                acts[nxt_a + 1] = Activity(nxt_a + 1, AUX_OUT, ean.event_id(ARR, st.id, l.id), tgt, 0, 0, (l.id,))
                nxt_a += 2
    return EventActivityNetwork(events, acts, extended=True)


def restrict(ean: EventActivityNetwork, chosen) -> EventActivityNetwork:
    """Subnetwork of events and activities whose owner lines are all chosen."""
    chosen = set(chosen)
    events = {i: e for i, e in ean.events.items() if e.line is None or e.line in chosen}
    acts = {i: a for i, a in ean.activities.items() if set(a.lines) <= chosen}
    return EventActivityNetwork(events, acts, extended=ean.extended)
