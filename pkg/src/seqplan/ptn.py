"""Public transport network instances: data model, CSV files, generators.

Edges are undirected; a line is a directed simple path. Lines may carry a
``twin``, the same route in the opposite direction. Twins are planned
together (both or neither) and count once towards edge frequencies, which is
how a pool of bidirectional lines is represented.

CSV files use ``;`` as separator, ``#`` for comments and a header row.
"""

from __future__ import annotations

import csv
import heapq
import io
import itertools
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path


class InstanceError(Exception):
    pass


class ParseError(InstanceError):
    def __init__(self, file: str, line: int, message: str):
        super().__init__(f"{file}:{line}: {message}")
        self.file = file
        self.line = line


class ValidationError(InstanceError):
    pass


class DisconnectedPtn(InstanceError):
    pass


@dataclass(frozen=True)
class Stop:
    id: int
    name: str
    l_wait: int
    u_wait: int
    l_trans: int
    u_trans: int


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    length: float
    l_drive: int
    u_drive: int
    f_min: int
    f_max: int

    def other(self, s: int) -> int:
        return self.v if s == self.u else self.u


@dataclass(frozen=True)
class Line:
    id: int
    edges: tuple[int, ...]
    stops: tuple[int, ...]
    cost: float
    length: float
    twin: int | None = None

    @property
    def first(self) -> int:
        return self.stops[0]

    @property
    def last(self) -> int:
        return self.stops[-1]


@dataclass(frozen=True)
class Params:
    period: int = 10
    periods: tuple[int, ...] = (0, 1)
    gamma: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 100.0)
    lambda1: float = 0.0
    lambda3: float = 1.0
    lambda4: float = 1.0
    depot_stop: int | None = None
    min_turnaround: int = 1
    big_m: float | None = None
    big_m_prime: float | None = None
    transfer_penalty: float = 0.0


@dataclass(frozen=True)
class Deadhead:
    time: float
    distance: float


@dataclass(frozen=True)
class PtnInstance:
    name: str
    stops: tuple[Stop, ...]
    edges: tuple[Edge, ...]
    od: dict[tuple[int, int], float]
    pool: tuple[Line, ...]
    params: Params = field(default_factory=Params)
    # keys: (line, line), ("depot", line) and (line, "depot")
    deadhead: dict[tuple, Deadhead] = field(default_factory=dict)

    def stop(self, sid: int) -> Stop:
        return self._stop_map()[sid]

    def edge(self, eid: int) -> Edge:
        return self._edge_map()[eid]

    def line(self, lid: int) -> Line:
        return self._line_map()[lid]

    def _stop_map(self):
        return {s.id: s for s in self.stops}

    def _edge_map(self):
        return {e.id: e for e in self.edges}

    def _line_map(self):
        return {l.id: l for l in self.pool}

    @property
    def period(self) -> int:
        return self.params.period

    @property
    def depot(self) -> int:
        p = self.params.depot_stop
        return min(s.id for s in self.stops) if p is None else p

    def demand_pairs(self) -> list[tuple[int, int]]:
        """OD pairs with positive demand, sorted."""
        return sorted(k for k, c in self.od.items() if c > 0)

    def frequency_lines(self) -> list[Line]:
        """One representative per twin pair (the lower id) plus untwinned lines."""
        return [l for l in self.pool if l.twin is None or l.id < l.twin]

    def with_params(self, **kw) -> PtnInstance:
        return replace(self, params=replace(self.params, **kw))


def line_from_edges(
    lid: int, edges: dict[int, Edge], path: list[tuple[int, bool]], cost: float | None = None, twin=None
) -> Line:
    """Build a line from ``(edge_id, reversed)`` steps; cost defaults to ``1 + length``."""
    stops: list[int] = []
    for eid, rev in path:
        if eid not in edges:
            raise ValidationError(f"line {lid} uses unknown edge {eid}")
        e = edges[eid]
        a, b = (e.v, e.u) if rev else (e.u, e.v)
        if not stops:
            stops = [a, b]
        elif stops[-1] != a:
            raise ValidationError(f"line {lid}: edge {eid} does not continue the path at stop {stops[-1]}")
        else:
            stops.append(b)
    if len(set(stops)) != len(stops):
        raise ValidationError(f"line {lid} is not a simple path")
    length = sum(edges[eid].length for eid, _ in path)
    return Line(lid, tuple(eid for eid, _ in path), tuple(stops), 1.0 + length if cost is None else cost, length, twin)


def orient(edges: dict[int, Edge], eids: list[int]) -> list[tuple[int, bool]]:
    """Infer traversal directions for an unsigned edge sequence (first edge u->v if ambiguous)."""
    if len(eids) == 1:
        return [(eids[0], False)]
    e0, e1 = edges[eids[0]], edges[eids[1]]
    start = e0.u if e0.v in (e1.u, e1.v) else e0.v
    out = []
    cur = start
    for eid in eids:
        e = edges[eid]
        if cur == e.u:
            out.append((eid, False))
            cur = e.v
        elif cur == e.v:
            out.append((eid, True))
            cur = e.u
        else:
            raise ValidationError(f"edges {eids} do not form a path")
    return out


def reverse_line(line: Line, lid: int, edges: dict[int, Edge]) -> Line:
    path = []
    stops = list(reversed(line.stops))
    for i, eid in enumerate(reversed(line.edges)):
        path.append((eid, edges[eid].u != stops[i]))
    return replace(line_from_edges(lid, edges, path, line.cost), twin=line.id)


def validate(inst: PtnInstance) -> PtnInstance:
    stops = inst._stop_map()
    if len(stops) != len(inst.stops):
        raise ValidationError("duplicate stop id")
    for s in inst.stops:
        if not (0 <= s.l_wait <= s.u_wait and 0 <= s.l_trans <= s.u_trans):
            raise ValidationError(f"stop {s.id}: bounds must satisfy 0 <= L <= U")
    edges = inst._edge_map()
    if len(edges) != len(inst.edges):
        raise ValidationError("duplicate edge id")
    for e in inst.edges:
        if e.u not in stops or e.v not in stops or e.u == e.v:
            raise ValidationError(f"edge {e.id} has invalid end stops")
        if not (0 <= e.l_drive <= e.u_drive):
            raise ValidationError(f"edge {e.id}: drive bounds must satisfy 0 <= L <= U")
        if not (0 <= e.f_min <= e.f_max):
            raise ValidationError(f"edge {e.id}: need 0 <= f_min <= f_max")
        if e.length < 0:
            raise ValidationError(f"edge {e.id}: negative length")
    lines = inst._line_map()
    if len(lines) != len(inst.pool):
        raise ValidationError("duplicate line id")
    for l in inst.pool:
        if not l.edges:
            raise ValidationError(f"line {l.id} has no edges")
        path = []
        for i, eid in enumerate(l.edges):
            if eid not in edges:
                raise ValidationError(f"line {l.id} uses unknown edge {eid}")
            e = edges[eid]
            if {l.stops[i], l.stops[i + 1]} != {e.u, e.v}:
                raise ValidationError(f"line {l.id}: stop sequence inconsistent with edge {eid}")
            path.append((eid, e.u != l.stops[i]))
        line_from_edges(l.id, edges, path)
        if l.twin is not None:
            t = lines.get(l.twin)
            if t is None or t.twin != l.id or t.stops != tuple(reversed(l.stops)):
                raise ValidationError(f"line {l.id}: twin {l.twin} is not its reverse")
    p = inst.params
    if p.period < 2:
        raise ValidationError("period T must be at least 2")
    if not p.periods or any(t < 0 for t in p.periods) or len(set(p.periods)) != len(p.periods):
        raise ValidationError("periods must be a nonempty set of nonnegative integers")
    if len(p.gamma) != 5 or any(g < 0 for g in p.gamma):
        raise ValidationError("gamma needs five nonnegative entries")
    if min(p.lambda1, p.lambda3, p.lambda4) < 0:
        raise ValidationError("lambda weights must be nonnegative")
    if p.depot_stop is not None and p.depot_stop not in stops:
        raise ValidationError("depot stop is not a stop")
    for (u, v), c in inst.od.items():
        if u not in stops or v not in stops:
            raise ValidationError(f"OD pair ({u},{v}) references an unknown stop")
        if c < 0:
            raise ValidationError(f"OD pair ({u},{v}) has negative demand")
        if c > 0 and u == v:
            raise ValidationError(f"OD pair ({u},{v}) with positive demand needs u != v")
    for key, dh in inst.deadhead.items():
        a, b = key
        for x in (a, b):
            if x != "depot" and x not in lines:
                raise ValidationError(f"deadhead entry {key} references an unknown line")
        if dh.time < 0 or dh.distance < 0:
            raise ValidationError(f"deadhead entry {key} is negative")
    return inst


# ---------------------------------------------------------------- shortest paths


def _dijkstra(adj: dict[int, list[tuple[int, float]]], src: int) -> dict[int, float]:
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        for v, w in adj.get(u, ()):
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _adjacency(inst: PtnInstance, weight: str) -> dict[int, list[tuple[int, float]]]:
    adj: dict[int, list[tuple[int, float]]] = {s.id: [] for s in inst.stops}
    for e in inst.edges:
        w = float(getattr(e, weight))
        adj[e.u].append((e.v, w))
        adj[e.v].append((e.u, w))
    return adj


def derive_turnarounds(inst: PtnInstance) -> PtnInstance:
    """Fill missing deadhead times/distances from PTN shortest paths.

    Line to line: time from the last stop of ``l1`` to the first stop of ``l2``
    by drive lower bounds, plus the minimum turnaround; distance by edge
    length. Depot pull-out and pull-in use the depot stop and no turnaround.
    Explicit entries are kept.
    """
    t_adj = _adjacency(inst, "l_drive")
    d_adj = _adjacency(inst, "length")
    t_from = {s.id: _dijkstra(t_adj, s.id) for s in inst.stops}
    d_from = {s.id: _dijkstra(d_adj, s.id) for s in inst.stops}

    def sp(a: int, b: int) -> tuple[float, float]:
        if b not in t_from[a]:
            raise DisconnectedPtn(f"no path from stop {a} to stop {b}")
        return t_from[a][b], d_from[a][b]

    out = dict(inst.deadhead)
    turn = inst.params.min_turnaround
    for l1 in inst.pool:
        for l2 in inst.pool:
            if (l1.id, l2.id) not in out:
                t, d = sp(l1.last, l2.first)
                out[(l1.id, l2.id)] = Deadhead(t + turn, d)
    depot = inst.depot
    for l in inst.pool:
        if ("depot", l.id) not in out:
            t, d = sp(depot, l.first)
            out[("depot", l.id)] = Deadhead(t, d)
        if (l.id, "depot") not in out:
            t, d = sp(l.last, depot)
            out[(l.id, "depot")] = Deadhead(t, d)
    return replace(inst, deadhead=out)


# ---------------------------------------------------------------- CSV


def _rows(path: Path) -> list[tuple[int, list[str]]]:
    text = path.read_text()
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((no, [c.strip() for c in next(csv.reader([line], delimiter=";"))]))
    if not out:
        raise ParseError(path.name, 1, "missing header row")
    return out[1:]


def _num(file: str, no: int, s: str, kind=float):
    try:
        return kind(s)
    except ValueError:
        raise ParseError(file, no, f"cannot read {s!r} as {kind.__name__}") from None


def _ncols(file: str, no: int, row: list[str], n: int, upto: int | None = None) -> None:
    if not (n <= len(row) <= (upto or n)):
        raise ParseError(file, no, f"expected {n} columns, got {len(row)}")


_CONFIG_KEYS = {
    "period_T",
    "periods",
    "gamma_1",
    "gamma_2",
    "gamma_3",
    "gamma_4",
    "gamma_5",
    "lambda_1",
    "lambda_3",
    "lambda_4",
    "depot_stop",
    "min_turnaround",
    "big_M",
    "big_M_prime",
    "transfer_penalty",
}


def load_instance(directory, name: str | None = None) -> PtnInstance:
    d = Path(directory)
    for f in ("stops.csv", "edges.csv", "od.csv", "pool.csv", "config.csv"):
        if not (d / f).exists():
            raise ParseError(f, 0, "file not found")
    stops = []
    for no, r in _rows(d / "stops.csv"):
        _ncols("stops.csv", no, r, 6)
        stops.append(Stop(_num("stops.csv", no, r[0], int), r[1], *(_num("stops.csv", no, x, int) for x in r[2:6])))
    edges = []
    for no, r in _rows(d / "edges.csv"):
        _ncols("edges.csv", no, r, 8)
        f = "edges.csv"
        edges.append(
            Edge(
                _num(f, no, r[0], int),
                _num(f, no, r[1], int),
                _num(f, no, r[2], int),
                _num(f, no, r[3]),
                _num(f, no, r[4], int),
                _num(f, no, r[5], int),
                _num(f, no, r[6], int),
                _num(f, no, r[7], int),
            )
        )
    od: dict[tuple[int, int], float] = {}
    for no, r in _rows(d / "od.csv"):
        _ncols("od.csv", no, r, 3)
        key = (_num("od.csv", no, r[0], int), _num("od.csv", no, r[1], int))
        if key in od:
            raise ParseError("od.csv", no, f"duplicate OD pair {key}")
        od[key] = _num("od.csv", no, r[2])
    emap = {e.id: e for e in edges}
    pool = []
    for no, r in _rows(d / "pool.csv"):
        _ncols("pool.csv", no, r, 3, 4)
        lid = _num("pool.csv", no, r[0], int)
        tokens = [t.strip() for t in r[1].split(",") if t.strip()]
        if not tokens:
            raise ParseError("pool.csv", no, "line without edges")
        signed = any(t.startswith(("-", "+")) for t in tokens)
        ids = [abs(_num("pool.csv", no, t, int)) for t in tokens]
        for eid in ids:
            if eid not in emap:
                raise ValidationError(f"line {lid} uses unknown edge {eid}")
        if signed or len(ids) == 1:
            path = [(abs(int(t)), t.startswith("-")) for t in tokens]
        else:
            path = orient(emap, ids)
        twin = _num("pool.csv", no, r[3], int) if len(r) == 4 and r[3] != "" else None
        pool.append(line_from_edges(lid, emap, path, _num("pool.csv", no, r[2]), twin))
    cfg: dict[str, str] = {}
    for no, r in _rows(d / "config.csv"):
        _ncols("config.csv", no, r, 2)
        if r[0] not in _CONFIG_KEYS:
            raise ParseError("config.csv", no, f"unknown key {r[0]!r}")
        cfg[r[0]] = r[1]
    p = Params()
    kw: dict = {}
    if "period_T" in cfg:
        kw["period"] = int(cfg["period_T"])
    if "periods" in cfg:
        kw["periods"] = tuple(int(x) for x in cfg["periods"].split(",") if x.strip())
    g = list(p.gamma)
    for i in range(5):
        if f"gamma_{i + 1}" in cfg:
            g[i] = float(cfg[f"gamma_{i + 1}"])
    kw["gamma"] = tuple(g)
    for key, attr in (("lambda_1", "lambda1"), ("lambda_3", "lambda3"), ("lambda_4", "lambda4")):
        if key in cfg:
            kw[attr] = float(cfg[key])
    if cfg.get("depot_stop", "") != "":
        kw["depot_stop"] = int(cfg["depot_stop"])
    if "min_turnaround" in cfg:
        kw["min_turnaround"] = int(cfg["min_turnaround"])
    for key, attr in (("big_M", "big_m"), ("big_M_prime", "big_m_prime")):
        if cfg.get(key, "") != "":
            kw[attr] = float(cfg[key])
    if "transfer_penalty" in cfg:
        kw["transfer_penalty"] = float(cfg["transfer_penalty"])
    deadhead: dict[tuple, Deadhead] = {}
    if (d / "deadhead.csv").exists():
        for no, r in _rows(d / "deadhead.csv"):
            _ncols("deadhead.csv", no, r, 4)
            a = r[0] if r[0] == "depot" else _num("deadhead.csv", no, r[0], int)
            b = r[1] if r[1] == "depot" else _num("deadhead.csv", no, r[1], int)
            deadhead[(a, b)] = Deadhead(_num("deadhead.csv", no, r[2]), _num("deadhead.csv", no, r[3]))
    inst = PtnInstance(
        name or d.name, tuple(stops), tuple(edges), od, tuple(pool), replace(p, **kw), deadhead
    )
    return validate(inst)


def _fmt(x) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def _write(path: Path, header: str, rows) -> None:
    buf = io.StringIO()
    buf.write(header + "\n")
    for r in rows:
        buf.write(";".join(_fmt(x) for x in r) + "\n")
    path.write_text(buf.getvalue())


def save_instance(inst: PtnInstance, directory) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    emap = inst._edge_map()
    files = []
    _write(d / "stops.csv", "id;name;L_wait;U_wait;L_trans;U_trans",
           [(s.id, s.name, s.l_wait, s.u_wait, s.l_trans, s.u_trans) for s in inst.stops])
    _write(d / "edges.csv", "id;u;v;length;L_drive;U_drive;f_min;f_max",
           [(e.id, e.u, e.v, e.length, e.l_drive, e.u_drive, e.f_min, e.f_max) for e in inst.edges])
    _write(d / "od.csv", "u;v;demand", [(u, v, c) for (u, v), c in sorted(inst.od.items())])
    pool_rows = []
    for l in inst.pool:
        toks = []
        for i, eid in enumerate(l.edges):
            toks.append(f"-{eid}" if emap[eid].u != l.stops[i] else str(eid))
        pool_rows.append((l.id, ",".join(toks), l.cost, "" if l.twin is None else l.twin))
    _write(d / "pool.csv", "line_id;edge_ids;cost;twin", pool_rows)
    p = inst.params
    cfg = [
        ("period_T", p.period),
        ("periods", ",".join(str(t) for t in p.periods)),
        *((f"gamma_{i + 1}", g) for i, g in enumerate(p.gamma)),
        ("lambda_1", p.lambda1),
        ("lambda_3", p.lambda3),
        ("lambda_4", p.lambda4),
        ("depot_stop", "" if p.depot_stop is None else p.depot_stop),
        ("min_turnaround", p.min_turnaround),
        ("big_M", "" if p.big_m is None else p.big_m),
        ("big_M_prime", "" if p.big_m_prime is None else p.big_m_prime),
        ("transfer_penalty", p.transfer_penalty),
    ]
    _write(d / "config.csv", "key;value", cfg)
    files = [d / f for f in ("stops.csv", "edges.csv", "od.csv", "pool.csv", "config.csv")]
    if inst.deadhead:
        order = lambda k: tuple((0, x) if x == "depot" else (1, x) for x in k)
        _write(d / "deadhead.csv", "from;to;time;distance",
               [(a, b, dh.time, dh.distance) for (a, b), dh in sorted(inst.deadhead.items(), key=lambda kv: order(kv[0]))])
        files.append(d / "deadhead.csv")
    return files


# ---------------------------------------------------------------- generators

# fixture defaults; none of these numbers are published for the data sets
DEFAULTS = dict(
    period=10,
    f_min=1,
    f_max=3,
    l_drive=2,
    u_drive=4,
    l_wait=1,
    u_wait=3,
    l_trans=2,
    periods=(0, 1),
    gamma=(1.0, 1.0, 1.0, 1.0, 100.0),
    demand=10.0,
    length=1.0,
)


def _build(name: str, n_stops: int, edge_list, routes, overrides: dict) -> PtnInstance:
    cfg = dict(DEFAULTS)
    cfg.update({k: v for k, v in overrides.items() if k in DEFAULTS})
    T = int(overrides.get("T", cfg["period"]))
    u_trans = cfg["l_trans"] + T - 1
    stops = tuple(
        Stop(i, f"v{i}", cfg["l_wait"], cfg["u_wait"], cfg["l_trans"], u_trans) for i in range(1, n_stops + 1)
    )
    edges = tuple(
        Edge(i, u, v, cfg["length"], cfg["l_drive"], cfg["u_drive"], cfg["f_min"], cfg["f_max"])
        for i, (u, v) in enumerate(edge_list, start=1)
    )
    emap = {e.id: e for e in edges}
    pool = []
    lid = 1
    for route in routes:
        eids = []
        for a, b in zip(route, route[1:]):
            eids.append(next(e.id for e in edges if {e.u, e.v} == {a, b}))
        fwd = line_from_edges(lid, emap, orient(emap, eids) if len(eids) > 1 else [(eids[0], edges[eids[0] - 1].u != route[0])])
        bwd = reverse_line(fwd, lid + 1, emap)
        pool += [replace(fwd, twin=lid + 1), bwd]
        lid += 2
    od = {(u.id, v.id): float(cfg["demand"]) for u in stops for v in stops if u.id != v.id}
    if "od" in overrides:
        od = dict(overrides["od"])
    params = Params(period=T, periods=tuple(overrides.get("periods", cfg["periods"])), gamma=tuple(cfg["gamma"]))
    pkw = {k: overrides[k] for k in ("lambda1", "lambda3", "lambda4", "depot_stop", "min_turnaround",
                                      "big_m", "big_m_prime", "transfer_penalty") if k in overrides}
    params = replace(params, **pkw)
    return validate(PtnInstance(name, stops, edges, od, tuple(pool), params))


SMALL_ROUTES = ((1, 2, 3, 4), (1, 2, 3), (2, 3, 4))


def make_small(**overrides) -> PtnInstance:
    """Four stops on a path; three bidirectional lines, i.e. six directed lines.

    Keyword overrides: ``T``, ``periods``, ``od``, any key of :data:`DEFAULTS`
    and the :class:`Params` fields ``lambda1`` ... ``transfer_penalty``.
    """
    return _build("small", 4, [(1, 2), (2, 3), (3, 4)], SMALL_ROUTES, overrides)


TOY_EDGES = [(1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (3, 6), (6, 7), (6, 8)]
TOY_ROUTES = (
    (1, 3, 2),
    (7, 6, 8),
    (1, 3, 6, 7),
    (1, 3, 6, 8),
    (2, 3, 6, 7),
    (2, 3, 6, 8),
    (1, 3, 4, 5, 6, 8),
    (2, 3, 4, 5, 6, 7),
)


def make_toy(**overrides) -> PtnInstance:
    """Eight stops, eight edges; eight bidirectional lines, i.e. sixteen directed lines.

    The routes join the four leaf stops: every leaf pair by its shortest path,
    plus two routes around the loop v3-v4-v5-v6.
    """
    return _build("toy", 8, TOY_EDGES, TOY_ROUTES, overrides)


def make_random(
    seed: int,
    n_stops: tuple[int, int] = (4, 6),
    n_routes: tuple[int, int] = (2, 3),
    n_od: tuple[int, int] = (2, 6),
    periods: tuple[int, int] = (1, 2),
    period: tuple[int, int] = (5, 8),
    extra_edge_prob: float = 0.3,
) -> PtnInstance:
    """Random connected PTN with twinned lines covering every edge.

    Operating the whole pool is always a feasible line plan.

    Bounds satisfy ``L >= 1`` and ``U - L <= T - 1``; transfer windows span a
    full period so every line plan admits a timetable.
    """
    rng = random.Random(seed)
    n = rng.randint(*n_stops)
    T = rng.randint(*period)
    edge_list = []
    for v in range(2, n + 1):
        edge_list.append((rng.randint(1, v - 1), v))
    if n >= 4 and rng.random() < extra_edge_prob:
        pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1) if (a, b) not in edge_list]
        edge_list.append(rng.choice(pairs))
    adj: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for a, b in edge_list:
        adj[a].append(b)
        adj[b].append(a)

    def random_path() -> tuple[int, ...]:
        start = rng.randint(1, n)
        path = [start]
        target_len = rng.randint(1, 3)
        while len(path) <= target_len:
            nxt = [w for w in sorted(adj[path[-1]]) if w not in path]
            if not nxt:
                break
            path.append(rng.choice(nxt))
        return tuple(path)

    def edge_set(route):
        return {frozenset(p) for p in zip(route, route[1:])}

    all_edges = {frozenset(e) for e in edge_list}
    routes: list[tuple[int, ...]] = []
    for _ in range(200):
        if len(routes) >= n_routes[1]:
            break
        r = random_path()
        if len(r) >= 2 and r not in routes and tuple(reversed(r)) not in routes:
            routes.append(r)
    # cover leftover edges with single-edge routes, dropping random ones if the pool would grow too large
    covered = set().union(*(edge_set(r) for r in routes)) if routes else set()
    for e in sorted(all_edges - covered, key=sorted):
        routes.append(tuple(sorted(e)))
    while len(routes) > n_routes[1]:
        # merge by replacing the pool with a spanning cover: fall back to a DFS route cover
        routes = _path_cover(adj, n, rng)[: n_routes[1]]
        covered = set().union(*(edge_set(r) for r in routes))
        if covered == all_edges:
            break
    covered = set().union(*(edge_set(r) for r in routes))
    if covered != all_edges:
        return make_random(seed + 10_007, n_stops, n_routes, n_od, periods, period, extra_edge_prob)

    stops = []
    for v in range(1, n + 1):
        lw = rng.randint(1, 2)
        lt = rng.randint(1, 3)
        stops.append(Stop(v, f"v{v}", lw, lw + rng.randint(0, min(2, T - 1)), lt, lt + T - 1))
    edges = []
    for i, (a, b) in enumerate(edge_list, start=1):
        ld = rng.randint(1, 4)
        # operating every route must stay within the upper frequency bound
        f_max = max(2, sum(frozenset((a, b)) in edge_set(r) for r in routes))
        edges.append(Edge(i, a, b, float(rng.randint(1, 5)), ld, ld + rng.randint(0, T - 1), 1, f_max))
    emap = {e.id: e for e in edges}
    pool = []
    lid = 1
    for route in routes:
        path = []
        for a, b in zip(route, route[1:]):
            e = next(e for e in edges if {e.u, e.v} == {a, b})
            path.append((e.id, e.u != a))
        cost = float(rng.randint(1, 10))
        fwd = line_from_edges(lid, emap, path, cost)
        bwd = replace(reverse_line(fwd, lid + 1, emap), cost=cost)
        pool += [replace(fwd, twin=lid + 1), bwd]
        lid += 2
    pairs = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v]
    k = min(len(pairs), rng.randint(*n_od))
    od = {p: float(rng.randint(1, 10)) for p in sorted(rng.sample(pairs, k))}
    n_per = rng.randint(*periods)
    params = Params(
        period=T,
        periods=tuple(range(n_per)),
        gamma=tuple(float(rng.randint(0, 3)) for _ in range(4)) + (float(rng.randint(5, 20)),),
        depot_stop=rng.randint(1, n),
    )
    return validate(PtnInstance(f"random{seed}", tuple(stops), tuple(edges), od, tuple(pool), params))


def _path_cover(adj, n, rng) -> list[tuple[int, ...]]:
    """Greedy cover of all edges by simple paths, longest first."""
    remaining = {frozenset((a, b)) for a in adj for b in adj[a]}
    routes = []
    while remaining:
        best: tuple[int, ...] = ()
        for start in range(1, n + 1):
            path = [start]
            while True:
                nxt = [w for w in sorted(adj[path[-1]]) if w not in path and frozenset((path[-1], w)) in remaining]
                if not nxt:
                    break
                path.append(nxt[0])
            if len(path) > len(best):
                best = tuple(path)
        routes.append(best)
        remaining -= {frozenset(p) for p in zip(best, best[1:])}
    return routes
