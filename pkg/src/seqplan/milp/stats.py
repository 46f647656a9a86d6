"""Block-structure statistics of a tagged model (which stage owns which rows/columns)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from seqplan.milp.model import MilpModel

UNTAGGED = "untagged"


@dataclass
class Block:
    tag: str
    vars: int
    cons: int


@dataclass
class BlockStats:
    total_vars: int
    total_cons: int
    blocks: list[Block] = field(default_factory=list)
    nonzeros: int = 0

    def block(self, tag: str) -> Block:
        for b in self.blocks:
            if b.tag == tag:
                return b
        return Block(tag, 0, 0)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _row_tag(model: MilpModel, con, order: dict[str, int]) -> str:
    tags = {model.var_tags.get(v.index, UNTAGGED) for v in con.expr.terms}
    if not tags:
        return model.con_tags.get(con.label, UNTAGGED)
    return "+".join(sorted(tags, key=lambda t: (order.get(t, len(order)), t)))


def model_stats(model: MilpModel, stage_order: list[str] | None = None) -> BlockStats:
    """Count variables per stage tag and constraints per set of stages they touch.

    A row whose variables all carry the same tag belongs to that stage's
    diagonal block; a row mixing tags is a coupling row and is reported
    under the joined tag, e.g. ``lin+pass``.
    """
    order = {t: i for i, t in enumerate(stage_order or [])}
    var_counts: dict[str, int] = {}
    for v in model.vars:
        t = model.var_tags.get(v.index, UNTAGGED)
        var_counts[t] = var_counts.get(t, 0) + 1
    con_counts: dict[str, int] = {}
    nnz = 0
    for con in model.constraints:
        t = _row_tag(model, con, order)
        con_counts[t] = con_counts.get(t, 0) + 1
        nnz += sum(1 for c in con.expr.terms.values() if c != 0)
    tags = set(var_counts) | set(con_counts)
    key = lambda t: (min(order.get(p, len(order)) for p in t.split("+")), t.count("+"), t)
    blocks = [Block(t, var_counts.get(t, 0), con_counts.get(t, 0)) for t in sorted(tags, key=key)]
    return BlockStats(model.num_vars, len(model.constraints), blocks, nnz)


def sparsity_pattern(model: MilpModel) -> list[tuple[int, int]]:
    """Nonzero (row, column) pairs in declaration order."""
    return [
        (i, v.index)
        for i, con in enumerate(model.constraints)
        for v, c in con.expr.terms.items()
        if c != 0
    ]
