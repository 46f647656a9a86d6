"""Tiny continuous processes with known sequential and integrated optima.

``unbounded_pos(N)``: two stages. Sequentially ``x = (0, 1)`` with total 1;
jointly ``x = (1/N, 0)`` with total ``1/N``. The price of sequentiality is
``N - 1`` and grows without bound.

``interior_trap(N)``: adds a third stage ``min x3 s.t. x3 >= N^2 x1``.
Integrating only the first two stages picks ``x1 = 1/N`` and forces
``x3 = N``, so the partial integration is worse than the sequential run.
"""

from __future__ import annotations

from seqplan.framework import LinearStage
from seqplan.milp import CONTINUOUS


def _x(block):
    return block["x"]


def stage_one() -> LinearStage:
    return LinearStage("s1", {"x": (0.0, 1.0, CONTINUOUS)}, lambda b, up: [], lambda b, up: _x(b))


def stage_two(N: float) -> LinearStage:
    def cons(b, up):
        x1 = _x(up[0])
        return [_x(b) + x1 <= 1, _x(b) + N * x1 >= 1]

    return LinearStage("s2", {"x": (0.0, 1.0, CONTINUOUS)}, cons, lambda b, up: _x(b))


def stage_three(N: float) -> LinearStage:
    def cons(b, up):
        return [_x(b) - N * N * _x(up[0]) >= 0]

    return LinearStage("s3", {"x": (0.0, float(N * N), CONTINUOUS)}, cons, lambda b, up: _x(b))


def unbounded_pos(N: float) -> list[LinearStage]:
    return [stage_one(), stage_two(N)]


def interior_trap(N: float) -> list[LinearStage]:
    return [stage_one(), stage_two(N), stage_three(N)]
