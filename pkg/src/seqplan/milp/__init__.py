from seqplan.milp.lpformat import export_lp, parse_lp
from seqplan.milp.model import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    Constraint,
    DuplicateName,
    FrozenModel,
    LinExpr,
    MilpModel,
    ModelError,
    Var,
    VarDef,
    is_var,
    quicksum,
)
from seqplan.milp.solve import (
    GAP_LIMIT,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    MilpSolution,
    SolveOptions,
    TooLarge,
    lp_relaxation,
    solve,
    solve_bruteforce,
)
from seqplan.milp.stats import BlockStats, model_stats, sparsity_pattern

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "INTEGER",
    "GAP_LIMIT",
    "INFEASIBLE",
    "OPTIMAL",
    "UNBOUNDED",
    "BlockStats",
    "Constraint",
    "DuplicateName",
    "FrozenModel",
    "LinExpr",
    "MilpModel",
    "MilpSolution",
    "ModelError",
    "SolveOptions",
    "TooLarge",
    "Var",
    "VarDef",
    "export_lp",
    "is_var",
    "lp_relaxation",
    "model_stats",
    "parse_lp",
    "quicksum",
    "solve",
    "solve_bruteforce",
    "sparsity_pattern",
]
