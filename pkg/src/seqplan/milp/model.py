"""Solver-agnostic MILP model: variables, linear expressions, constraints."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from numbers import Real
from typing import Iterable, Iterator

BINARY = "binary"
INTEGER = "integer"
CONTINUOUS = "continuous"

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


class ModelError(Exception):
    pass


class DuplicateName(ModelError):
    pass


class FrozenModel(ModelError):
    pass


@dataclass(frozen=True)
class VarDef:
    name: str
    kind: str = CONTINUOUS
    lb: float = 0.0
    ub: float = 1.0

    @classmethod
    def binary(cls, name: str) -> VarDef:
        return cls(name, BINARY, 0.0, 1.0)

    @classmethod
    def integer(cls, name: str, lb: float, ub: float) -> VarDef:
        return cls(name, INTEGER, lb, ub)

    @classmethod
    def continuous(cls, name: str, lb: float, ub: float) -> VarDef:
        return cls(name, CONTINUOUS, lb, ub)

    @property
    def is_integer(self) -> bool:
        return self.kind != CONTINUOUS


class Var:
    """Opaque handle to a declared variable. Hash and equality are identity based."""

    __slots__ = ("index", "name", "kind", "lb", "ub")

    def __init__(self, index: int, d: VarDef):
        self.index = index
        self.name = d.name
        self.kind = d.kind
        self.lb = d.lb
        self.ub = d.ub

    @property
    def is_integer(self) -> bool:
        return self.kind != CONTINUOUS

    def __repr__(self) -> str:
        return f"Var({self.index}, {self.name!r})"

    def __hash__(self) -> int:
        return hash(self.index)

    def __eq__(self, other: object) -> bool:
        return self is other

    # arithmetic delegates to LinExpr
    def _e(self) -> LinExpr:
        return LinExpr({self: 1.0})

    def __add__(self, o):
        return self._e() + o

    __radd__ = __add__

    def __sub__(self, o):
        return self._e() - o

    def __rsub__(self, o):
        return o - self._e() if isinstance(o, LinExpr) else LinExpr.of(o) - self._e()

    def __mul__(self, o):
        return self._e() * o

    __rmul__ = __mul__

    def __neg__(self):
        return -self._e()

    def __le__(self, o):
        return self._e() <= o

    def __ge__(self, o):
        return self._e() >= o


class LinExpr:
    """Sum of coefficient * variable terms plus a constant.

    Terms are kept in first-insertion order so that everything derived from an
    expression (LP text, matrices) is deterministic.
    """

    __slots__ = ("terms", "constant")

    def __init__(self, terms: dict[Var, float] | None = None, constant: float = 0.0):
        self.terms: dict[Var, float] = dict(terms) if terms else {}
        self.constant = float(constant)

    @classmethod
    def of(cls, x) -> LinExpr:
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, Var):
            return x._e()
        if isinstance(x, Real):
            return cls(constant=float(x))
        raise TypeError(f"cannot build a linear expression from {type(x).__name__}")

    def copy(self) -> LinExpr:
        return LinExpr(self.terms, self.constant)

    def _iadd(self, other, scale: float = 1.0) -> LinExpr:
        if isinstance(other, Var):
            self.terms[other] = self.terms.get(other, 0.0) + scale
        elif isinstance(other, LinExpr):
            for v, c in other.terms.items():
                self.terms[v] = self.terms.get(v, 0.0) + scale * c
            self.constant += scale * other.constant
        elif isinstance(other, Real):
            self.constant += scale * float(other)
        else:
            return NotImplemented
        return self

    def __add__(self, other):
        return self.copy()._iadd(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.copy()._iadd(other, -1.0)

    def __rsub__(self, other):
        return (-self)._iadd(other)

    def __neg__(self):
        return LinExpr({v: -c for v, c in self.terms.items()}, -self.constant)

    def __mul__(self, k):
        if not isinstance(k, Real):
            raise TypeError("only scalar multiplication keeps an expression linear")
        k = float(k)
        return LinExpr({v: c * k for v, c in self.terms.items()}, self.constant * k)

    __rmul__ = __mul__

    def __le__(self, other) -> Constraint:
        return _relation(self, "<=", other)

    def __ge__(self, other) -> Constraint:
        return _relation(self, ">=", other)

    def __eq__(self, other) -> Constraint:  # type: ignore[override]
        return _relation(self, "==", other)

    __hash__ = None  # type: ignore[assignment]

    def normalized(self) -> LinExpr:
        """Drop zero coefficients."""
        return LinExpr({v: c for v, c in self.terms.items() if c != 0.0}, self.constant)

    def value(self, assignment) -> float:
        """Evaluate under ``assignment``: a mapping Var -> number or a sequence by index."""
        total = self.constant
        if hasattr(assignment, "get") and not hasattr(assignment, "shape"):
            for v, c in self.terms.items():
                total += c * assignment[v]
        else:
            for v, c in self.terms.items():
                total += c * assignment[v.index]
        return total

    def __repr__(self) -> str:
        parts = [f"{c:+g}*{v.name}" for v, c in self.terms.items()]
        if self.constant or not parts:
            parts.append(f"{self.constant:+g}")
        return "LinExpr(" + " ".join(parts) + ")"


def quicksum(items: Iterable) -> LinExpr:
    out = LinExpr()
    for it in items:
        out._iadd(it)
    return out


def is_var(x) -> bool:
    return isinstance(x, (Var, LinExpr))


@dataclass
class Constraint:
    expr: LinExpr
    sense: str
    rhs: float
    label: str = ""

    def violation(self, assignment) -> float:
        lhs = self.expr.value(assignment)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


def _relation(lhs: LinExpr, sense: str, rhs) -> Constraint:
    expr = lhs - LinExpr.of(rhs)
    const = expr.constant
    expr.constant = 0.0
    return Constraint(expr.normalized(), sense, -const)


@dataclass
class MilpModel:
    """A minimization MILP with named variables and labelled constraints.

    ``var_tags`` and ``con_tags`` record which planning stage declared each
    variable and constraint; they drive the block statistics.
    """

    name: str = "model"
    vars: list[Var] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: LinExpr = field(default_factory=LinExpr)
    var_tags: dict[int, str] = field(default_factory=dict)
    con_tags: dict[str, str] = field(default_factory=dict)
    frozen: bool = False
    _names: dict[str, Var] = field(default_factory=dict, repr=False)
    _labels: set[str] = field(default_factory=set, repr=False)

    def _check_open(self) -> None:
        if self.frozen:
            raise FrozenModel(f"model {self.name!r} is frozen")

    def add_var(self, d: VarDef, tag: str | None = None) -> Var:
        self._check_open()
        if d.name in self._names:
            raise DuplicateName(d.name)
        lb, ub = d.lb, d.ub
        if d.kind == BINARY:
            lb, ub = max(0.0, lb), min(1.0, ub)
        if not (math.isfinite(lb) and math.isfinite(ub)):
            raise ModelError(f"variable {d.name} needs finite bounds")
        if lb > ub:
            raise ModelError(f"variable {d.name} has lb > ub")
        v = Var(len(self.vars), VarDef(d.name, d.kind, float(lb), float(ub)))
        self.vars.append(v)
        self._names[d.name] = v
        if tag is not None:
            self.var_tags[v.index] = tag
        return v

    def binary(self, name: str, tag: str | None = None) -> Var:
        return self.add_var(VarDef.binary(name), tag)

    def integer(self, name: str, lb: float, ub: float, tag: str | None = None) -> Var:
        return self.add_var(VarDef.integer(name, lb, ub), tag)

    def continuous(self, name: str, lb: float, ub: float, tag: str | None = None) -> Var:
        return self.add_var(VarDef.continuous(name, lb, ub), tag)

    def var(self, name: str) -> Var:
        return self._names[name]

    def has_var(self, name: str) -> bool:
        return name in self._names

    def add_constraint(self, con: Constraint, label: str | None = None, tag: str | None = None) -> Constraint:
        self._check_open()
        if not isinstance(con, Constraint):
            raise TypeError("expected a Constraint (build it with <=, >= or ==)")
        label = label or con.label or f"c{len(self.constraints)}"
        if label in self._labels:
            raise DuplicateName(label)
        for v in con.expr.terms:
            if v.index >= len(self.vars) or self.vars[v.index] is not v:
                raise ModelError(f"constraint {label} uses undeclared variable {v.name}")
        con = Constraint(con.expr, con.sense, con.rhs, label)
        self.constraints.append(con)
        self._labels.add(label)
        if tag is not None:
            self.con_tags[label] = tag
        return con

    def set_objective(self, expr) -> None:
        self._check_open()
        expr = LinExpr.of(expr)
        for v in expr.terms:
            if v.index >= len(self.vars) or self.vars[v.index] is not v:
                raise ModelError(f"objective uses undeclared variable {v.name}")
        self.objective = expr.normalized()

    def freeze(self) -> MilpModel:
        self.frozen = True
        return self

    @property
    def num_vars(self) -> int:
        return len(self.vars)

    @property
    def integer_vars(self) -> list[Var]:
        return [v for v in self.vars if v.is_integer]

    def __iter__(self) -> Iterator[Var]:
        return iter(self.vars)

    def max_violation(self, assignment) -> float:
        worst = 0.0
        for c in self.constraints:
            worst = max(worst, c.violation(assignment) / (1.0 + abs(c.rhs)))
        for v in self.vars:
            x = assignment[v.index] if not isinstance(assignment, dict) else assignment[v]
            worst = max(worst, v.lb - x, x - v.ub)
        return worst

    def is_feasible(self, assignment, tol: float = 1e-6, int_tol: float = 1e-6) -> bool:
        if self.max_violation(assignment) > tol:
            return False
        for v in self.vars:
            x = assignment[v.index] if not isinstance(assignment, dict) else assignment[v]
            if v.is_integer and abs(x - round(x)) > int_tol:
                return False
        return True

    def valid_lp_names(self) -> bool:
        return all(_NAME_RE.match(v.name) for v in self.vars) and all(
            _NAME_RE.match(c.label) for c in self.constraints
        )
