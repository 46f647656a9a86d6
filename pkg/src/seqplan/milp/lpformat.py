"""CPLEX-style LP text export and a matching reader.

The dialect is a subset: one objective, linear rows, finite bounds, the
``Generals`` and ``Binaries`` sections. No ranges, no SOS, no semi-continuous
variables. Coefficients are written with 17 significant digits so that a
round trip reproduces every double exactly.
"""

from __future__ import annotations

import re
from typing import IO

from seqplan.milp.model import BINARY, CONTINUOUS, INTEGER, Constraint, LinExpr, MilpModel, ModelError, VarDef

_MAX_LINE = 255
_SENSE_OUT = {"<=": "<=", ">=": ">=", "==": "="}


def _num(x: float) -> str:
    if x == 0:
        x = 0.0  # no negative zero
    return format(x, ".17g")


def _terms(expr: LinExpr) -> list[str]:
    out = []
    for v, c in expr.terms.items():
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        out.append(f"{sign} {_num(abs(c))} {v.name}")
    if out and out[0].startswith("+ "):
        out[0] = out[0][2:]
    return out


def _wrap(head: str, tokens: list[str]) -> list[str]:
    lines = []
    cur = head
    for tok in tokens:
        if len(cur) + 1 + len(tok) > _MAX_LINE and cur.strip():
            lines.append(cur)
            cur = "   "
        cur = f"{cur} {tok}" if cur else tok
    lines.append(cur)
    return lines


def export_lp(model: MilpModel, writer: IO[str] | None = None) -> str:
    if not model.frozen:
        raise ModelError("freeze the model before exporting")
    if not model.valid_lp_names():
        raise ModelError("variable or constraint names are not valid LP identifiers")
    lines = [f"\\ Problem: {model.name}", "Minimize"]
    obj = _terms(model.objective)
    if model.objective.constant:
        c = model.objective.constant
        obj.append(("- " if c < 0 else "+ ") + _num(abs(c)) if obj else _num(c))
    if not obj:
        obj = ["0"]
    lines += _wrap(" obj:", obj)
    lines.append("Subject To")
    for con in model.constraints:
        lhs = _terms(con.expr) or ["0"]
        rhs = con.rhs - con.expr.constant
        lines += _wrap(f" {con.label}:", lhs + [_SENSE_OUT[con.sense], _num(rhs)])
    lines.append("Bounds")
    for v in model.vars:
        if v.kind == BINARY:
            continue
        if v.lb == v.ub:
            lines.append(f" {v.name} = {_num(v.lb)}")
        else:
            lines.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    generals = [v.name for v in model.vars if v.kind == INTEGER]
    binaries = [v.name for v in model.vars if v.kind == BINARY]
    if generals:
        lines.append("Generals")
        lines += _wrap("", generals)
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if writer is not None:
        writer.write(text)
    return text


_SECTION = re.compile(
    r"^(minimize|minimum|min|subject to|such that|st|s\.t\.|bounds|bound|generals|general|gen|"
    r"integers|binaries|binary|bin|end)$",
    re.IGNORECASE,
)
_TOKEN = re.compile(r"\s*([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf(?:inity)?)?\s*([A-Za-z_][A-Za-z0-9_.]*)?")


def _parse_expr(text: str, names: dict[str, int]) -> tuple[list[tuple[str, float]], float]:
    terms: list[tuple[str, float]] = []
    const = 0.0
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ModelError(f"cannot parse expression near {text[pos:pos + 20]!r}")
        sign, num, name = m.groups()
        pos = m.end()
        if num is None and name is None:
            if sign:
                raise ModelError("dangling sign")
            continue
        coef = float(num) if num is not None else 1.0
        if sign == "-":
            coef = -coef
        if name is None:
            const += coef
        else:
            names.setdefault(name, len(names))
            terms.append((name, coef))
    return terms, const


def parse_lp(text: str) -> MilpModel:
    """Read LP text produced by :func:`export_lp` (or a compatible subset)."""
    section = None
    name = "model"
    obj_buf: list[str] = []
    con_buf: list[list[str]] = []
    bound_lines: list[str] = []
    generals: list[str] = []
    binaries: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("\\"):
            m = re.match(r"\\\s*Problem:\s*(\S+)", line)
            if m:
                name = m.group(1)
            continue
        if not line:
            continue
        if _SECTION.match(line):
            key = line.lower()
            if key.startswith("min"):
                section = "obj"
            elif key in ("subject to", "such that", "st", "s.t."):
                section = "con"
            elif key.startswith("bound"):
                section = "bounds"
            elif key.startswith("gen") or key == "integers":
                section = "gen"
            elif key.startswith("bin"):
                section = "bin"
            else:
                section = "end"
            continue
        if section == "obj":
            obj_buf.append(line)
        elif section == "con":
            if re.match(r"^[A-Za-z_][A-Za-z0-9_.]*\s*:", line) or not con_buf:
                con_buf.append([line])
            else:
                con_buf[-1].append(line)
        elif section == "bounds":
            bound_lines.append(line)
        elif section == "gen":
            generals += line.split()
        elif section == "bin":
            binaries += line.split()
    order: dict[str, int] = {}
    obj_text = " ".join(obj_buf)
    obj_text = re.sub(r"^[A-Za-z_][A-Za-z0-9_.]*\s*:", "", obj_text)
    obj_terms, obj_const = _parse_expr(obj_text, order)
    rows = []
    for chunk in con_buf:
        body = " ".join(chunk)
        m = re.match(r"^([A-Za-z_][A-Za-z0-9_.]*)\s*:(.*)$", body)
        label, body = (m.group(1), m.group(2)) if m else (None, body)
        m = re.match(r"^(.*?)(<=|>=|=<|=>|<|>|=)(.*)$", body)
        if not m:
            raise ModelError(f"constraint without relation: {body!r}")
        lhs, rel, rhs = m.groups()
        terms, const = _parse_expr(lhs, order)
        sense = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "=="}[rel]
        rows.append((label, terms, sense, float(rhs.strip()) - const))
    bounds: dict[str, list[float]] = {}
    for line in bound_lines:
        parts = re.split(r"\s*(<=|>=|=)\s*", line)
        if len(parts) == 5:
            lo, _, nm, _, hi = parts
            bounds[nm] = [float(lo), float(hi)]
        elif len(parts) == 3 and parts[1] == "=":
            bounds[parts[0]] = [float(parts[2])] * 2
        else:
            raise ModelError(f"unsupported bound line: {line!r}")
        order.setdefault(parts[2] if len(parts) == 5 else parts[0], len(order))
    for nm in generals + binaries:
        order.setdefault(nm, len(order))
    gen, bin_ = set(generals), set(binaries)
    model = MilpModel(name=name)
    vars_ = {}
    for nm in sorted(order, key=order.get):
        if nm in bin_:
            d = VarDef.binary(nm)
        else:
            lo, hi = bounds.get(nm, [0.0, float("inf")])
            d = VarDef(nm, INTEGER if nm in gen else CONTINUOUS, lo, hi)
        vars_[nm] = model.add_var(d)
    for label, terms, sense, rhs in rows:
        expr = LinExpr()
        for nm, c in terms:
            expr._iadd(vars_[nm], c)
        model.add_constraint(Constraint(expr, sense, rhs), label)
    obj = LinExpr(constant=obj_const)
    for nm, c in obj_terms:
        obj._iadd(vars_[nm], c)
    model.set_objective(obj)
    return model.freeze()

