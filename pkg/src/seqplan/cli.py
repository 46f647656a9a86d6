"""Command-line front end.

Subcommands: ``generate``, ``solve``, ``pos``, ``stats`` and ``sweep``.
Exit codes: 0 success, 1 infeasible or stopped by a limit, 2 usage or input error.
Set ``TRANSIT_LOG`` (e.g. ``INFO``) for log output on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from seqplan.framework import ProcessError
from seqplan.integrated import (
    APPROACHES,
    Lambdas,
    Network,
    approach_model,
    pareto_sweep,
    pos_table,
    run_approach,
    summary_csv,
)
from seqplan.milp import SolveOptions, export_lp, model_stats, sparsity_pattern
from seqplan.ptn import InstanceError, load_instance, make_random, make_small, make_toy, save_instance

EXIT_OK, EXIT_SOLVE, EXIT_USAGE = 0, 1, 2
GENERATORS = {"small": make_small, "toy": make_toy}
log = logging.getLogger("seqplan")


class UsageError(Exception):
    pass


def _instance_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", metavar="DIR", help="instance directory with the CSV files")
    src.add_argument("--generate", metavar="NAME", help="built-in instance: small, toy or random")
    p.add_argument("--seed", type=int, default=0, help="seed for --generate random")


def _lambda_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda1", type=float, help="weight of line costs in lintimpass")
    p.add_argument("--lambda3", type=float, help="weight of passenger travel time")
    p.add_argument("--lambda4", type=float, help="weight of vehicle costs")


def _limit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, help="seconds per MILP solve")
    p.add_argument("--gap-tol", type=float, default=0.0, help="relative MIP gap at which a solve may stop")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqplan", description="Sequential and integrated public transport planning.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write a built-in instance as CSV files")
    g.add_argument("name", choices=[*GENERATORS, "random"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, metavar="DIR")

    s = sub.add_parser("solve", help="run one approach and write its report")
    _instance_args(s)
    s.add_argument("--approach", choices=list(APPROACHES), default="seq")
    _lambda_args(s)
    _limit_args(s)
    s.add_argument("--export-lp", metavar="PATH", help="also write the approach's joint model in LP format")
    s.add_argument("--out", required=True, metavar="DIR")

    q = sub.add_parser("pos", help="price of sequentiality of every approach")
    _instance_args(q)
    _lambda_args(q)
    _limit_args(q)
    q.add_argument("--out", metavar="DIR", help="write pos.csv here (default: stdout only)")

    t = sub.add_parser("stats", help="variable and constraint counts per stage block")
    _instance_args(t)
    t.add_argument("--approach", choices=list(APPROACHES), default="full")
    _lambda_args(t)
    _limit_args(t)
    t.add_argument("--sparsity", metavar="PATH", help="write nonzero (row, column) pairs as CSV")
    t.add_argument("--out", metavar="DIR")

    w = sub.add_parser("sweep", help="weighted-sum sweep over several lambda settings")
    _instance_args(w)
    w.add_argument("--lambdas", required=True, help='settings "l1,l3,l4;l1,l3,l4;..."')
    w.add_argument("--approach", choices=list(APPROACHES), default="full")
    _limit_args(w)
    w.add_argument("--out", metavar="DIR")
    return ap


def _load(args):
    if args.instance:
        return load_instance(args.instance)
    if args.generate == "random":
        return make_random(args.seed)
    if args.generate not in GENERATORS:
        raise UsageError(f"unknown generator {args.generate!r}; choose small, toy or random")
    return GENERATORS[args.generate]()


def _lambdas(args, inst) -> Lambdas:
    base = Lambdas.of(inst)
    l1 = base.lambda1 if args.lambda1 is None else args.lambda1
    l3 = base.lambda3 if args.lambda3 is None else args.lambda3
    l4 = base.lambda4 if args.lambda4 is None else args.lambda4
    try:
        return Lambdas(l1, l3, l4)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _opts(args) -> SolveOptions:
    return SolveOptions(backend="highs", time_limit=args.time_limit, rel_gap=args.gap_tol)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_generate(args) -> int:
    inst = make_random(args.seed) if args.name == "random" else GENERATORS[args.name]()
    for f in save_instance(inst, args.out):
        print(f)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args)
    lam = _lambdas(args, inst)
    net = Network.of(inst)
    opts = _opts(args)
    if args.export_lp:
        _write(Path(args.export_lp), export_lp(approach_model(net, args.approach, lam, opts)))
    rep = run_approach(net, args.approach, lam, opts)
    for f in rep.write(args.out, net):
        print(f)
    return EXIT_OK if rep.optimal else EXIT_SOLVE


def cmd_pos(args) -> int:
    inst = _load(args)
    reports = pos_table(Network.of(inst), _lambdas(args, inst), opts=_opts(args))
    text = summary_csv(reports)
    sys.stdout.write(text)
    if args.out:
        _write(Path(args.out) / "pos.csv", text)
    return EXIT_OK if all(r.optimal for r in reports) else EXIT_SOLVE


def cmd_stats(args) -> int:
    inst = _load(args)
    model = approach_model(Network.of(inst), args.approach, _lambdas(args, inst), _opts(args))
    st = model_stats(model, ["lin", "pass", "tim", "veh"])
    rows = ["block;variables;constraints"] + [f"{b.tag};{b.vars};{b.cons}" for b in st.blocks]
    rows.append(f"total;{st.total_vars};{st.total_cons}")
    text = "\n".join(rows) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(Path(args.out) / "stats.csv", text)
        _write(Path(args.out) / "stats.json", st.to_json() + "\n")
    if args.sparsity:
        _write(Path(args.sparsity), "row;column\n" + "".join(f"{r};{c}\n" for r, c in sparsity_pattern(model)))
    return EXIT_OK


def _parse_lambdas(spec: str) -> list[Lambdas]:
    out = []
    for part in spec.split(";"):
        if not part.strip():
            continue
        try:
            l1, l3, l4 = (float(x) for x in part.split(","))
            out.append(Lambdas(l1, l3, l4))
        except ValueError as exc:
            raise UsageError(f"bad lambda setting {part!r}: {exc}") from None
    if not out:
        raise UsageError("no lambda settings given")
    return out


def cmd_sweep(args) -> int:
    inst = _load(args)
    points = pareto_sweep(Network.of(inst), _parse_lambdas(args.lambdas), (args.approach,), _opts(args))
    text = summary_csv([p.report for p in points])
    lines = text.splitlines()
    lines[0] += ";dominated"
    for i, p in enumerate(points, start=1):
        lines[i] += f";{int(p.dominated)}"
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(Path(args.out) / "sweep.csv", text)
    return EXIT_OK if all(p.report.optimal for p in points) else EXIT_SOLVE


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "pos": cmd_pos, "stats": cmd_stats, "sweep": cmd_sweep}


def _error(kind: str, exc: Exception, code: int) -> int:
    print(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True))
    return code


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("TRANSIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _error("usage", exc, EXIT_USAGE)
    except InstanceError as exc:
        return _error("instance", exc, EXIT_USAGE)
    except ProcessError as exc:
        return _error("solve", exc, EXIT_SOLVE)
    except OSError as exc:
        return _error("io", exc, EXIT_SOLVE)


if __name__ == "__main__":
    sys.exit(main())
