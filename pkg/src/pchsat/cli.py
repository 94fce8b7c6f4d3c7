"""Command-line front end.

Exit status: 0 true/SAT, 1 false/UNSAT within bounds, 2 undefined/UNKNOWN,
64 usage error, 65 formula parse error, 66 invalid model file.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Sequence

from . import serialize
from .evaluate import ExpansionBudgetExceeded, InterventionalFormulaOnBn, Undefined, eval_formula, term_value
from .lang import ParseError, classify, parse_formula, parse_term, print_formula
from .model import (
    Bn, Dag, JointTable, Scm, apply_intervention, assignments, bn_joint_distribution, joint_distribution,
    lift_joint_to_scm, validate_scm,
)
from .solve.search import SAT, UNSAT, ConfigError, SolveConfig, solve_sat, solve_validity_bounded
from .solve.smtlib import MODES, ExportError, export_smtlib
from .transform import (
    TRANSFORMS, build_docalc_observation_rule, encode_causal_ordering, encode_dag_constraint_l3,
    expand_sums, reduce_to_complete_dag,
)

EXIT_TRUE, EXIT_FALSE, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_PARSE, EXIT_MODEL = 64, 65, 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")


def _load_model(path: str):
    try:
        text = _read(path)
    except UsageError as e:
        raise serialize.ModelFileError(str(e))
    try:
        obj = serialize.loads(text)
    except serialize.ModelFileError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise serialize.ModelFileError(f"{path}: {e}")
    if isinstance(obj, Scm):
        problems = validate_scm(obj)
        if problems:
            raise serialize.ModelFileError(f"{path}: {problems[0]}")
    if isinstance(obj, Bn):
        problems = obj.validate()
        if problems:
            raise serialize.ModelFileError(f"{path}: {problems[0]}")
    return obj


def _load_dag(path: str) -> Dag:
    obj = _load_model(path)
    if not isinstance(obj, Dag):
        raise serialize.ModelFileError(f"{path}: expected a dag file")
    return obj


def _names(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    if not names:
        raise UsageError("empty variable list")
    return names


def _assignments(text: str) -> list[tuple[str, int]]:
    out = []
    for part in text.split(","):
        var, sep, val = part.partition("=")
        if not sep or not val.strip().isdigit():
            raise UsageError(f"bad assignment {part!r}; expected VAR=VALUE")
        out.append((var.strip(), int(val)))
    return out


def _decimal(q: Fraction) -> str:
    return f"{float(q):.6f}"


def _print_table(jt: JointTable, out) -> None:
    out.write(" ".join(jt.x_vars) + "  probability  decimal\n")
    for x in assignments(jt.c, len(jt.x_vars)):
        p = jt[x]
        out.write(" ".join(str(v) for v in x) + f"  {p}  {_decimal(p)}\n")


def _as_scm(obj) -> Scm:
    if isinstance(obj, Scm):
        return obj
    if isinstance(obj, Bn):
        return lift_joint_to_scm(bn_joint_distribution(obj))
    if isinstance(obj, JointTable):
        return lift_joint_to_scm(obj)
    raise serialize.ModelFileError("expected an scm, bn or joint model file")


def _verdict_exit(value) -> int:
    return {True: EXIT_TRUE, False: EXIT_FALSE, None: EXIT_UNKNOWN}[value]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check(args, out) -> int:
    model = _load_model(args.model)
    scm = _as_scm(model)
    f = parse_formula(_read(args.formula), scm.x_vars, scm.c)
    if not isinstance(model, Scm) and classify(f).layer > 1:
        raise InterventionalFormulaOnBn("interventional formula on BN: the model has no mechanisms")
    verdict = eval_formula(scm, f, args.budget)
    out.write(f"{verdict}\n")
    if verdict.evidence is not None:
        out.write(f"{verdict.evidence}\n")
    return _verdict_exit(verdict.value)


def cmd_eval(args, out) -> int:
    model = _load_model(args.model)
    scm = _as_scm(model)
    t = parse_term(_read(args.term), scm.x_vars, scm.c)
    if not isinstance(model, Scm) and classify(_as_formula(t)).layer > 1:
        raise InterventionalFormulaOnBn("interventional term on BN: the model has no mechanisms")
    value = term_value(scm, t, args.budget)
    if isinstance(value, Undefined):
        out.write(f"{value}\n")
        return EXIT_UNKNOWN
    out.write(f"{value}  {_decimal(value)}\n")
    return EXIT_TRUE


def _as_formula(t):
    from .lang.ast import Cmp, Const

    return Cmp(t, ">=", Const(0))


def _solve_config(args) -> SolveConfig:
    vars = _names(args.vars)
    dag = _load_dag(args.dag) if args.dag else None
    ordering = _names(args.ordering) if args.ordering else None
    return SolveConfig(
        vars, args.c, args.p, dag=dag, ordering=ordering, backend=args.backend,
        time_budget=args.time_budget, strict_markovian=args.markovian, jobs=args.jobs,
        expansion_budget=args.budget,
    )


def _report(result, args, out, valid_mode: bool) -> int:
    label = result.verdict
    if valid_mode:
        label = {SAT: "COUNTEREXAMPLE", UNSAT: "VALID_WITHIN_BOUNDS"}.get(label, label)
    out.write(label + (f": {result.reason}" if result.reason else "") + "\n")
    if result.witness is not None:
        text = serialize.dumps(result.witness)
        if args.witness:
            with open(args.witness, "w", encoding="utf-8") as fh:
                fh.write(text)
            out.write(f"witness written to {args.witness}\n")
        else:
            out.write(text)
    if args.stats:
        out.write(json.dumps(result.stats, sort_keys=True) + "\n")
    if result.verdict == SAT:
        return EXIT_FALSE if valid_mode else EXIT_TRUE
    if result.verdict == UNSAT:
        return EXIT_TRUE if valid_mode else EXIT_FALSE
    return EXIT_UNKNOWN


def cmd_solve(args, out) -> int:
    cfg = _solve_config(args)
    f = parse_formula(_read(args.formula), cfg.vars, cfg.c)
    return _report(solve_sat(f, cfg), args, out, False)


def cmd_validity(args, out) -> int:
    cfg = _solve_config(args)
    f = parse_formula(_read(args.formula), cfg.vars, cfg.c)
    return _report(solve_validity_bounded(f, cfg), args, out, True)


def cmd_transform(args, out) -> int:
    name = args.name
    vars = _names(args.vars) if args.vars else None
    if name == "dag-l3":
        if not args.dag:
            raise UsageError("dag-l3 needs --dag")
        out.write(print_formula(encode_dag_constraint_l3(_load_dag(args.dag), args.c)) + "\n")
        return EXIT_TRUE
    if name == "docalc-rule3":
        if not args.rule_vars:
            raise UsageError("docalc-rule3 needs --rule-vars X,Y,Z,W")
        names = _names(args.rule_vars)
        if len(names) != 4:
            raise UsageError("--rule-vars takes exactly four names")
        out.write(print_formula(build_docalc_observation_rule(*names, args.c)) + "\n")
        return EXIT_TRUE
    if not args.formula or vars is None:
        raise UsageError(f"{name} needs --formula and --vars")
    f = parse_formula(_read(args.formula), vars, args.c)
    if name == "expand-sums":
        out.write(print_formula(expand_sums(f, args.c, args.budget)) + "\n")
    elif name == "complete-dag":
        g, dag = reduce_to_complete_dag(f, vars)
        out.write(print_formula(g) + "\n")
        out.write(serialize.dumps(dag))
    elif name == "causal-ordering":
        if not args.ordering:
            raise UsageError("causal-ordering needs --ordering")
        g, control = encode_causal_ordering(f, _names(args.ordering), args.c)
        out.write(print_formula(g) + "\n")
        sys.stderr.write(f"control variable: {control}\n")
    return EXIT_TRUE


def cmd_export(args, out) -> int:
    cfg = SolveConfig(_names(args.vars), args.c, args.p or 1, dag=_load_dag(args.dag) if args.dag else None,
                      ordering=_names(args.ordering) if args.ordering else None, expansion_budget=args.budget)
    if args.mode == "per-structure" and args.p is None:
        raise UsageError("per-structure export needs --p")
    f = parse_formula(_read(args.formula), cfg.vars, cfg.c)
    out.write(export_smtlib(f, cfg, args.mode))
    return EXIT_TRUE


def cmd_info(args, out) -> int:
    f = parse_formula(_read(args.formula), _names(args.vars), args.c)
    cl = classify(f)
    out.write(f"layer: {cl.layer}\narithmetic: {cl.arithmetic}\nsums: {str(cl.uses_sum).lower()}\n"
              f"conditionals: {str(cl.uses_cond).lower()}\nlabel: {cl}\n")
    return EXIT_TRUE


def cmd_joint(args, out) -> int:
    model = _load_model(args.model)
    if args.do:
        if not isinstance(model, Scm):
            raise InterventionalFormulaOnBn("interventions need an scm model file")
        try:
            model = apply_intervention(model, _assignments(args.do))
        except ValueError as e:
            raise UsageError(str(e))
    if isinstance(model, Scm):
        jt = joint_distribution(model)
    elif isinstance(model, Bn):
        jt = bn_joint_distribution(model)
    elif isinstance(model, JointTable):
        jt = model
    else:
        raise serialize.ModelFileError("expected an scm, bn or joint model file")
    if args.marginal:
        keep = _names(args.marginal)
        unknown = set(keep) - set(jt.x_vars)
        if unknown:
            raise UsageError(f"unknown variables in --marginal: {sorted(unknown)}")
        jt = jt.marginal(keep)
    _print_table(jt, out)
    return EXIT_TRUE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pchsat", description="Model checking and bounded satisfiability for causal probability formulas.")
    ap.add_argument("--seed", type=int, default=0, help="seed for any randomised step (all commands are deterministic)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def budget(p):
        p.add_argument("--budget", type=int, default=10**6, help="maximum number of summands after expanding sums")

    p = sub.add_parser("check", help="evaluate a formula on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True, help="formula file, '-' for stdin")
    budget(p)

    p = sub.add_parser("eval", help="evaluate a term on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--term", required=True, help="term file, '-' for stdin")
    budget(p)

    for name, text in (("solve", "bounded satisfiability"), ("validity", "bounded validity (counterexample search)")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--formula", required=True)
        p.add_argument("--vars", required=True, help="comma-separated endogenous variables")
        p.add_argument("--c", type=int, default=2, help="domain size")
        p.add_argument("--p", type=int, required=True, help="exogenous support bound")
        p.add_argument("--dag", help="dag file constraining the parent sets")
        p.add_argument("--ordering", help="comma-separated causal order")
        p.add_argument("--backend", default="auto", choices=["auto", "linear-exact", "poly-naive", "poly-export"])
        p.add_argument("--markovian", action="store_true", help="search Markovian models only (incomplete)")
        p.add_argument("--time-budget", type=float, default=None, help="seconds")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--witness", help="write the witness model here instead of stdout")
        p.add_argument("--stats", action="store_true", help="print solver statistics as JSON")
        budget(p)

    p = sub.add_parser("transform", help="apply a formula transformation")
    p.add_argument("--name", required=True, choices=TRANSFORMS)
    p.add_argument("--formula")
    p.add_argument("--vars")
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--ordering")
    p.add_argument("--dag")
    p.add_argument("--rule-vars", help="X,Y,Z,W for docalc-rule3")
    budget(p)

    p = sub.add_parser("export", help="write SMT-LIB 2")
    p.add_argument("--mode", default="joint-table", choices=MODES)
    p.add_argument("--formula", required=True)
    p.add_argument("--vars", required=True)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--p", type=int)
    p.add_argument("--dag")
    p.add_argument("--ordering")
    budget(p)

    p = sub.add_parser("info", help="classify a formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--vars", required=True)
    p.add_argument("--c", type=int, default=2)

    p = sub.add_parser("joint", help="print the joint distribution of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--do", help="intervention, e.g. X=1,Z=0")
    p.add_argument("--marginal", help="keep only these variables, in this order")
    return ap


COMMANDS = {
    "check": cmd_check, "eval": cmd_eval, "solve": cmd_solve, "validity": cmd_validity,
    "transform": cmd_transform, "export": cmd_export, "info": cmd_info, "joint": cmd_joint,
}


def run_cli(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    random.seed(args.seed)
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as e:
        sys.stderr.write(f"parse error: {e}\n")
        return EXIT_PARSE
    except serialize.ModelFileError as e:
        sys.stderr.write(f"invalid model: {e}\n")
        return EXIT_MODEL
    except ExpansionBudgetExceeded as e:
        sys.stderr.write(f"undecided: {e}\n")
        return EXIT_UNKNOWN
    except (UsageError, ConfigError, ExportError, InterventionalFormulaOnBn) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
