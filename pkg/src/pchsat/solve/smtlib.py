"""SMT-LIB 2 export and an optional external-solver backend.

Naming is stable across runs:

* joint-table mode declares ``|p[X=0,Y=1]|`` for each joint assignment;
* per-structure mode declares ``|q[j]|`` for the probability of support row ``j``;
* the solver backend declares ``|w[j]|`` for the weight of signature ``j``;
* every conditional probability gets a ratio unknown ``|r[k]|``, tied to
  its numerator ``N`` and denominator ``D`` by ``D > 0`` and ``r * D = N``
  inside the literal that uses it, so an undefined conditional never makes a
  literal true.
"""

from __future__ import annotations

import re
import shutil
import subprocess
import time
from fractions import Fraction
from typing import Callable, Sequence

from ..lang.analysis import classify
from ..model import JointTable, assignments
from ..transform import expand_sums
from .qexpr import BAnd, BOr, Lin, Literal, QAdd, QMul, QScale, Ratio, formula_to_boolean
from .structures import (
    default_model_class, enumerate_model_structures, event_holds, structure_to_constraints,
)

MODES = ("joint-table", "per-structure")


class ExportError(ValueError):
    pass


def smt_number(v: Fraction) -> str:
    v = Fraction(v)
    mag = abs(v)
    text = f"{mag.numerator}.0" if mag.denominator == 1 else f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return f"(- {text})" if v < 0 else text


class _Writer:
    def __init__(self, name: Callable[[object], str]):
        self.name = name
        self.ratios: dict[Ratio, str] = {}
        self.nonlinear = False

    def lin(self, lin: Lin) -> str:
        parts = []
        for k, a in lin.coeffs:
            parts.append(self.name(k) if a == 1 else f"(* {smt_number(a)} {self.name(k)})")
        if lin.const != 0 or not parts:
            parts.append(smt_number(lin.const))
        return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"

    def expr(self, q, guards: list[str]) -> str:
        if isinstance(q, Lin):
            return self.lin(q)
        if isinstance(q, Ratio):
            self.nonlinear = True
            if q not in self.ratios:
                self.ratios[q] = f"|r[{len(self.ratios)}]|"
            r = self.ratios[q]
            den = self.lin(q.den)
            guards.append(f"(> {den} 0.0)")
            guards.append(f"(= (* {r} {den}) {self.lin(q.num)})")
            return r
        if isinstance(q, QScale):
            return f"(* {smt_number(q.factor)} {self.expr(q.arg, guards)})"
        if isinstance(q, QMul):
            self.nonlinear = True
            return f"(* {self.expr(q.left, guards)} {self.expr(q.right, guards)})"
        if isinstance(q, QAdd):
            return f"(+ {self.expr(q.left, guards)} {self.expr(q.right, guards)})"
        raise TypeError(q)

    def boolean(self, node) -> str:
        if isinstance(node, Literal):
            guards: list[str] = []
            body = self.expr(node.expr, guards)
            atom = f"({node.rel} {body} 0.0)"
            guards = list(dict.fromkeys(guards))
            return atom if not guards else "(and " + " ".join(guards + [atom]) + ")"
        if isinstance(node, BAnd):
            if not node.parts:
                return "true"
            return "(and " + " ".join(self.boolean(p) for p in node.parts) + ")" if len(node.parts) > 1 else self.boolean(node.parts[0])
        if isinstance(node, BOr):
            if not node.parts:
                return "false"
            return "(or " + " ".join(self.boolean(p) for p in node.parts) + ")" if len(node.parts) > 1 else self.boolean(node.parts[0])
        raise TypeError(node)


def _problem(unknowns: Sequence[str], tree, name, strict_positive: bool, extra: Sequence[str] = (), query: bool = False) -> str:
    w = _Writer(name)
    body = w.boolean(tree)
    logic = "QF_NRA" if w.nonlinear else "QF_LRA"
    lines = [f"(set-logic {logic})"]
    lines += [f"(declare-fun {u} () Real)" for u in unknowns]
    lines += [f"(declare-fun {r} () Real)" for r in w.ratios.values()]
    rel = ">" if strict_positive else ">="
    lines.append("(assert (and " + " ".join(f"({rel} {u} 0.0)" for u in unknowns) + "))" if len(unknowns) > 1
                 else f"(assert ({rel} {unknowns[0]} 0.0))")
    total = unknowns[0] if len(unknowns) == 1 else "(+ " + " ".join(unknowns) + ")"
    lines.append(f"(assert (= {total} 1.0))")
    lines += list(extra)
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    if query:
        lines.append("(get-value (" + " ".join(unknowns) + "))")
    return "\n".join(lines) + "\n"


def joint_unknown(vars: Sequence[str], x: Sequence[int]) -> str:
    return "|p[" + ",".join(f"{v}={val}" for v, val in zip(vars, x)) + "]|"


def export_smtlib(f, cfg, mode: str = "joint-table", query: bool = False) -> str:
    if mode not in MODES:
        raise ExportError(f"unknown mode {mode!r}")
    cfg.validate()
    if mode == "joint-table":
        if classify(f).layer != 1:
            raise ExportError("joint-table export needs an observational (layer 1) formula")
        g = expand_sums(f, cfg.c, cfg.expansion_budget)
        joint = list(assignments(cfg.c, len(cfg.vars)))
        index = {v: k for k, v in enumerate(cfg.vars)}

        def leaf(e):
            return Lin.make({j: 1 for j, x in enumerate(joint) if event_holds(e, {(): x}, index)})

        tree = formula_to_boolean(g, leaf)
        names = [joint_unknown(cfg.vars, x) for x in joint]
        return _problem(names, tree, lambda j: names[j], False, query=query)

    chunks = []
    for s in enumerate_model_structures(default_model_class(cfg), cfg.c, cfg.p, cfg.max_structures):
        tree = structure_to_constraints(f, s, cfg)
        names = [f"|q[{j}]|" for j in range(len(s.rows))]
        header = f"; structure {len(chunks)}: rows " + "; ".join(
            " ".join(f"{v}:{''.join(map(str, t))}" for v, t in zip(s.model_class.vars, row)) for row in s.rows
        )
        chunks.append(header + "\n" + _problem(names, tree, lambda j, names=names: names[j], True, query=query))
    return "(reset)\n".join(chunks)


# ---------------------------------------------------------------------------
# reading solver output
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|\|[^|]*\||[^\s()]+")


def _sexpr(text: str):
    tokens = _TOKEN.findall(text)
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            out = []
            while tokens[pos] != ")":
                out.append(read())
            pos += 1
            return out
        return tok

    items = []
    while pos < len(tokens):
        items.append(read())
    return items


def smt_value(node) -> Fraction | None:
    """Rational value of a numeral s-expression, or None for algebraic numbers."""
    if isinstance(node, str):
        try:
            return Fraction(node)
        except ValueError:
            return None
    if not node:
        return None
    head, *args = node
    vals = [smt_value(a) for a in args]
    if any(v is None for v in vals):
        return None
    if head == "-" and len(vals) == 1:
        return -vals[0]
    if head == "-":
        return vals[0] - sum(vals[1:])
    if head == "/" and len(vals) == 2 and vals[1] != 0:
        return vals[0] / vals[1]
    if head == "+":
        return sum(vals, Fraction(0))
    if head == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    return None


def run_z3(text: str, timeout: float | None = None) -> tuple[str, dict[str, Fraction | None]]:
    """Status (``sat``/``unsat``/``unknown``) and the ``get-value`` assignment."""
    exe = shutil.which("z3")
    if exe is None:
        raise FileNotFoundError("z3 executable not found on PATH")
    args = [exe, "-in", "-smt2"]
    if timeout:
        args.append(f"-T:{max(1, int(timeout))}")
    proc = subprocess.run(args, input="(set-option :pp.decimal false)\n" + text, capture_output=True, text=True)
    items = _sexpr(proc.stdout)
    if not items:
        return "unknown", {}
    status = items[0] if isinstance(items[0], str) else "unknown"
    values: dict[str, Fraction | None] = {}
    if status == "sat":
        for item in items[1:]:
            if isinstance(item, list):
                for pair in item:
                    if isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str):
                        values[pair[0]] = smt_value(pair[1])
    return status, values


def joint_from_model(vars: Sequence[str], c: int, values: dict) -> JointTable:
    entries = {}
    for x in assignments(c, len(vars)):
        v = values.get(joint_unknown(vars, x))
        if v:
            entries[x] = v
    return JointTable(c, tuple(vars), entries)


def solve_with_z3(f, tree, events, cfg, layer: int, start: float):
    """Complete check per model class by an external solver over signature weights."""
    from .search import SAT, UNKNOWN, UNSAT, SatResult, _finish, build_witness, verify_witness
    from .structures import StructureLimitExceeded, signature_set

    stats: dict = {"classes": 0}
    if shutil.which("z3") is None:
        return SatResult(UNKNOWN, reason="z3 executable not found", stats=_finish(stats, start))
    undecided = None
    searched: list[frozenset] = []
    for mc in cfg.model_classes(layer):
        try:
            sigset = signature_set(mc, cfg.c, events, cfg.max_structures)
        except StructureLimitExceeded as e:
            return SatResult(UNKNOWN, reason=str(e), stats=_finish(stats, start))
        sset = frozenset(sigset.signatures)
        if any(sset <= prev for prev in searched):
            continue
        searched.append(sset)
        stats["classes"] += 1
        sigs = sigset.signatures
        names = [f"|w[{j}]|" for j in range(len(sigs))]

        def to_sigs(node):
            if isinstance(node, Literal):
                return Literal(_map_expr(node.expr, sigs), node.rel)
            return type(node)(tuple(to_sigs(p) for p in node.parts))

        card = "(assert (<= (+ " + " ".join(f"(ite (> {n} 0.0) 1.0 0.0)" for n in names) + f" 0.0) {cfg.p}.0))"
        text = _problem(names, to_sigs(tree), lambda j: names[j], False, [card], query=True)
        remaining = None
        if cfg.time_budget:
            remaining = cfg.time_budget - (time.monotonic() - start)
            if remaining <= 0:
                return SatResult(UNKNOWN, reason="time budget exhausted", stats=_finish(stats, start))
        status, values = run_z3(text, remaining)
        if status == "sat":
            weights = [values.get(n) for n in names]
            if any(w is None for w in weights):
                undecided = undecided or "external solver returned an irrational model"
                continue
            chosen = [(j, w) for j, w in enumerate(weights) if w > 0]
            rows = [sigset.representatives[j] for j, _ in chosen]
            witness = build_witness(mc, cfg.c, rows, [w for _, w in chosen])
            verify_witness(f, witness, cfg)
            return SatResult(SAT, witness, None, _finish(stats, start))
        if status != "unsat":
            undecided = undecided or f"external solver answered {status}"
    if undecided:
        return SatResult(UNKNOWN, reason=undecided, stats=_finish(stats, start))
    return SatResult(UNSAT, stats=_finish(stats, start))


def _map_lin(lin: Lin, sigs) -> Lin:
    out: dict[int, Fraction] = {}
    for j, sig in enumerate(sigs):
        a = sum((coef for e, coef in lin.coeffs if sig[e]), Fraction(0))
        if a:
            out[j] = a
    return Lin.make(out, lin.const)


def _map_expr(q, sigs):
    if isinstance(q, Lin):
        return _map_lin(q, sigs)
    if isinstance(q, Ratio):
        return Ratio(_map_lin(q.num, sigs), _map_lin(q.den, sigs))
    if isinstance(q, QScale):
        return QScale(q.factor, _map_expr(q.arg, sigs))
    return type(q)(_map_expr(q.left, sigs), _map_expr(q.right, sigs))
