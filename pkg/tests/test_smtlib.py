import random
import re
import shutil

import pytest
from hypothesis import given, settings, strategies as st

from oracles import random_term
from pchsat.evaluate import eval_formula
from pchsat.lang import parse_formula
from pchsat.lang.ast import Cmp, Const
from pchsat.model import lift_joint_to_scm
from pchsat.solve import ExportError, SolveConfig, export_smtlib
from pchsat.solve.smtlib import joint_from_model, run_z3, smt_number

needs_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not installed")


def holds_on(jt, f):
    return eval_formula(lift_joint_to_scm(jt), f).is_true


def export(text, vars, **kw):
    cfg = SolveConfig(vars, 2, kw.pop("p", 2))
    return export_smtlib(parse_formula(text, vars, 2), cfg, **kw)


def asserts(text):
    return [line for line in text.splitlines() if line.startswith("(assert")]


def test_square_shape():
    text = export("P(X=1) * P(X=1) = 1/4", ("X",))
    assert re.findall(r"declare-fun (\S+)", text) == ["|p[X=0]|", "|p[X=1]|"]
    body = asserts(text)
    # non-negativity, normalisation, the formula itself
    assert len(body) == 3
    assert body[1] == "(assert (= (+ |p[X=0]| |p[X=1]|) 1.0))"
    assert "(* |p[X=1]| |p[X=1]|)" in body[2]
    assert text.startswith("(set-logic QF_NRA)")


def test_linear_logic():
    assert export("P(X=1) + P(X=0 && Y=1) >= 1/3", ("X", "Y")).startswith("(set-logic QF_LRA)")


def test_parentheses_balance():
    text = export("P(Y=1 | X=1) = 1/2 OR NOT P(X=0) > 1/3", ("X", "Y"))
    assert text.count("(") == text.count(")")
    assert "|r[0]|" in text


def test_joint_mode_rejects_interventions():
    with pytest.raises(ExportError):
        export("P([X=1](Y=1)) = 1", ("X", "Y"))
    with pytest.raises(ExportError):
        export("P(X=1) = 1", ("X",), mode="table")


def test_per_structure_blocks():
    text = export("P(X=1) = 1", ("X",), mode="per-structure")
    blocks = text.split("(reset)\n")
    assert len(blocks) == 3
    assert all(b.count("(check-sat)") == 1 for b in blocks)
    assert "(assert false)" in blocks[0]


def test_numbers():
    from fractions import Fraction

    assert smt_number(Fraction(-3, 4)) == "(- (/ 3.0 4.0))"
    assert smt_number(Fraction(2)) == "2.0"


def test_deterministic():
    a = export("P(X=1) * P(Y=0) > 1/8", ("X", "Y"))
    assert a == export("P(X=1) * P(Y=0) > 1/8", ("X", "Y"))


@needs_z3
def test_square_round_trip():
    f = parse_formula("P(X=1) * P(X=1) = 1/4", ("X",), 2)
    status, values = run_z3(export_smtlib(f, SolveConfig(("X",), 2, 2), query=True))
    assert status == "sat"
    jt = joint_from_model(("X",), 2, values)
    assert holds_on(jt, f)


@needs_z3
def test_unsat_product():
    status, _ = run_z3(export("P(X=1) * P(X=0) > 1/4", ("X",)))
    assert status == "unsat"


@needs_z3
def test_per_structure_with_z3():
    text = export("P(X=1) = 1/3", ("X",), mode="per-structure")
    statuses = [run_z3(b)[0] for b in text.split("(reset)\n")]
    assert statuses == ["unsat", "sat", "unsat"]


@needs_z3
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_random_round_trip(seed):
    rng = random.Random(seed)
    vars = ("X", "Y")
    t = random_term(rng, vars, 2, 1, depth=2)
    f = Cmp(t, rng.choice(("=", ">", "<=", "!=")), Const(rng.choice((0, 1, 0.25, 0.5))))
    status, values = run_z3(export_smtlib(f, SolveConfig(vars, 2, 1), query=True), timeout=20)
    if status == "sat":
        jt = joint_from_model(vars, 2, values)
        assert sum(jt.entries.values()) == 1
        assert holds_on(jt, f)
