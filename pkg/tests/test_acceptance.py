"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (printed in the terminal summary) before
asserting, so a failing criterion still reports what it measured.
"""

import io
import random
import time
from fractions import Fraction

import pytest

from oracles import (
    ACCEPTANCE, all_dags, joint_grid, l1_micro_corpus, oracle_formula, oracle_term, random_term, sum_depth,
)
from pchsat.cli import run_cli
from pchsat import serialize
from pchsat.evaluate import Undefined, eval_formula, term_value
from pchsat.gallery import VACCINATION_DO_X1, VACCINATION_OBSERVED, vaccination_scm
from pchsat.lang import classify, parse_term
from pchsat.lang.ast import Cmp, Const, FAnd
from pchsat.model import (
    Dag, ExogenousSpec, JointTable, Mechanism, Scm, count_support_u, count_support_x, joint_distribution,
    lift_joint_to_scm, random_scm,
)
from pchsat.solve import SAT, UNKNOWN, UNSAT, SolveConfig, solve_sat, solve_validity_bounded
from pchsat.transform import (
    build_docalc_observation_rule, encode_causal_ordering, encode_dag_constraint_l3, expand_sums,
)

F = Fraction
XY = ("X", "Y")
ZXY = ("Z", "X", "Y")

# every SAT result produced in this module, as (formula, cfg, result)
SOLVED = []


def record(name, ok, detail):
    ACCEPTANCE.append((name, bool(ok), detail))
    return ok


def solve(f, cfg, validity=False):
    res = (solve_validity_bounded if validity else solve_sat)(f, cfg)
    if res.verdict == SAT:
        SOLVED.append((f, cfg, res, validity))
    return res


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


# ---------------------------------------------------------------------------


def test_c01_fig1_observational():
    jt, dt = timed(lambda: joint_distribution(vaccination_scm()))
    want = {k: F(v) for k, v in VACCINATION_OBSERVED.items()}
    rows_ok = dict(jt.entries) == want and len(want) == 7
    ok = rows_ok and jt[(0, 1, 1)] == F(4266, 10000) and dt < 1
    record("1 observational joint", ok, f"7 rows exact={rows_ok}, {dt:.3f}s")
    assert ok


def test_c02_fig1_interventional(tmp_path):
    path = tmp_path / "fig1.json"
    serialize.dump(vaccination_scm(), str(path))
    out = io.StringIO()
    code, dt = timed(lambda: run_cli(["joint", "--model", str(path), "--do", "X=1", "--marginal", "Z,Y"], out))
    got = {}
    for line in out.getvalue().splitlines()[1:]:
        z, y, q, _ = line.split()
        got[(int(z), int(y))] = F(q)
    want = {k: F(v) for k, v in VACCINATION_DO_X1.items()}
    ok = code == 0 and got == want and dt < 1
    record("2 joint --do X=1", ok, f"table {'matches' if got == want else 'differs'}, {dt:.3f}s")
    assert ok


def test_c03_fig1_queries(fig1):
    queries = {
        "P(Y=1 | X=1)": F(5106, 5580),
        "P(Y=1 | X=0)": F(442, 4420),
        "P([X=1](Y=1))": F(94, 100),
        "P([X=0](Y=1))": F(1, 10),
        "P([X=1](Y=1) | X=0 && Y=0)": F(1),
    }

    def run():
        return {q: term_value(fig1, parse_term(q, ZXY, 2)) for q in queries}

    got, dt = timed(run)
    bad = [q for q in queries if got[q] != queries[q]]
    # the prose values 0.95 and 0.0874 are not what the mechanisms give
    prose = got["P([X=1](Y=1))"] != F(95, 100) and got["P([X=0](Y=1))"] != F(874, 10000)
    ok = not bad and prose and dt < 1
    record("3 query values", ok, f"{len(queries) - len(bad)}/{len(queries)} exact, {dt:.3f}s")
    assert ok


def test_c04_semantics_oracle():
    def run():
        mismatches = n = 0
        for seed in range(520):
            rng = random.Random(seed)
            scm = random_scm(seed, rng.randint(1, 3), 2, rng.randint(1, 4), markovian=rng.random() < 0.3)
            t = random_term(rng, scm.x_vars, 2, rng.randint(1, 3), depth=2)
            a, b = term_value(scm, t), oracle_term(scm, t)
            same = isinstance(a, Undefined) if b == "undefined" else a == b
            mismatches += not same
            n += 1
        return n, mismatches

    (n, bad), dt = timed(run)
    ok = bad == 0 and n >= 500 and dt < 30
    record("4 semantics vs u-enumeration", ok, f"{n - bad}/{n} agree, {dt:.1f}s")
    assert ok


def test_c05_sum_expansion():
    def run():
        n = bad = nested = 0
        seed = 0
        while n < 220:
            rng = random.Random(10_000 + seed)
            seed += 1
            scm = random_scm(seed, rng.randint(1, 3), 2, 3)
            t = random_term(rng, scm.x_vars, 2, rng.randint(1, 3), depth=2, max_sums=3)
            depth = sum_depth(t)
            if depth == 0:
                continue
            nested += depth == 3
            before = term_value(scm, t)
            after = term_value(scm, expand_sums(Cmp(t, ">=", Const(0)), 2).left)
            same = isinstance(after, Undefined) if isinstance(before, Undefined) else before == after
            bad += not same
            n += 1
        return n, bad, nested

    (n, bad, nested), dt = timed(run)
    ok = bad == 0 and n >= 200 and nested > 0 and dt < 30
    record("5 sum expansion", ok, f"{n - bad}/{n} preserved ({nested} with 3 nested sums), {dt:.1f}s")
    assert ok


def test_c06_complete_dag():
    corpus = l1_micro_corpus(XY)
    g2 = Dag.complete(XY)

    def run():
        diff = unknown = 0
        for f in corpus:
            a = solve(f, SolveConfig(XY, 2, 4)).verdict
            b = solve(f, SolveConfig(XY, 2, 4, dag=g2)).verdict
            diff += a != b
            unknown += UNKNOWN in (a, b)
        return diff, unknown

    (diff, unknown), dt = timed(run)
    ok = diff == 0 and unknown == 0 and len(corpus) >= 100 and dt < 300
    record("6 complete-dag reduction", ok, f"{len(corpus) - diff}/{len(corpus)} verdicts equal, {dt:.1f}s")
    assert ok


def l2_formula(rng):
    while True:
        f = _l2_candidate(rng)
        if classify(f).layer == 2:
            return f


def _l2_candidate(rng):
    parts = []
    for _ in range(rng.randint(1, 2)):
        t = random_term(rng, XY, 2, 2, depth=1)
        k = Const(rng.choice((F(0), F(1), F(1, 2), F(1, 3))))
        parts.append(Cmp(t, rng.choice(("=", ">", "<=", "!=")), k))
    return parts[0] if len(parts) == 1 else FAnd(parts[0], parts[1])


def test_c07_causal_ordering():
    def run():
        diff = unknown = n = 0
        for seed in range(60):
            rng = random.Random(20_000 + seed)
            f = l2_formula(rng)
            order = rng.choice((XY, XY[::-1]))
            p = rng.randint(1, 3)
            g, control = encode_causal_ordering(f, order, 2)
            a = solve(f, SolveConfig(XY, 2, p, dag=Dag.complete(order))).verdict
            b = solve(g, SolveConfig((control,) + XY, 2, p)).verdict
            diff += a != b
            unknown += UNKNOWN in (a, b)
            n += 1
        return n, diff, unknown

    (n, diff, unknown), dt = timed(run)
    ok = diff == 0 and unknown == 0 and n >= 50 and dt < 300
    record("7 causal-ordering encoding", ok, f"{n - diff}/{n} verdicts equal, {dt:.1f}s")
    assert ok


def depends_outside(scm, g):
    """True if some mechanism's output changes with a value it reads from a non-parent in ``g``."""
    for v, mech in scm.mechanisms.items():
        allowed = set(g.parents(v))
        keep = [k for k, w in enumerate(mech.parents) if w in allowed]
        keep += list(range(len(mech.parents), len(mech.parents) + len(mech.exo_args)))
        seen = {}
        for key, out in mech.table.items():
            ctx = tuple(key[k] for k in keep)
            if seen.setdefault(ctx, out) != out:
                return True
    return False


def test_c08_dag_l3():
    vars = ("A", "B", "C")
    dags = all_dags(vars)

    def run():
        sat_fail = dep_fail = dep_total = indep_fail = 0
        for i, g in enumerate(dags):
            f = encode_dag_constraint_l3(g, 2)
            for seed in range(10):
                scm = random_scm(seed, 3, 2, 3, dag=g, markovian=seed % 2 == 1)
                sat_fail += eval_formula(scm, f).value is not True
            for j, h in enumerate(dags):
                if h is g:
                    continue
                scm = random_scm(1000 * i + j, 3, 2, 3, dag=h)
                if depends_outside(scm, g):
                    dep_total += 1
                    dep_fail += eval_formula(scm, f).value is not False
                else:
                    indep_fail += eval_formula(scm, f).value is not True
        return sat_fail, dep_fail, dep_total, indep_fail

    (sat_fail, dep_fail, dep_total, indep_fail), dt = timed(run)
    ok = len(dags) == 25 and sat_fail == 0 and dep_fail == 0 and indep_fail == 0 and dep_total > 0 and dt < 300
    record(
        "8 dag encoding in L3", ok,
        f"{250 - sat_fail}/250 respecting models satisfy, {dep_total - dep_fail}/{dep_total} violating models refute, {dt:.1f}s",
    )
    assert ok


def coin_scm(names, parents, fns, coin=F(1, 2)):
    exo = ExogenousSpec.independent({f"U_{v}": (1 - coin, coin) for v in names})
    mechs = {v: Mechanism.from_function(v, parents[v], (f"U_{v}",), 2, exo.domains, fns[v]) for v in names}
    return Scm(2, names, mechs, exo)


RULE_VARS = ("X", "Y", "Z", "W")


def test_c11_docalc_rule():
    f = build_docalc_observation_rule(*RULE_VARS)
    good = coin_scm(
        RULE_VARS, {"X": (), "Y": ("X",), "Z": (), "W": ()},
        {"X": lambda u: u, "Y": lambda x, u: x ^ u, "Z": lambda u: u, "W": lambda u: u}, F(1, 3),
    )
    bad = coin_scm(
        RULE_VARS, {"X": (), "Y": ("Z",), "Z": (), "W": ()},
        {"X": lambda u: u, "Y": lambda z, u: z, "Z": lambda u: u, "W": lambda u: u}, F(1, 3),
    )
    good_ok = eval_formula(good, f).value is True
    bad_ok = eval_formula(bad, f).value is False
    res, dt = timed(lambda: solve(f, SolveConfig(RULE_VARS, 2, 2), validity=True))
    found = res.verdict == SAT and eval_formula(res.witness, f).value is False
    ok = good_ok and bad_ok and found and dt < 600
    record(
        "11 rule-3 formula", ok,
        f"Y<-X model true={good_ok}, Y:=Z model false={bad_ok}, p=2 validity search {res.verdict} in {dt:.1f}s",
    )
    assert ok


@pytest.mark.slow
def test_c11_supplement_p4():
    """Same search one support bound up: four points are needed to make every conditional defined."""
    f = build_docalc_observation_rule(*RULE_VARS)
    res, dt = timed(lambda: solve(f, SolveConfig(RULE_VARS, 2, 4), validity=True))
    ok = res.verdict == SAT and eval_formula(res.witness, f).value is False and dt < 600
    record("11 (supplement, p=4)", ok, f"validity search {res.verdict} in {dt:.1f}s")
    assert ok


def test_c09_small_model_facts():
    def run():
        problems = []
        for f, cfg, res, _ in SOLVED:
            w = res.witness
            if not count_support_x(w) <= count_support_u(w) <= cfg.p:
                problems.append("witness")
        for seed in range(200):
            rng = random.Random(seed)
            scm = random_scm(seed, rng.randint(1, 3), 2, rng.randint(1, 5), markovian=seed % 3 == 0)
            if count_support_x(scm) > count_support_u(scm):
                problems.append("corpus")
            jt = joint_distribution(scm)
            lifted = lift_joint_to_scm(jt)
            if joint_distribution(lifted) != jt or count_support_u(lifted) != len(jt.entries):
                problems.append("lift")
        fig = vaccination_scm()
        lifted = lift_joint_to_scm(joint_distribution(fig))
        facts = (count_support_x(fig), count_support_u(fig), count_support_u(lifted))
        if facts != (7, 8, 7) or joint_distribution(lifted) != joint_distribution(fig):
            problems.append("fig1")
        return problems, facts

    (problems, facts), dt = timed(run)
    ok = not problems and dt < 10
    record(
        "9 small-model facts", ok,
        f"{len(SOLVED)} witnesses + 200 corpus models, vaccination x/u/lifted = {facts}, {dt:.2f}s",
    )
    assert ok


def test_c10_soundness():
    corpus = l1_micro_corpus(XY)

    def run():
        # grid oracle: any joint table on the grid satisfying f must be found by the solver
        grid = [JointTable(2, XY, dict(zip([(0, 0), (0, 1), (1, 0), (1, 1)], q))) for den in (4, 6) for q in joint_grid(4, den)]
        models = [lift_joint_to_scm(jt) for jt in grid]
        missed = 0
        for f in corpus:
            if any(oracle_formula(m, f) is True for m in models):
                missed += solve(f, SolveConfig(XY, 2, 4)).verdict != SAT
        unsound = sum(oracle_formula(res.witness, f) is not (not validity) for f, _, res, validity in SOLVED)
        return missed, unsound

    (missed, unsound), dt = timed(run)
    ok = missed == 0 and unsound == 0 and dt < 300
    record("10 solver soundness", ok, f"{len(SOLVED) - unsound}/{len(SOLVED)} SAT witnesses re-verify, grid-SAT missed {missed}, {dt:.1f}s")
    assert ok
