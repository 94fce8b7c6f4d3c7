import io
import json
from fractions import Fraction

import pytest

from pchsat import serialize
from pchsat.cli import run_cli
from pchsat.evaluate import eval_formula, term_value
from pchsat.gallery import vaccination_observed, vaccination_scm
from pchsat.lang import parse_formula, parse_term, print_formula
from pchsat.model import bn_from_joint
from pchsat.solve import SolveConfig, export_smtlib, solve_sat
from pchsat.transform import expand_sums

ZXY = ("Z", "X", "Y")


def cli(*argv):
    out = io.StringIO()
    code = run_cli([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path

    serialize.dump(vaccination_scm(), str(tmp_path / "fig1.json"))
    serialize.dump(bn_from_joint(vaccination_observed()), str(tmp_path / "fig1_bn.json"))
    write.dir = tmp_path
    return write


class TestCheckEval:
    def test_interventional_query_true(self, files):
        f = files("f.txt", "P([X=1](Y=1)) = 94/100")
        assert cli("check", "--model", files.dir / "fig1.json", "--formula", f)[0] == 0

    def test_false_and_undefined(self, files):
        assert cli("check", "--model", files.dir / "fig1.json", "--formula", files("f.txt", "P(X=1) = 1"))[0] == 1
        g = files("g.txt", "P(Y=1 | X=1 && Z=1 && X=0) = 1")
        assert cli("check", "--model", files.dir / "fig1.json", "--formula", g)[0] == 2

    def test_bn(self, files):
        f = files("f.txt", "P(Y=1 && X=1) = 5106/10000")
        assert cli("check", "--model", files.dir / "fig1_bn.json", "--formula", f)[0] == 0
        g = files("g.txt", "P([X=1](Y=1)) = 94/100")
        assert cli("check", "--model", files.dir / "fig1_bn.json", "--formula", g)[0] == 64

    def test_eval_prints_rational_and_decimal(self, files):
        t = files("t.txt", "P(Y=1 | X=1)")
        code, text = cli("eval", "--model", files.dir / "fig1.json", "--term", t)
        assert code == 0
        assert text.split() == ["851/930", "0.915054"]
        assert Fraction(text.split()[0]) == term_value(vaccination_scm(), parse_term("P(Y=1 | X=1)", ZXY, 2))

    def test_stdin(self, files, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("P(X=1) = 558/1000"))
        assert cli("check", "--model", files.dir / "fig1.json", "--formula", "-")[0] == 0


class TestExitCodes:
    def test_parse_error(self, files):
        assert cli("check", "--model", files.dir / "fig1.json", "--formula", files("f.txt", "P(X=1 ="))[0] == 65

    def test_bad_model(self, files):
        assert cli("check", "--model", files("m.json", "{not json"), "--formula", files("f.txt", "P(X=1)=1"))[0] == 66
        bad = files("m2.json", json.dumps({"kind": "scm", "c": 2}))
        assert cli("joint", "--model", bad)[0] == 66
        assert cli("joint", "--model", files.dir / "missing.json")[0] == 66

    def test_usage(self, files):
        assert cli()[0] == 64
        assert cli("frobnicate")[0] == 64
        f = files("f.txt", "P(X=1) = 1")
        assert cli("solve", "--formula", f, "--vars", "X")[0] == 64
        assert cli("solve", "--formula", f, "--vars", "X", "--p", "0")[0] == 64
        assert cli("transform", "--name", "dag-l3")[0] == 64
        assert cli("joint", "--model", files.dir / "fig1.json", "--do", "Q=1")[0] == 64

    def test_budget_gives_unknown(self, files):
        f = files("f.txt", "sum a . sum b . P(X=a && Y=b) = 1")
        assert cli("check", "--model", files.dir / "fig1.json", "--formula", f, "--budget", "3")[0] == 2


class TestJoint:
    def test_do_x1_marginal(self, files):
        code, text = cli("joint", "--model", files.dir / "fig1.json", "--do", "X=1", "--marginal", "Z,Y")
        assert code == 0
        rows = [line.split() for line in text.splitlines()[1:]]
        assert rows == [
            ["0", "0", "3/50", "0.060000"],
            ["0", "1", "27/50", "0.540000"],
            ["1", "0", "0", "0.000000"],
            ["1", "1", "2/5", "0.400000"],
        ]

    def test_observational_matches_library(self, files):
        _, text = cli("joint", "--model", files.dir / "fig1.json")
        jt = vaccination_observed()
        rows = [line.split() for line in text.splitlines()[1:]]
        assert len(rows) == 8
        for r in rows:
            assert Fraction(r[3]) == jt[tuple(int(v) for v in r[:3])]


class TestSolve:
    def test_contradiction(self, files):
        f = files("f.txt", "P(X=0)=1 AND P(X=1)=1")
        code, text = cli("solve", "--formula", f, "--vars", "X", "--p", 2)
        assert code == 1 and text.startswith("UNSAT_WITHIN_BOUNDS")

    def test_witness_file_matches_api(self, files):
        text = "P([X=1](Y=1))=1 AND P([X=0](Y=1))=0"
        dag = files("g.json", serialize.dumps(__import__("pchsat.model").model.Dag(("X", "Y"), {("X", "Y")})))
        out = files.dir / "w.json"
        code, msg = cli("solve", "--formula", files("f.txt", text), "--vars", "X,Y", "--p", 1, "--dag", dag,
                        "--witness", out, "--stats")
        assert code == 0
        witness = serialize.load(str(out))
        cfg = SolveConfig(("X", "Y"), 2, 1, dag=serialize.load(str(dag)))
        api = solve_sat(parse_formula(text, ("X", "Y"), 2), cfg)
        assert witness == api.witness
        assert eval_formula(witness, parse_formula(text, ("X", "Y"), 2)).is_true
        assert "lp_calls" in json.loads(msg.splitlines()[-1])

    def test_validity(self, files):
        code, text = cli("validity", "--formula", files("f.txt", "sum x . P(X=x) = 1"), "--vars", "X,Y", "--p", 2)
        assert code == 0 and text.startswith("VALID_WITHIN_BOUNDS")
        code, text = cli("validity", "--formula", files("g.txt", "P(X=1) <= 1/2"), "--vars", "X", "--p", 1)
        assert code == 1 and text.startswith("COUNTEREXAMPLE")

    def test_unknown(self, files):
        f = files("f.txt", "P(X=1) * P(X=1) = 1/2")
        assert cli("solve", "--formula", f, "--vars", "X", "--p", 2)[0] == 2


class TestOther:
    def test_info(self, files):
        code, text = cli("info", "--formula", files("f.txt", "P([X=1](Y=1) && X=0) > 0"), "--vars", "X,Y")
        assert code == 0 and "layer: 3" in text

    def test_transform_matches_library(self, files):
        src = "sum x . P(Y=1 && X=x) = 1/2"
        code, text = cli("transform", "--name", "expand-sums", "--formula", files("f.txt", src), "--vars", "X,Y")
        assert code == 0
        assert text.strip() == print_formula(expand_sums(parse_formula(src, ("X", "Y"), 2), 2))

    def test_causal_ordering(self, files, capsys):
        f = files("f.txt", "P([X=1](Y=1)) = 1")
        code, text = cli("transform", "--name", "causal-ordering", "--formula", f, "--vars", "X,Y", "--ordering", "X,Y")
        assert code == 0 and text.count("[C=1") == 2
        assert "control variable: C" in capsys.readouterr().err

    def test_docalc(self):
        code, text = cli("transform", "--name", "docalc-rule3", "--rule-vars", "X,Y,Z,W")
        assert code == 0 and text.count("sum") == 4

    def test_export_matches_library(self, files):
        src = "P(X=1) * P(X=1) = 1/4"
        code, text = cli("export", "--formula", files("f.txt", src), "--vars", "X")
        assert code == 0
        assert text == export_smtlib(parse_formula(src, ("X",), 2), SolveConfig(("X",), 2, 1))
        assert cli("export", "--formula", files.dir / "f.txt", "--vars", "X", "--mode", "per-structure")[0] == 64

    def test_deterministic_output(self, files):
        f = files("f.txt", "P(X=1) = 1/3 AND P(Y=1 | X=1) = 1")
        a = cli("--seed", 1, "solve", "--formula", f, "--vars", "X,Y", "--p", 3)
        b = cli("--seed", 7, "solve", "--formula", f, "--vars", "X,Y", "--p", 3)
        assert a == b and a[0] == 0
