import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import random_event, random_term
from pchsat.lang import (
    ParseError, classify, desugar_core, desugar_neq, free_dummies, parse_event, parse_formula,
    parse_term, print_formula, print_term, substitute_dummy,
)
from pchsat.lang.analysis import strip_interventions, term_sign
from pchsat.lang.ast import (
    Add, And, Atom, CondProb, Cmp, Const, FAnd, FNot, FOr, Mul, Neg, Not, Or, PostInt, Prob, Sub, Sum,
)

XY = ("X", "Y")
XYZ = ("X", "Y", "Z")


class TestParse:
    def test_interventional_comparison(self):
        f = parse_formula("P([X=1](Y=1)) = 94/100", XY, 2)
        assert f == Cmp(Prob(PostInt((("X", 1),), Atom("Y", 1))), "=", Const(Fraction(94, 100)))

    def test_sum_over_dummy(self):
        t = parse_term("sum x . P([](Y=1 && X=x))", XY, 2)
        assert t == Sum("x", Prob(PostInt((), And(Atom("Y", 1), Atom("X", "x")))))

    def test_counterfactual_conjunction(self):
        f = parse_formula("P([X=1](Y=1) && [X=1](Y=0)) > 0", XY, 2)
        assert classify(f).layer == 3

    def test_unbracketed_event_is_one_leaf(self):
        assert parse_event("Y=1 && X=0", XY, 2) == PostInt((), And(Atom("Y", 1), Atom("X", 0)))
        two = parse_event("[](Y=1) && [](X=0)", XY, 2)
        assert isinstance(two, And) and isinstance(two.left, PostInt)

    def test_comma_is_conjunction(self):
        assert parse_event("Y=1, X=0", XY, 2) == parse_event("Y=1 && X=0", XY, 2)

    def test_neq_atom_and_unicode(self):
        assert parse_event("X!=1", XY, 2) == PostInt((), Not(Atom("X", 1)))
        assert parse_formula("P(X=1) ≤ 1/2", XY, 2) == parse_formula("P(X=1) <= 1/2", XY, 2)

    def test_decimal_constants_exact(self):
        assert parse_term("0.0474", XY, 2) == Const(Fraction(474, 10000))

    def test_conditional(self):
        t = parse_term("P(Y=1 | X=1)", XY, 2)
        assert t == CondProb(PostInt((), Atom("Y", 1)), PostInt((), Atom("X", 1)))

    def test_precedence(self):
        t = parse_term("P(X=1) + P(Y=1) * P(X=0) - -P(Y=0)", XY, 2)
        assert isinstance(t, Sub) and isinstance(t.left, Add) and isinstance(t.left.right, Mul)
        assert isinstance(t.right, Neg)
        f = parse_formula("P(X=1) = 1 OR P(X=0) = 1 AND NOT P(Y=1) > 0", XY, 2)
        assert isinstance(f, FOr) and isinstance(f.right, FAnd) and isinstance(f.right.right, FNot)

    def test_comments_ignored(self):
        assert parse_formula("# heading\nP(X=1) = 1 # tail\n", XY, 2) == parse_formula("P(X=1) = 1", XY, 2)

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("P(W=1) = 1", "undeclared variable"),
            ("P(X=2) = 1", "outside Val"),
            ("P(X=x) = 1", "unbound dummy"),
            ("sum x . sum x . P(X=x) = 1", "shadows"),
            ("P([X=0, X=1](Y=1)) = 1", "intervened twice"),
            ("P(X=1) = 1 = 1", "chained"),
            ("P(X=1) 1", "comparison operator"),
            ("P(X=1) = 1/0", "division by zero"),
            ("P(X=1) = $", "unexpected character"),
        ],
    )
    def test_errors(self, text, fragment):
        with pytest.raises(ParseError) as info:
            parse_formula(text, XY, 2)
        assert fragment in str(info.value)

    def test_error_position(self):
        with pytest.raises(ParseError) as info:
            parse_formula("P(X=1) = 1 AND\n  P(Q=1) = 0", XY, 2)
        assert (info.value.line, info.value.col) == (2, 5)

    def test_depth_limit(self):
        text = "(" * 40 + "P(X=1)" + ")" * 40 + " = 1"
        parse_formula(text, XY, 2)
        with pytest.raises(ParseError, match="nesting"):
            parse_formula(text, XY, 2, max_depth=20)


class TestPrint:
    def test_constants(self):
        assert print_term(Const(Fraction(1, 2))) == "1/2"

    def test_negated_atom(self):
        assert print_formula(Cmp(Prob(PostInt((), Not(Atom("X", 0)))), "=", Const(1))) == "P(!(X=0)) = 1"

    @pytest.mark.parametrize(
        "text",
        [
            "P([X=1](Y=1)) = 94/100",
            "sum x . P([](Y=1 && X=x)) >= 0",
            "P([X=1](Y=1) && [X=1](Y=0)) > 0",
            "sum x . sum y . P(X=x && Y=y) = 1",
            "P(X=1) - (P(Y=1) - P(X=0)) != 0",
        ],
    )
    def test_round_trip(self, text):
        f = parse_formula(text, XY, 2)
        assert parse_formula(print_formula(f), XY, 2) == f

    def test_nested_sums_keep_distinct_dummies(self):
        f = parse_formula("sum a . sum b . P(X=a && Y=b) = 1", XY, 2)
        out = print_formula(f)
        assert "sum a . sum b ." in out


def random_formula(rng, vars, c, depth=2):
    if depth == 0 or rng.random() < 0.5:
        layer = rng.randint(1, 3)
        op = rng.choice(("<=", "<", "=", "!=", ">=", ">"))
        return Cmp(random_term(rng, vars, c, layer, 2, max_sums=2), op, random_term(rng, vars, c, layer, 1))
    kind = rng.choice(("not", "and", "or"))
    if kind == "not":
        return FNot(random_formula(rng, vars, c, depth - 1))
    cls = FAnd if kind == "and" else FOr
    return cls(random_formula(rng, vars, c, depth - 1), random_formula(rng, vars, c, depth - 1))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_print_parse_round_trip(seed):
    rng = random.Random(seed)
    f = random_formula(rng, XYZ, 3)
    assert parse_formula(print_formula(f), XYZ, 3) == f


class TestClassify:
    @pytest.mark.parametrize(
        "text, layer, arith, sums",
        [
            ("P(X=1) + P(X=0) = 1", 1, "lin", False),
            ("P([X=1](Y=1)) = 94/100", 2, "base", False),
            ("sum x . P([X=1](Y=1) && [](X=x)) * P(X=0) = 0", 3, "poly", True),
            ("2 * P(X=1) = 1", 1, "lin", False),
            ("P(Y=1 | X=1) = 1/2", 1, "base", False),
            ("P([X=1](Y=1) | [X=1](X=1)) = 1/2", 2, "base", False),
            ("P([X=1](Y=1) | X=1) = 1/2", 3, "base", False),
        ],
    )
    def test_examples(self, text, layer, arith, sums):
        cl = classify(parse_formula(text, XY, 2))
        assert (cl.layer, cl.arithmetic, cl.uses_sum) == (layer, arith, sums)

    def test_label(self):
        cl = classify(parse_formula("sum x . P(X=x) * P(X=x) = 1", XY, 2))
        assert str(cl) == "L1 poly<Σ>"

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**9))
    def test_stripping_interventions_never_raises_layer(self, seed):
        f = random_formula(random.Random(seed), XYZ, 2)
        assert classify(strip_interventions(f)).layer <= classify(f).layer


class TestRewrites:
    def test_substitute_paper_example(self):
        t = Prob(PostInt((), And(Atom("Y", 1), Atom("X", "x"))))
        assert substitute_dummy(t, "x", 0) == Prob(PostInt((), And(Atom("Y", 1), Atom("X", 0))))

    def test_substitute_leaves_other_dummies(self):
        t = Sum("y", Prob(PostInt((("X", "x"),), And(Atom("Y", "y"), Atom("X", "x")))))
        out = substitute_dummy(t.body, "x", 1)
        assert free_dummies(out) == {"y"}
        assert substitute_dummy(Prob(PostInt((), Atom("X", 0))), "x", 1) == Prob(PostInt((), Atom("X", 0)))

    def test_desugar_neq_shape(self):
        e = desugar_neq((("X", 1),), (("X", 1), ("Z", 0)), "Y", 2)
        first = And(PostInt((("X", 1),), Atom("Y", 0)), PostInt((("X", 1), ("Z", 0)), Not(Atom("Y", 0))))
        second = And(PostInt((("X", 1),), Atom("Y", 1)), PostInt((("X", 1), ("Z", 0)), Not(Atom("Y", 1))))
        assert e == Or(first, second)

    def test_desugar_core(self):
        f = parse_formula("P(X=1) > 1/2 OR P(X=0) != 0", XY, 2)
        core = desugar_core(f)
        from pchsat.lang.analysis import walk

        ops = {n.op for n in walk(core) if isinstance(n, Cmp)}
        assert ops == {"<="}
        assert not any(isinstance(n, FOr) for n in walk(core))

    def test_term_sign(self):
        assert term_sign(parse_term("P(X=1) - 0", XY, 2)) == "nonneg"
        assert term_sign(parse_term("0 - P(X=1)", XY, 2)) == "nonpos"
        assert term_sign(parse_term("(P(X=1) - P(X=0)) * (P(X=1) - P(X=0))", XY, 2)) == "nonneg"
        assert term_sign(parse_term("P(X=1) - P(X=0)", XY, 2)) is None


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_event_round_trip_through_formula(seed):
    rng = random.Random(seed)
    e = random_event(rng, XYZ, 2, rng.randint(1, 3))
    f = Cmp(Prob(e), ">=", Const(0))
    assert parse_formula(print_formula(f), XYZ, 2) == f
