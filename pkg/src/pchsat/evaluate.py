"""Exact semantics of events, terms and formulas over an SCM or a BN."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .lang.analysis import classify, expansion_size, substitute_dummy
from .lang.ast import (
    Add, And, Atom, CondProb, Const, Cmp, FAnd, FNot, FOr, Mul, Neg, Not, Or,
    PostInt, Prob, Sub, Sum, Top,
)
from .model import Bn, Scm, apply_intervention, bn_joint_distribution, evaluate_endogenous, lift_joint_to_scm

DEFAULT_EXPANSION_BUDGET = 10**6


class ExpansionBudgetExceeded(RuntimeError):
    pass


class FreeDummyError(ValueError):
    pass


@dataclass(frozen=True)
class Undefined:
    """A conditional probability whose conditioning event has probability 0."""

    term: CondProb

    def __str__(self) -> str:
        from .lang.printer import print_term

        return f"undefined: {print_term(self.term)} conditions on a null event"


Outcome = Union[Fraction, Undefined]


@dataclass(frozen=True)
class Verdict:
    value: bool | None
    evidence: Undefined | None = None

    @property
    def is_true(self) -> bool:
        return self.value is True

    @property
    def is_undefined(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        return {True: "true", False: "false", None: "undefined"}[self.value]


TRUE = Verdict(True)
FALSE = Verdict(False)


def _intervention_key(pairs) -> tuple:
    for var, val in pairs:
        if isinstance(val, str):
            raise FreeDummyError(f"free dummy {val!r} in intervention on {var}")
    return tuple(sorted(pairs))


class Evaluator:
    """Evaluates closed events and terms against one SCM.

    The endogenous outcome of every support point is cached per
    intervention, so repeated leaves cost one table lookup each.
    """

    def __init__(self, scm: Scm, budget: int = DEFAULT_EXPANSION_BUDGET):
        self.scm = scm
        self.budget = budget
        self.expanded = 0
        self._in_sum = False
        self._index = {v: i for i, v in enumerate(scm.x_vars)}
        self._worlds: dict[tuple, list[tuple[int, ...]]] = {}

    def worlds(self, pairs) -> list[tuple[int, ...]]:
        key = _intervention_key(pairs)
        if key not in self._worlds:
            model = apply_intervention(self.scm, key)
            self._worlds[key] = [evaluate_endogenous(model, u) for u, _ in self.scm.exo.support]
        return self._worlds[key]

    def _prop(self, e, x) -> bool:
        if isinstance(e, Atom):
            if isinstance(e.value, str):
                raise FreeDummyError(f"free dummy {e.value!r}")
            return x[self._index[e.var]] == e.value
        if isinstance(e, Top):
            return True
        if isinstance(e, Not):
            return not self._prop(e.arg, x)
        if isinstance(e, And):
            return self._prop(e.left, x) and self._prop(e.right, x)
        if isinstance(e, Or):
            return self._prop(e.left, x) or self._prop(e.right, x)
        raise TypeError(f"not a propositional event: {e!r}")

    def holds(self, e, row: int) -> bool:
        """Whether counterfactual event ``e`` holds at support point number ``row``."""
        if isinstance(e, PostInt):
            return self._prop(e.event, self.worlds(e.intervention)[row])
        if isinstance(e, Not):
            return not self.holds(e.arg, row)
        if isinstance(e, And):
            return self.holds(e.left, row) and self.holds(e.right, row)
        if isinstance(e, Or):
            return self.holds(e.left, row) or self.holds(e.right, row)
        raise TypeError(f"not a counterfactual event: {e!r}")

    def probability(self, e) -> Fraction:
        total = Fraction(0)
        for row, (_, p) in enumerate(self.scm.exo.support):
            if self.holds(e, row):
                total += p
        return total

    def term(self, t) -> Outcome:
        if isinstance(t, Prob):
            return self.probability(t.event)
        if isinstance(t, CondProb):
            den = self.probability(t.given)
            if den == 0:
                return Undefined(t)
            return self.probability(And(t.event, t.given)) / den
        if isinstance(t, Const):
            return t.value
        if isinstance(t, Sum):
            outer = not self._in_sum
            if outer:
                # Budget counts leaves of the full expansion, as expand_sums does.
                self.expanded += expansion_size(t, self.scm.c)
                if self.expanded > self.budget:
                    raise ExpansionBudgetExceeded(f"expansion needs {self.expanded} leaves, budget is {self.budget}")
                self._in_sum = True
            try:
                total: Outcome = Fraction(0)
                for v in range(self.scm.c):
                    val = self.term(substitute_dummy(t.body, t.dummy, v))
                    if isinstance(total, Undefined):
                        continue
                    total = val if isinstance(val, Undefined) else total + val
            finally:
                if outer:
                    self._in_sum = False
            return total
        if isinstance(t, Neg):
            val = self.term(t.arg)
            return val if isinstance(val, Undefined) else -val
        if isinstance(t, (Add, Sub, Mul)):
            a = self.term(t.left)
            b = self.term(t.right)
            if isinstance(a, Undefined):
                return a
            if isinstance(b, Undefined):
                return b
            if isinstance(t, Add):
                return a + b
            if isinstance(t, Sub):
                return a - b
            return a * b
        raise TypeError(f"not a term: {t!r}")

    def formula(self, f) -> Verdict:
        if isinstance(f, Cmp):
            a = self.term(f.left)
            b = self.term(f.right)
            for side in (a, b):
                if isinstance(side, Undefined):
                    return Verdict(None, side)
            return TRUE if compare(a, f.op, b) else FALSE
        if isinstance(f, FNot):
            v = self.formula(f.arg)
            return v if v.value is None else Verdict(not v.value)
        if isinstance(f, (FAnd, FOr)):
            # Strong Kleene: the dominating value wins over undefined.
            dominant = isinstance(f, FOr)
            a = self.formula(f.left)
            b = self.formula(f.right)
            if a.value is dominant or b.value is dominant:
                return Verdict(dominant)
            if a.value is None:
                return a
            if b.value is None:
                return b
            return Verdict(not dominant)
        raise TypeError(f"not a formula: {f!r}")


def compare(a: Fraction, op: str, b: Fraction) -> bool:
    if op == "<=":
        return a <= b
    if op == "<":
        return a < b
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == ">=":
        return a >= b
    if op == ">":
        return a > b
    raise ValueError(op)


def satisfies_cf(scm: Scm, u: Sequence[int], e) -> bool:
    """``F, u |= e`` for a closed counterfactual event ``e``."""
    u = tuple(u)

    def go(node) -> bool:
        if isinstance(node, PostInt):
            model = apply_intervention(scm, _intervention_key(node.intervention))
            x = dict(zip(scm.x_vars, evaluate_endogenous(model, u)))
            return _prop_dict(node.event, x)
        if isinstance(node, Not):
            return not go(node.arg)
        if isinstance(node, And):
            return go(node.left) and go(node.right)
        if isinstance(node, Or):
            return go(node.left) or go(node.right)
        raise TypeError(f"not a counterfactual event: {node!r}")

    return go(e)


def _prop_dict(e, x: dict) -> bool:
    if isinstance(e, Atom):
        if isinstance(e.value, str):
            raise FreeDummyError(f"free dummy {e.value!r}")
        return x[e.var] == e.value
    if isinstance(e, Top):
        return True
    if isinstance(e, Not):
        return not _prop_dict(e.arg, x)
    if isinstance(e, And):
        return _prop_dict(e.left, x) and _prop_dict(e.right, x)
    if isinstance(e, Or):
        return _prop_dict(e.left, x) or _prop_dict(e.right, x)
    raise TypeError(f"not a propositional event: {e!r}")


def term_value(scm: Scm, t, budget: int = DEFAULT_EXPANSION_BUDGET) -> Outcome:
    return Evaluator(scm, budget).term(t)


def eval_formula(scm: Scm, f, budget: int = DEFAULT_EXPANSION_BUDGET) -> Verdict:
    return Evaluator(scm, budget).formula(f)


class InterventionalFormulaOnBn(ValueError):
    pass


def eval_formula_bn(bn: Bn, f, budget: int = DEFAULT_EXPANSION_BUDGET) -> Verdict:
    if classify(f).layer > 1:
        raise InterventionalFormulaOnBn("interventional formula on BN: a Bayesian network has no mechanisms")
    return eval_formula(lift_joint_to_scm(bn_joint_distribution(bn)), f, budget)
