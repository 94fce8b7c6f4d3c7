"""Formula rewrites that encode structural assumptions into the language itself."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .evaluate import DEFAULT_EXPANSION_BUDGET, ExpansionBudgetExceeded
from .lang.analysis import classify, desugar_neq, expansion_size, substitute_dummy, variables_used, walk
from .lang.ast import (
    And, Atom, CondProb, Const, Cmp, FNot, Mul, Neg, Not, PostInt, Prob, Sub, Sum, Top,
    conjoin, sum_terms,
)
from .model import Dag

FRESH_PREFIX = "_fresh"


@dataclass(frozen=True)
class Ordering:
    """A causal order ``vars[0] < vars[1] < ...`` over all declared variables."""

    vars: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("ordering repeats a variable")

    def check_covers(self, declared: Sequence[str]) -> None:
        if set(self.vars) != set(declared) or len(self.vars) != len(declared):
            raise ValueError(f"ordering {list(self.vars)} is not a permutation of {list(declared)}")

    def as_dag(self) -> Dag:
        return Dag.complete(self.vars)


# ---------------------------------------------------------------------------
# sum expansion
# ---------------------------------------------------------------------------


def _expand(node, c: int):
    if isinstance(node, (Prob, CondProb, Const)):
        return node
    if isinstance(node, Sum):
        body = node.body
        return sum_terms(_expand(substitute_dummy(body, node.dummy, v), c) for v in range(c))
    if isinstance(node, (Neg, FNot)):
        return type(node)(_expand(node.arg, c))
    if isinstance(node, Cmp):
        return Cmp(_expand(node.left, c), node.op, _expand(node.right, c))
    return type(node)(_expand(node.left, c), _expand(node.right, c))


def expand_sums(f, c: int, budget: int = DEFAULT_EXPANSION_BUDGET):
    """Replace every ``sum x . t`` by ``t[0/x] + ... + t[c-1/x]``."""
    need = expansion_size(f, c)
    if need > budget:
        raise ExpansionBudgetExceeded(f"expansion needs {need} leaves, budget is {budget}")
    return _expand(f, c)


# ---------------------------------------------------------------------------
# structural encodings
# ---------------------------------------------------------------------------


def reduce_to_complete_dag(f, vars: Sequence[str]) -> tuple:
    if classify(f).layer != 1:
        raise ValueError("the complete-DAG reduction applies to observational formulas only")
    return f, Dag.complete(vars)


def fresh_name(base: str, taken) -> str:
    """``base`` itself when unused, otherwise ``_fresh<base>``, ``_fresh<base>1``, ..."""
    taken = set(taken)
    if base not in taken:
        return base
    name = FRESH_PREFIX + base
    k = 0
    while name in taken:
        k += 1
        name = f"{FRESH_PREFIX}{base}{k}"
    return name


def _prefix(node, pair):
    if isinstance(node, PostInt):
        return PostInt((pair,) + node.intervention, node.event)
    if isinstance(node, (Atom, Top, Const)):
        return node
    if isinstance(node, Sum):
        return Sum(node.dummy, _prefix(node.body, pair))
    if isinstance(node, Cmp):
        return Cmp(_prefix(node.left, pair), node.op, _prefix(node.right, pair))
    if isinstance(node, (Not, FNot, Neg)):
        return type(node)(_prefix(node.arg, pair))
    if isinstance(node, Prob):
        return Prob(_prefix(node.event, pair))
    if isinstance(node, CondProb):
        return CondProb(_prefix(node.event, pair), _prefix(node.given, pair))
    return type(node)(_prefix(node.left, pair), _prefix(node.right, pair))


def encode_causal_ordering(f, ordering: Ordering | Sequence[str], c: int, control: str | None = None):
    """Force ``ordering`` through a fresh control variable.

    Returns ``(formula, control_name)``.  With the control at 0 the original
    formula is evaluated; with it at 1 each variable copies its predecessor in
    the ordering, which is only possible when the predecessor is an ancestor.
    """
    if not isinstance(ordering, Ordering):
        ordering = Ordering(tuple(ordering))
    if classify(f).layer > 2:
        raise ValueError("the causal-ordering encoding applies to layers 1 and 2 only")
    if control is None:
        dummies = {n.dummy for n in walk(f) if isinstance(n, Sum)}
        control = fresh_name("C", set(ordering.vars) | variables_used(f) | dummies)
    out = [_prefix(f, (control, 0))]
    for prev, nxt in zip(ordering.vars, ordering.vars[1:]):
        for k in range(c):
            event = PostInt(((control, 1), (prev, k)), Atom(nxt, k))
            out.append(Cmp(Prob(event), "=", Const(1)))
    return conjoin(out), control


def _dummy_names(vars: Sequence[str]) -> dict[str, str]:
    taken = set(vars)
    out = {}
    for v in vars:
        name = FRESH_PREFIX + v
        k = 0
        while name in taken:
            k += 1
            name = f"{FRESH_PREFIX}{v}{k}"
        taken.add(name)
        out[v] = name
    return out


def encode_dag_constraint_l3(g: Dag, c: int):
    """Counterfactual formula satisfied exactly by models whose mechanisms read only ``g``-parents.

    For each variable, the value under an intervention on its parents must
    coincide with the value under an intervention on every other variable
    (agreeing on the parents), for every choice of intervened values.
    """
    dummy = _dummy_names(g.vars)
    parts = []
    for x in g.vars:
        pa = tuple((v, dummy[v]) for v in g.parents(x))
        rest = tuple((v, dummy[v]) for v in g.vars if v != x)
        body = Prob(desugar_neq(pa, rest, x, c))
        for v in reversed(g.vars):
            body = Sum(dummy[v], body)
        parts.append(Cmp(body, "=", Const(0)))
    return conjoin(parts)


def build_docalc_observation_rule(x: str, y: str, z: str, w: str, c: int | None = None):
    """Squared-difference formula stating that observing ``z`` is irrelevant for ``y`` given ``w`` under ``do(x)``.

    ``c`` is accepted for interface symmetry; the sums range over the
    evaluation domain automatically.
    """
    names = [x, y, z, w]
    if len(set(names)) != 4:
        raise ValueError("the four variables must be distinct")
    dummy = _dummy_names(names)
    dx, dy, dz, dw = (dummy[v] for v in names)
    do = ((x, dx),)
    first = CondProb(PostInt(do, Atom(y, dy)), PostInt(do, And(Atom(z, dz), Atom(w, dw))))
    second = CondProb(PostInt(do, Atom(y, dy)), PostInt(do, Atom(w, dw)))
    diff = Sub(first, second)
    body = Mul(diff, diff)
    for d in (dw, dz, dy, dx):
        body = Sum(d, body)
    return Cmp(body, "=", Const(0))


TRANSFORMS = ("expand-sums", "complete-dag", "causal-ordering", "dag-l3", "docalc-rule3")

__all__ = [
    "FRESH_PREFIX", "Ordering", "TRANSFORMS", "build_docalc_observation_rule", "encode_causal_ordering",
    "encode_dag_constraint_l3", "expand_sums", "expansion_size", "fresh_name", "reduce_to_complete_dag",
]
