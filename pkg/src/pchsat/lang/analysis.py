"""Classification, dummy substitution and small syntactic rewrites."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .ast import (
    Add, And, Atom, CondProb, Const, Cmp, FAnd, FNot, FOr, Mul, Neg, Not, Or,
    PostInt, Prob, Sub, Sum, Top, disjoin_events,
)

_EVENT_BINARY = (And, Or)
_TERM_BINARY = (Add, Sub, Mul)
_FORMULA_BINARY = (FAnd, FOr)


# ---------------------------------------------------------------------------
# traversal
# ---------------------------------------------------------------------------


def children(node) -> tuple:
    if isinstance(node, (Atom, Top, Const)):
        return ()
    if isinstance(node, (Not, FNot, Neg)):
        return (node.arg,)
    if isinstance(node, _EVENT_BINARY + _TERM_BINARY + _FORMULA_BINARY):
        return (node.left, node.right)
    if isinstance(node, PostInt):
        return (node.event,)
    if isinstance(node, Prob):
        return (node.event,)
    if isinstance(node, CondProb):
        return (node.event, node.given)
    if isinstance(node, Sum):
        return (node.body,)
    if isinstance(node, Cmp):
        return (node.left, node.right)
    raise TypeError(f"unknown node {node!r}")


def walk(node) -> Iterator:
    """Pre-order traversal of every node under ``node``."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def post_int_leaves(node) -> list[PostInt]:
    return [n for n in walk(node) if isinstance(n, PostInt)]


def variables_used(node) -> set[str]:
    out = set()
    for n in walk(node):
        if isinstance(n, Atom):
            out.add(n.var)
        elif isinstance(n, PostInt):
            out.update(v for v, _ in n.intervention)
    return out


def free_dummies(node, bound: frozenset = frozenset()) -> set[str]:
    if isinstance(node, Sum):
        return free_dummies(node.body, bound | {node.dummy})
    out = set()
    if isinstance(node, Atom) and isinstance(node.value, str) and node.value not in bound:
        out.add(node.value)
    if isinstance(node, PostInt):
        out.update(x for _, x in node.intervention if isinstance(x, str) and x not in bound)
    for ch in children(node):
        out |= free_dummies(ch, bound)
    return out


def is_closed(node) -> bool:
    return not free_dummies(node)


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------


def substitute_dummy(node, dummy: str, value: int):
    """Replace every free occurrence of ``dummy`` under ``node`` by ``value``."""
    if isinstance(node, Atom):
        return Atom(node.var, value) if node.value == dummy else node
    if isinstance(node, Top) or isinstance(node, Const):
        return node
    if isinstance(node, PostInt):
        pairs = tuple((v, value if x == dummy else x) for v, x in node.intervention)
        return PostInt(pairs, substitute_dummy(node.event, dummy, value))
    if isinstance(node, Sum):
        if node.dummy == dummy:
            return node
        return Sum(node.dummy, substitute_dummy(node.body, dummy, value))
    if isinstance(node, (Not, FNot, Neg)):
        return type(node)(substitute_dummy(node.arg, dummy, value))
    if isinstance(node, _EVENT_BINARY + _TERM_BINARY + _FORMULA_BINARY):
        return type(node)(substitute_dummy(node.left, dummy, value), substitute_dummy(node.right, dummy, value))
    if isinstance(node, Prob):
        return Prob(substitute_dummy(node.event, dummy, value))
    if isinstance(node, CondProb):
        return CondProb(substitute_dummy(node.event, dummy, value), substitute_dummy(node.given, dummy, value))
    if isinstance(node, Cmp):
        return Cmp(substitute_dummy(node.left, dummy, value), node.op, substitute_dummy(node.right, dummy, value))
    raise TypeError(f"unknown node {node!r}")


def expansion_size(node, c: int) -> int:
    """Number of Prob/CondProb leaves after all sums are expanded."""
    if isinstance(node, (Prob, CondProb)):
        return 1
    if isinstance(node, Const):
        return 0
    if isinstance(node, Sum):
        return c * expansion_size(node.body, c)
    if isinstance(node, (Neg, FNot)):
        return expansion_size(node.arg, c)
    if isinstance(node, Cmp):
        return expansion_size(node.left, c) + expansion_size(node.right, c)
    return expansion_size(node.left, c) + expansion_size(node.right, c)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

_ARITH_RANK = {"base": 0, "lin": 1, "poly": 2}


@dataclass(frozen=True)
class Classification:
    layer: int
    arithmetic: str
    uses_sum: bool
    uses_cond: bool

    @property
    def label(self) -> str:
        return f"{self.arithmetic}<Σ>" if self.uses_sum else self.arithmetic

    def __str__(self) -> str:
        extra = ", conditional" if self.uses_cond else ""
        return f"L{self.layer} {self.label}{extra}"


def event_layer(e) -> int:
    """1 for a single unintervened leaf, 2 for a single intervened leaf, else 3."""
    if isinstance(e, PostInt):
        return 1 if not e.intervention else 2
    return 3


def _primitive_layer(t) -> int:
    if isinstance(t, Prob):
        return event_layer(t.event)
    ev, given = t.event, t.given
    if isinstance(ev, PostInt) and isinstance(given, PostInt):
        if tuple(sorted(ev.intervention, key=str)) == tuple(sorted(given.intervention, key=str)):
            return event_layer(ev)
    return 3


def is_constant_term(t) -> bool:
    return not any(isinstance(n, (Prob, CondProb)) for n in walk(t))


def _arith(t) -> str:
    if isinstance(t, (Prob, CondProb, Const)):
        return "base"
    if isinstance(t, Sum):
        return _arith(t.body)
    if isinstance(t, (Add, Sub)):
        sub = max(_arith(t.left), _arith(t.right), key=_ARITH_RANK.get)
        return sub if sub == "poly" else "lin"
    if isinstance(t, Neg):
        sub = _arith(t.arg)
        return sub if sub == "poly" else "lin"
    if isinstance(t, Mul):
        if is_constant_term(t.left) or is_constant_term(t.right):
            sub = max(_arith(t.left), _arith(t.right), key=_ARITH_RANK.get)
            return sub if sub == "poly" else "lin"
        return "poly"
    raise TypeError(f"not a term: {t!r}")


def classify(f) -> Classification:
    layer = 1
    arith = "base"
    uses_sum = uses_cond = False
    for n in walk(f):
        if isinstance(n, (Prob, CondProb)):
            layer = max(layer, _primitive_layer(n))
            uses_cond |= isinstance(n, CondProb)
        elif isinstance(n, Sum):
            uses_sum = True
        elif isinstance(n, Cmp):
            for side in (n.left, n.right):
                arith = max(arith, _arith(side), key=_ARITH_RANK.get)
    return Classification(layer, arith, uses_sum, uses_cond)


# ---------------------------------------------------------------------------
# rewrites
# ---------------------------------------------------------------------------


def desugar_neq(iota1, iota2, var: str, c: int):
    """Event true at ``u`` iff ``var`` takes different values under the two interventions."""
    parts = [
        And(PostInt(tuple(iota1), Atom(var, d)), PostInt(tuple(iota2), Not(Atom(var, d))))
        for d in range(c)
    ]
    return disjoin_events(parts)


def desugar_core(f):
    """Rewrite comparisons into the core ``<=``, NOT, AND fragment.

    ``a < b`` becomes ``NOT b <= a``; ``a = b`` becomes ``a <= b AND b <= a``;
    ``OR`` becomes a negated conjunction.
    """
    if isinstance(f, Cmp):
        a, b = f.left, f.right
        if f.op == "<=":
            return f
        if f.op == ">=":
            return Cmp(b, "<=", a)
        if f.op == "<":
            return FNot(Cmp(b, "<=", a))
        if f.op == ">":
            return FNot(Cmp(a, "<=", b))
        eq = FAnd(Cmp(a, "<=", b), Cmp(b, "<=", a))
        return eq if f.op == "=" else FNot(eq)
    if isinstance(f, FNot):
        return FNot(desugar_core(f.arg))
    if isinstance(f, FAnd):
        return FAnd(desugar_core(f.left), desugar_core(f.right))
    if isinstance(f, FOr):
        return FNot(FAnd(FNot(desugar_core(f.left)), FNot(desugar_core(f.right))))
    raise TypeError(f"not a formula: {f!r}")


def strip_interventions(node):
    """Replace every intervention by the empty one (used for monotonicity checks)."""
    if isinstance(node, PostInt):
        return PostInt((), node.event)
    if isinstance(node, (Atom, Top, Const)):
        return node
    if isinstance(node, Sum):
        return Sum(node.dummy, strip_interventions(node.body))
    if isinstance(node, Cmp):
        return Cmp(strip_interventions(node.left), node.op, strip_interventions(node.right))
    if isinstance(node, (Not, FNot, Neg)):
        return type(node)(strip_interventions(node.arg))
    if isinstance(node, Prob):
        return Prob(strip_interventions(node.event))
    if isinstance(node, CondProb):
        return CondProb(strip_interventions(node.event), strip_interventions(node.given))
    return type(node)(strip_interventions(node.left), strip_interventions(node.right))


def term_sign(t) -> str | None:
    """``"nonneg"``/``"nonpos"`` when the sign follows from syntax alone, else ``None``."""
    if isinstance(t, (Prob, CondProb, Const)):
        return "nonneg"
    if isinstance(t, Neg):
        inner = term_sign(t.arg)
        return {"nonneg": "nonpos", "nonpos": "nonneg"}.get(inner)
    if isinstance(t, Sum):
        return term_sign(t.body)
    if isinstance(t, Mul):
        if t.left == t.right:
            return "nonneg"
        a, b = term_sign(t.left), term_sign(t.right)
        if a and b:
            return "nonneg" if a == b else "nonpos"
        return None
    if isinstance(t, Add):
        a, b = term_sign(t.left), term_sign(t.right)
        return a if a == b else None
    if isinstance(t, Sub):
        if t.right == Const(0):
            return term_sign(t.left)
        if t.left == Const(0):
            return term_sign(Neg(t.right))
        a, b = term_sign(t.left), term_sign(t.right)
        if a == "nonneg" and b == "nonpos":
            return "nonneg"
        if a == "nonpos" and b == "nonneg":
            return "nonpos"
        return None
    raise TypeError(f"not a term: {t!r}")


__all__ = [
    "Classification", "children", "classify", "desugar_core", "desugar_neq",
    "event_layer", "expansion_size", "free_dummies", "is_closed", "is_constant_term", "post_int_leaves",
    "strip_interventions", "substitute_dummy", "term_sign", "variables_used", "walk",
]
