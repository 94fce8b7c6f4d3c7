"""Arithmetic over unknown probabilities and the literal/Boolean layer built on it.

A :class:`Lin` is a rational affine form over opaque keys.  The solver uses
event identifiers as keys (the value of a key is the probability of that
event); per-structure constraints use support indices ``0..p-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Union

from ..lang.analysis import term_sign
from ..lang.ast import Add, And, CondProb, Const, Cmp, FAnd, FNot, FOr, Mul, Neg, Prob, Sub, Sum

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Lin:
    coeffs: tuple[tuple[object, Fraction], ...]
    const: Fraction = ZERO

    @staticmethod
    def make(coeffs: Mapping, const=ZERO) -> "Lin":
        items = tuple(sorted(((k, Fraction(v)) for k, v in coeffs.items() if v != 0), key=lambda kv: repr(kv[0])))
        return Lin(items, Fraction(const))

    @staticmethod
    def constant(v) -> "Lin":
        return Lin((), Fraction(v))

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def scale(self, a: Fraction) -> "Lin":
        return Lin.make({k: a * v for k, v in self.coeffs}, a * self.const)

    def plus(self, other: "Lin") -> "Lin":
        d = self.as_dict()
        for k, v in other.coeffs:
            d[k] = d.get(k, ZERO) + v
        return Lin.make(d, self.const + other.const)

    def value(self, env: Callable[[object], Fraction]) -> Fraction:
        return self.const + sum((v * env(k) for k, v in self.coeffs), ZERO)

    def keys(self):
        return [k for k, _ in self.coeffs]


# Expression nodes: a Lin, or one of the tuples below.
@dataclass(frozen=True)
class Ratio:
    num: Lin
    den: Lin


@dataclass(frozen=True)
class QAdd:
    left: "QExpr"
    right: "QExpr"


@dataclass(frozen=True)
class QMul:
    left: "QExpr"
    right: "QExpr"


@dataclass(frozen=True)
class QScale:
    factor: Fraction
    arg: "QExpr"


QExpr = Union[Lin, Ratio, QAdd, QMul, QScale]


def q_add(a: QExpr, b: QExpr) -> QExpr:
    if isinstance(a, Lin) and isinstance(b, Lin):
        return a.plus(b)
    return QAdd(a, b)


def q_scale(f: Fraction, a: QExpr) -> QExpr:
    if isinstance(a, Lin):
        return a.scale(f)
    if isinstance(a, QScale):
        return q_scale(f * a.factor, a.arg)
    return QScale(f, a)


def q_mul(a: QExpr, b: QExpr) -> QExpr:
    if isinstance(a, Lin) and a.is_constant:
        return q_scale(a.const, b)
    if isinstance(b, Lin) and b.is_constant:
        return q_scale(b.const, a)
    return QMul(a, b)


def q_value(q: QExpr, env) -> Fraction | None:
    """Exact value, or ``None`` when a denominator vanishes."""
    if isinstance(q, Lin):
        return q.value(env)
    if isinstance(q, Ratio):
        d = q.den.value(env)
        if d == 0:
            return None
        return q.num.value(env) / d
    if isinstance(q, QScale):
        v = q_value(q.arg, env)
        return None if v is None else q.factor * v
    a = q_value(q.left, env)
    b = q_value(q.right, env)
    if a is None or b is None:
        return None
    return a + b if isinstance(q, QAdd) else a * b


def q_float(q: QExpr, env) -> float | None:
    if isinstance(q, Lin):
        return float(q.const) + sum(float(v) * env(k) for k, v in q.coeffs)
    if isinstance(q, Ratio):
        d = q_float(q.den, env)
        if d is None or d <= 0:
            return None
        return q_float(q.num, env) / d
    if isinstance(q, QScale):
        v = q_float(q.arg, env)
        return None if v is None else float(q.factor) * v
    a = q_float(q.left, env)
    b = q_float(q.right, env)
    if a is None or b is None:
        return None
    return a + b if isinstance(q, QAdd) else a * b


def ratios(q: QExpr) -> list[Ratio]:
    if isinstance(q, Lin):
        return []
    if isinstance(q, Ratio):
        return [q]
    if isinstance(q, QScale):
        return ratios(q.arg)
    return ratios(q.left) + ratios(q.right)


def keys_of(q: QExpr) -> set:
    if isinstance(q, Lin):
        return set(q.keys())
    if isinstance(q, Ratio):
        return set(q.num.keys()) | set(q.den.keys())
    if isinstance(q, QScale):
        return keys_of(q.arg)
    return keys_of(q.left) | keys_of(q.right)


def linear_form(q: QExpr) -> Lin | None:
    """A Lin with the same sign as ``q`` wherever ``q`` is defined, if one exists.

    Covers ratio-free affine expressions and sums ``sum a_i N_i / D + b``
    whose ratios share one denominator ``D`` (then ``q * D`` is affine).
    """
    parts = _affine_in_ratios(q)
    if parts is None:
        return None
    lin, terms = parts
    if not terms:
        return lin
    dens = {r.den for _, r in terms}
    if len(dens) != 1 or not lin.is_constant:
        return None
    (den,) = dens
    out = den.scale(lin.const)
    for a, r in terms:
        out = out.plus(r.num.scale(a))
    return out


def _affine_in_ratios(q: QExpr):
    """``(lin, [(a, ratio)...])`` with ``q = lin + sum a * ratio``, or None if nonlinear."""
    if isinstance(q, Lin):
        return q, []
    if isinstance(q, Ratio):
        return Lin.constant(0), [(ONE, q)]
    if isinstance(q, QScale):
        inner = _affine_in_ratios(q.arg)
        if inner is None:
            return None
        lin, terms = inner
        return lin.scale(q.factor), [(q.factor * a, r) for a, r in terms]
    if isinstance(q, QAdd):
        a = _affine_in_ratios(q.left)
        b = _affine_in_ratios(q.right)
        if a is None or b is None:
            return None
        return a[0].plus(b[0]), a[1] + b[1]
    return None


# ---------------------------------------------------------------------------
# literals and Boolean structure
# ---------------------------------------------------------------------------

LIT_RELS = (">=", ">", "=")


@dataclass(frozen=True)
class Literal:
    """``expr rel 0`` with rel in ``>=``, ``>``, ``=``."""

    expr: QExpr
    rel: str

    def holds(self, env) -> bool:
        v = q_value(self.expr, env)
        if v is None:
            return False
        return v > 0 if self.rel == ">" else (v >= 0 if self.rel == ">=" else v == 0)


@dataclass(frozen=True)
class BAnd:
    parts: tuple


@dataclass(frozen=True)
class BOr:
    parts: tuple


BTrue = BAnd(())
BFalse = BOr(())


def b_holds(node, env) -> bool:
    if isinstance(node, Literal):
        return node.holds(env)
    if isinstance(node, BAnd):
        return all(b_holds(p, env) for p in node.parts)
    return any(b_holds(p, env) for p in node.parts)


def term_to_q(t, leaf: Callable) -> QExpr:
    """Translate a Σ-free term.  ``leaf(event)`` gives the Lin for ``P(event)``."""
    if isinstance(t, Prob):
        return leaf(t.event)
    if isinstance(t, CondProb):
        return Ratio(leaf(And(t.event, t.given)), leaf(t.given))
    if isinstance(t, Const):
        return Lin.constant(t.value)
    if isinstance(t, Add):
        return q_add(term_to_q(t.left, leaf), term_to_q(t.right, leaf))
    if isinstance(t, Sub):
        return q_add(term_to_q(t.left, leaf), q_scale(-ONE, term_to_q(t.right, leaf)))
    if isinstance(t, Neg):
        return q_scale(-ONE, term_to_q(t.arg, leaf))
    if isinstance(t, Mul):
        return q_mul(term_to_q(t.left, leaf), term_to_q(t.right, leaf))
    if isinstance(t, Sum):
        raise ValueError("expand sums before translating terms")
    raise TypeError(f"not a term: {t!r}")


_FLIP = {"<=": ">", "<": ">=", "=": "!=", "!=": "=", ">=": "<", ">": "<="}


def _literal_node(left, op, right, leaf):
    """Boolean node for ``left op right`` holding exactly when it is defined and true."""
    if op in ("<=", "<"):
        left, right = right, left
        op = {"<=": ">=", "<": ">"}[op]
    diff_sign = term_sign(Sub(left, right))
    expr = q_add(term_to_q(left, leaf), q_scale(-ONE, term_to_q(right, leaf)))
    guards = tuple(Literal(r.den, ">") for r in _unique(ratios(expr)))

    def lit(e, rel, sign):
        # A strict literal on an expression that can never be positive is dead.
        if rel == ">" and sign == "nonpos":
            return BFalse
        if rel == ">=" and sign == "nonneg":
            return BTrue
        if isinstance(e, Lin) and e.is_constant:
            return BTrue if Literal(e, rel).holds(lambda k: ZERO) else BFalse
        return Literal(e, rel)

    neg_sign = {"nonneg": "nonpos", "nonpos": "nonneg"}.get(diff_sign)
    if op == "!=":
        core = _or([lit(q_scale(-ONE, expr), ">", neg_sign), lit(expr, ">", diff_sign)])
    else:
        core = lit(expr, op, diff_sign)
    return _and(list(guards) + [core])


def _unique(items):
    seen, out = set(), []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def _and(parts):
    flat = []
    for p in parts:
        if p == BFalse:
            return BFalse
        if isinstance(p, BAnd):
            flat.extend(p.parts)
        else:
            flat.append(p)
    flat = _unique(flat)
    return flat[0] if len(flat) == 1 else BAnd(tuple(flat))


def _or(parts):
    flat = []
    for p in parts:
        if p == BTrue:
            return BTrue
        if isinstance(p, BOr):
            flat.extend(p.parts)
        else:
            flat.append(p)
    flat = _unique(flat)
    return flat[0] if len(flat) == 1 else BOr(tuple(flat))


def formula_to_boolean(f, leaf: Callable, negate: bool = False):
    """Negation normal form of a Σ-free formula with comparisons as literals.

    Strong-Kleene truth is preserved: a comparison and its negation both fail
    when a conditional in it is undefined, via the denominator guards.
    """
    if isinstance(f, Cmp):
        op = _FLIP[f.op] if negate else f.op
        return _literal_node(f.left, op, f.right, leaf)
    if isinstance(f, FNot):
        return formula_to_boolean(f.arg, leaf, not negate)
    if isinstance(f, (FAnd, FOr)):
        parts = [formula_to_boolean(f.left, leaf, negate), formula_to_boolean(f.right, leaf, negate)]
        conj = isinstance(f, FAnd) != negate
        return _and(parts) if conj else _or(parts)
    raise TypeError(f"not a formula: {f!r}")


def dnf_branches(node) -> Iterator[tuple[Literal, ...]]:
    """Lazily enumerate the conjunctions of a DNF expansion, left to right."""
    if isinstance(node, Literal):
        yield (node,)
        return
    if isinstance(node, BOr):
        for p in node.parts:
            yield from dnf_branches(p)
        return

    def rec(i):
        if i == len(node.parts):
            yield ()
            return
        for head in dnf_branches(node.parts[i]):
            for tail in rec(i + 1):
                yield head + tail

    for branch in rec(0):
        yield tuple(_unique(branch))


def literals_of(node) -> list[Literal]:
    if isinstance(node, Literal):
        return [node]
    out = []
    for p in node.parts:
        out.extend(literals_of(p))
    return _unique(out)


def _subst_lin(lin: Lin, values: Mapping) -> Lin:
    d, const = {}, lin.const
    for k, a in lin.coeffs:
        if k in values:
            const += a * values[k]
        else:
            d[k] = a
    return Lin.make(d, const)


def _subst_q(q: QExpr, values: Mapping) -> QExpr:
    if isinstance(q, Lin):
        return _subst_lin(q, values)
    if isinstance(q, Ratio):
        num, den = _subst_lin(q.num, values), _subst_lin(q.den, values)
        if num.is_constant and den.is_constant and den.const != 0:
            return Lin.constant(num.const / den.const)
        return Ratio(num, den)
    if isinstance(q, QScale):
        return q_scale(q.factor, _subst_q(q.arg, values))
    a, b = _subst_q(q.left, values), _subst_q(q.right, values)
    return q_add(a, b) if isinstance(q, QAdd) else q_mul(a, b)


def substitute_constants(node, values: Mapping):
    """Replace keys with known constant values and fold what becomes constant."""
    if not values:
        return node
    if isinstance(node, Literal):
        e = _subst_q(node.expr, values)
        if isinstance(e, Lin) and e.is_constant:
            return BTrue if Literal(e, node.rel).holds(lambda k: ZERO) else BFalse
        return Literal(e, node.rel)
    parts = [substitute_constants(p, values) for p in node.parts]
    return _and(parts) if isinstance(node, BAnd) else _or(parts)
