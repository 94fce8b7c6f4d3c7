"""Canonical concrete syntax for ASTs; ``parse(print(x)) == x`` for every well-formed tree."""

from __future__ import annotations

from .ast import (
    Add, And, Atom, CondProb, Const, Cmp, FAnd, FNot, FOr, Mul, Neg, Not, Or,
    PostInt, Prob, Sub, Sum, Top,
)


def _value(v) -> str:
    return str(v)


def print_intervention(pairs) -> str:
    return "[" + ", ".join(f"{var}={_value(val)}" for var, val in pairs) + "]"


# Event precedence: Or 1 < And 2 < Not/leaf 3.
def _event(e, min_prec: int, root: bool) -> str:
    if isinstance(e, PostInt):
        if root and not e.intervention:
            return _event(e.event, min_prec, False)
        return print_intervention(e.intervention) + "(" + _event(e.event, 0, False) + ")"
    if isinstance(e, Atom):
        return f"{e.var}={_value(e.value)}"
    if isinstance(e, Top):
        return "true"
    if isinstance(e, Not):
        inner = _event(e.arg, 3, False)
        text = "!" + (f"({inner})" if isinstance(e.arg, Atom) else inner)
        prec = 3
    elif isinstance(e, And):
        text = _event(e.left, 2, False) + " && " + _event(e.right, 3, False)
        prec = 2
    elif isinstance(e, Or):
        text = _event(e.left, 1, False) + " || " + _event(e.right, 2, False)
        prec = 1
    else:
        raise TypeError(f"not an event: {e!r}")
    return f"({text})" if prec < min_prec else text


def print_event(e) -> str:
    return _event(e, 0, True)


# Term precedence: Add/Sub 1 < Neg 2 < Mul 3 < primary 4.  A Sum extends as
# far right as possible, so it is printed bare only in tail position.
def _term(t, min_prec: int, tail: bool) -> str:
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, Prob):
        return f"P({print_event(t.event)})"
    if isinstance(t, CondProb):
        return f"P({print_event(t.event)} | {print_event(t.given)})"
    if isinstance(t, Sum):
        text = f"sum {t.dummy} . {_term(t.body, 0, True)}"
        return text if tail else f"({text})"
    if isinstance(t, (Add, Sub)):
        sym = " + " if isinstance(t, Add) else " - "
        prec = 1
        if prec < min_prec:
            return "(" + _term(t, 0, True) + ")"
        return _term(t.left, 1, False) + sym + _term(t.right, 2, tail)
    if isinstance(t, Neg):
        prec = 2
        if prec < min_prec:
            return "(" + _term(t, 0, True) + ")"
        return "-" + _term(t.arg, 2, tail)
    if isinstance(t, Mul):
        prec = 3
        if prec < min_prec:
            return "(" + _term(t, 0, True) + ")"
        return _term(t.left, 3, False) + " * " + _term(t.right, 4, tail)
    raise TypeError(f"not a term: {t!r}")


def print_term(t) -> str:
    return _term(t, 0, True)


# Formula precedence: OR 1 < AND 2 < NOT/comparison 3.
def _formula(f, min_prec: int) -> str:
    if isinstance(f, Cmp):
        return f"{print_term(f.left)} {f.op} {print_term(f.right)}"
    if isinstance(f, FNot):
        text, prec = "NOT " + _formula(f.arg, 3), 3
    elif isinstance(f, FAnd):
        text, prec = _formula(f.left, 2) + " AND " + _formula(f.right, 3), 2
    elif isinstance(f, FOr):
        text, prec = _formula(f.left, 1) + " OR " + _formula(f.right, 2), 1
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if prec < min_prec else text


def print_formula(f) -> str:
    return _formula(f, 0)
