"""Syntax trees for events, terms and formulas.

Values inside atoms and interventions are either an ``int`` from Val or a
``str`` naming a dummy bound by an enclosing :class:`Sum`.

Event trees come in two levels that share the connective classes: the
propositional level (:class:`Atom`, :class:`Top`, :class:`Not`,
:class:`And`, :class:`Or`) lives inside :class:`PostInt` leaves, and the
counterfactual level combines ``PostInt`` leaves with the same connectives.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Value = Union[int, str]


# -- events -----------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    var: str
    value: Value


@dataclass(frozen=True)
class Top:
    """The always-true event."""


@dataclass(frozen=True)
class Not:
    arg: "Event"


@dataclass(frozen=True)
class And:
    left: "Event"
    right: "Event"


@dataclass(frozen=True)
class Or:
    left: "Event"
    right: "Event"


Intervention = tuple[tuple[str, Value], ...]


@dataclass(frozen=True)
class PostInt:
    """``[intervention] event``; the empty intervention means none was applied."""

    intervention: Intervention
    event: "Event"

    def __post_init__(self):
        object.__setattr__(self, "intervention", tuple((v, x) for v, x in self.intervention))
        names = [v for v, _ in self.intervention]
        if len(set(names)) != len(names):
            raise ValueError("intervention sets a variable twice")


Event = Union[Atom, Top, Not, And, Or, PostInt]


# -- terms ------------------------------------------------------------------


@dataclass(frozen=True)
class Prob:
    event: Event


@dataclass(frozen=True)
class CondProb:
    event: Event
    given: Event


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value < 0:
            raise ValueError("constants are non-negative; write Neg(Const(..)) instead")


@dataclass(frozen=True)
class Add:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sub:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Neg:
    arg: "Term"


@dataclass(frozen=True)
class Mul:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sum:
    dummy: str
    body: "Term"


Term = Union[Prob, CondProb, Const, Add, Sub, Neg, Mul, Sum]


# -- formulas ---------------------------------------------------------------

CMP_OPS = ("<=", "<", "=", "!=", ">=", ">")


@dataclass(frozen=True)
class Cmp:
    left: Term
    op: str
    right: Term

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class FNot:
    arg: "Formula"


@dataclass(frozen=True)
class FAnd:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class FOr:
    left: "Formula"
    right: "Formula"


Formula = Union[Cmp, FNot, FAnd, FOr]


def conjoin(parts) -> Formula:
    """Left-nested conjunction of a non-empty sequence of formulas."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = FAnd(out, p)
    return out


def disjoin_events(parts) -> Event:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def sum_terms(parts) -> Term:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out
