"""Recursive-descent parser for the formula language.

Grammar (``docs/grammar.md`` has the annotated version)::

    formula  := disj
    disj     := conj ("OR" conj)*
    conj     := fnot ("AND" fnot)*
    fnot     := "NOT" fnot | "(" formula ")" | cmp
    cmp      := term RELOP term
    term     := neg (("+" | "-") neg)*
    neg      := "-" neg | prod
    prod     := primary ("*" primary)*
    primary  := NUMBER | "P" "(" cf ["|" cf] ")" | "(" term ")"
              | "sum" IDENT "." term
    cf       := cfand ("||" cfand)*
    cfand    := cfnot (("&&" | ",") cfnot)*
    cfnot    := "!" cfnot | "(" cf ")" | "true" | IDENT ("=" | "!=") value
              | "[" [IDENT "=" value ("," IDENT "=" value)*] "]" cfnot
    value    := INT | IDENT            (a bound dummy)

Unbracketed event subtrees are grouped into a single ``PostInt(())`` leaf,
so ``P(Y=1 && X=0)`` has one leaf while ``P([](Y=1) && [](X=0))`` has two.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ast import (
    Add, And, Atom, CondProb, Const, Cmp, FAnd, FNot, FOr, Mul, Neg, Not, Or,
    PostInt, Prob, Sub, Sum, Top,
)

KEYWORDS = {"P", "sum", "AND", "OR", "NOT", "true"}
DEFAULT_MAX_DEPTH = 128

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||<=|>=|!=|≤|≥|≠|[|!<>=()\[\],.+\-*])
    """,
    re.VERBOSE,
)
_UNICODE = {"≤": "<=", "≥": ">=", "≠": "!="}
_RELOPS = {"<=", "<", "=", "!=", ">=", ">"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # num | ident | op | eof
    text: str
    line: int
    col: int
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "ws":
            tokens.append(Token(kind, _UNICODE.get(lexeme, lexeme), line, pos - line_start + 1, pos))
        for i, ch in enumerate(lexeme):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens


def _number(tok: Token) -> Fraction:
    whole, _, den = tok.text.partition("/")
    value = Fraction(whole)
    if den:
        if int(den) == 0:
            raise ParseError("division by zero in constant", tok.line, tok.col)
        value /= int(den)
    return value


class _Parser:
    def __init__(self, text: str, variables: Sequence[str], c: int, max_depth: int):
        self.toks = tokenize(text)
        self.i = 0
        self.variables = set(variables)
        bad = self.variables & KEYWORDS
        if bad:
            raise ValueError(f"variable names collide with keywords: {sorted(bad)}")
        self.c = c
        self.max_depth = max_depth
        self.depth = 0
        self.scope: list[str] = []

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text in texts

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def enter(self):
        self.depth += 1
        if self.depth > self.max_depth:
            raise self.error(f"nesting deeper than {self.max_depth}")

    def leave(self):
        self.depth -= 1

    # -- formulas -----------------------------------------------------------

    def formula(self):
        left = self.conj()
        while self.at("OR"):
            self.i += 1
            left = FOr(left, self.conj())
        return left

    def conj(self):
        left = self.fnot()
        while self.at("AND"):
            self.i += 1
            left = FAnd(left, self.fnot())
        return left

    def fnot(self):
        self.enter()
        try:
            if self.at("NOT"):
                self.i += 1
                return FNot(self.fnot())
            if self.at("("):
                # Either a parenthesised formula or a comparison starting with "(term)".
                start, depth, scoped = self.i, self.depth, len(self.scope)
                try:
                    self.i += 1
                    inner = self.formula()
                    self.expect(")")
                    return inner
                except ParseError as first:
                    self.i, self.depth = start, depth
                    del self.scope[scoped:]
                    try:
                        return self.cmp()
                    except ParseError as second:
                        raise max(first, second, key=lambda e: (e.line, e.col))
            return self.cmp()
        finally:
            self.leave()

    def cmp(self):
        left = self.term()
        if not (self.tok.kind == "op" and self.tok.text in _RELOPS):
            raise self.error(f"expected a comparison operator, found {self.tok.text or 'end of input'!r}")
        op = self.tok.text
        self.i += 1
        right = self.term()
        if self.tok.kind == "op" and self.tok.text in _RELOPS:
            raise self.error("chained comparisons are not allowed")
        return Cmp(left, op, right)

    # -- terms --------------------------------------------------------------

    def term(self):
        left = self.neg()
        while self.at("+", "-"):
            op = self.tok.text
            self.i += 1
            right = self.neg()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def neg(self):
        if self.at("-"):
            self.enter()
            self.i += 1
            try:
                return Neg(self.neg())
            finally:
                self.leave()
        return self.prod()

    def prod(self):
        left = self.primary()
        while self.at("*"):
            self.i += 1
            left = Mul(left, self.primary())
        return left

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(_number(tok))
        if self.at("("):
            self.enter()
            self.i += 1
            inner = self.term()
            self.expect(")")
            self.leave()
            return inner
        if self.at("sum"):
            self.enter()
            self.i += 1
            name = self.tok
            if name.kind != "ident" or name.text in KEYWORDS:
                raise self.error("expected a dummy name after 'sum'")
            if name.text in self.variables:
                raise self.error(f"dummy {name.text!r} clashes with a declared variable", name)
            if name.text in self.scope:
                raise self.error(f"dummy {name.text!r} shadows an enclosing sum", name)
            self.i += 1
            self.expect(".")
            self.scope.append(name.text)
            body = self.term()
            self.scope.pop()
            self.leave()
            return Sum(name.text, body)
        if self.at("P"):
            self.i += 1
            self.expect("(")
            event = self.event_root()
            if self.at("|"):
                self.i += 1
                given = self.event_root()
                self.expect(")")
                return CondProb(event, given)
            self.expect(")")
            return Prob(event)
        found = tok.text or "end of input"
        raise self.error(f"expected a term, found {found!r}")

    # -- events -------------------------------------------------------------
    # Internally each event comes back as (node, bare) where bare means it
    # contains no bracketed leaf yet.

    def event_root(self):
        node, bare = self.cf_or()
        return PostInt((), node) if bare else node

    @staticmethod
    def _lift(node, bare):
        return PostInt((), node) if bare else node

    def _combine(self, cls, a, b):
        (l, lb), (r, rb) = a, b
        if lb and rb:
            return cls(l, r), True
        return cls(self._lift(l, lb), self._lift(r, rb)), False

    def cf_or(self):
        left = self.cf_and()
        while self.at("||"):
            self.i += 1
            left = self._combine(Or, left, self.cf_and())
        return left

    def cf_and(self):
        left = self.cf_not()
        while self.at("&&", ","):
            self.i += 1
            left = self._combine(And, left, self.cf_not())
        return left

    def cf_not(self):
        self.enter()
        try:
            if self.at("!"):
                self.i += 1
                node, bare = self.cf_not()
                return Not(node), bare
            if self.at("("):
                self.i += 1
                inner = self.cf_or()
                self.expect(")")
                return inner
            if self.at("true"):
                self.i += 1
                return Top(), True
            if self.at("["):
                return self.post_int(), False
            return self.atom(), True
        finally:
            self.leave()

    def post_int(self):
        self.expect("[")
        pairs = []
        if not self.at("]"):
            while True:
                var_tok = self.tok
                var = self.variable()
                self.expect("=")
                if any(v == var for v, _ in pairs):
                    raise self.error(f"{var} intervened twice", var_tok)
                pairs.append((var, self.value()))
                if not self.at(","):
                    break
                self.i += 1
        self.expect("]")
        body_tok = self.tok
        node, bare = self.cf_not()
        if not bare:
            raise self.error("interventions cannot be nested", body_tok)
        return PostInt(tuple(pairs), node)

    def atom(self):
        var = self.variable()
        if self.at("="):
            self.i += 1
            return Atom(var, self.value())
        if self.at("!="):
            self.i += 1
            return Not(Atom(var, self.value()))
        raise self.error(f"expected '=' after {var}")

    def variable(self) -> str:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected a variable, found {tok.text or 'end of input'!r}")
        if tok.text not in self.variables:
            if tok.text in self.scope:
                raise self.error(f"dummy {tok.text!r} used as a variable")
            raise self.error(f"undeclared variable {tok.text!r}")
        self.i += 1
        return tok.text

    def value(self):
        tok = self.tok
        if tok.kind == "num":
            if not tok.text.isdigit():
                raise self.error(f"value {tok.text!r} is not an integer")
            v = int(tok.text)
            if v >= self.c:
                raise self.error(f"value {v} outside Val = 0..{self.c - 1}")
            self.i += 1
            return v
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            if tok.text not in self.scope:
                raise self.error(f"unbound dummy {tok.text!r}")
            self.i += 1
            return tok.text
        raise self.error(f"expected a value, found {tok.text or 'end of input'!r}")


def parse_formula(text: str, variables: Sequence[str], c: int, max_depth: int = DEFAULT_MAX_DEPTH):
    p = _Parser(text, variables, c, max_depth)
    f = p.formula()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after formula")
    return f


def parse_term(text: str, variables: Sequence[str], c: int, max_depth: int = DEFAULT_MAX_DEPTH):
    p = _Parser(text, variables, c, max_depth)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return t


def parse_event(text: str, variables: Sequence[str], c: int, max_depth: int = DEFAULT_MAX_DEPTH):
    p = _Parser(text, variables, c, max_depth)
    e = p.event_root()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after event")
    return e
