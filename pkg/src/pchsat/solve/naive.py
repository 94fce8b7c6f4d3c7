"""Incomplete polynomial feasibility: rational grid search plus local refinement.

Every returned point is verified exactly; failure to find one proves
nothing, so callers must report it as unknown.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .lp import Constraint, LinearSystem, linear_feasibility_exact
from .qexpr import Lin, Literal, linear_form, q_float

DEFAULT_GRID_POINTS = 3000


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write ``total`` as an ordered sum of ``parts`` non-negative integers."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def simplex_grid(k: int, max_points: int) -> Iterator[tuple[Fraction, ...]]:
    """Uniform point first, then the grids with denominator 1, 2, ... (duplicates skipped)."""
    seen = set()
    uniform = tuple(Fraction(1, k) for _ in range(k))
    seen.add(uniform)
    yield uniform
    emitted = 1
    n = 1
    while emitted < max_points:
        for comp in compositions(n, k):
            pt = tuple(Fraction(a, n) for a in comp)
            if pt in seen:
                continue
            seen.add(pt)
            yield pt
            emitted += 1
            if emitted >= max_points:
                return
        n += 1
        if n > 10 * max_points:
            return


def box_grid(k: int, max_points: int) -> Iterator[tuple[Fraction, ...]]:
    seen = set()
    emitted = 0
    n = 1
    while emitted < max_points and n <= 64:
        for comp in itertools.product(range(n + 1), repeat=k):
            pt = tuple(Fraction(a, n) for a in comp)
            if pt in seen:
                continue
            seen.add(pt)
            yield pt
            emitted += 1
            if emitted >= max_points:
                return
        n *= 2
    return


def violation(lits: Sequence[Literal], env: Callable) -> float:
    total = 0.0
    for lit in lits:
        v = q_float(lit.expr, env)
        if v is None:
            total += 1.0
        elif lit.rel == "=":
            total += abs(v)
        elif v < 0 or (lit.rel == ">" and v <= 0):
            total += max(-v, 0.0) + (1e-9 if lit.rel == ">" else 0.0)
    return total


def refine(
    lits: Sequence[Literal],
    start: Sequence[Fraction],
    exact_ok: Callable[[tuple[Fraction, ...]], bool],
    float_env: Callable[[Sequence[float]], Callable],
    simplex: bool = True,
    rounds: int = 60,
) -> tuple[Fraction, ...] | None:
    """Greedy pairwise mass transfers (or coordinate moves on the box) with shrinking steps.

    Candidate points are kept rational throughout so each can be checked exactly.
    """
    x = list(start)
    k = len(x)
    cur = violation(lits, float_env([float(v) for v in x]))
    step = Fraction(1, 4)
    for _ in range(rounds):
        best = None
        if simplex:
            moves = [(i, j) for i in range(k) for j in range(k) if i != j]
        else:
            moves = [(i, s) for i in range(k) for s in (1, -1)]
        for mv in moves:
            y = list(x)
            if simplex:
                i, j = mv
                d = min(step, y[j])
                if d <= 0:
                    continue
                y[i] += d
                y[j] -= d
            else:
                i, s = mv
                y[i] = min(Fraction(1), max(Fraction(0), y[i] + s * step))
                if y[i] == x[i]:
                    continue
            val = violation(lits, float_env([float(v) for v in y]))
            if val < cur - 1e-15 and (best is None or val < best[0]):
                best = (val, y)
        if best is None:
            step /= 2
            if step < Fraction(1, 2**20):
                break
            continue
        cur, x = best
        if cur == 0.0 or cur < 1e-12:
            if exact_ok(tuple(x)):
                return tuple(x)
    return tuple(x) if exact_ok(tuple(x)) else None


def poly_feasibility_naive(
    literals: Sequence[Literal],
    num_vars: int,
    normalized: bool = True,
    positive: bool = False,
    max_points: int = DEFAULT_GRID_POINTS,
) -> tuple[Fraction, ...] | None:
    """Search for ``q`` with every literal true; keys of the literals are ``0..num_vars-1``.

    With ``normalized`` the search ranges over the probability simplex,
    otherwise over the box ``[0, 1]^n``.  Linear inputs go straight to the
    exact LP.  ``None`` means nothing was found, not that nothing exists.
    """
    forms = [linear_form(lit.expr) for lit in literals]
    if all(isinstance(lit.expr, Lin) for lit in literals):
        rows = [Constraint(_dense(lf, num_vars), lit.rel, -lf.const) for lf, lit in zip(forms, literals)]
        res = linear_feasibility_exact(LinearSystem(num_vars, rows, normalized, positive), certificate=False)
        return res.point if res.feasible else None

    def exact_ok(x):
        if positive and any(v <= 0 for v in x):
            return False
        if normalized and sum(x) != 1:
            return False
        env = lambda k: x[k]  # noqa: E731
        return all(lit.holds(env) for lit in literals)

    def float_env(xf):
        return lambda k: xf[k]

    grid = simplex_grid(num_vars, max_points) if normalized else box_grid(num_vars, max_points)
    scored = []
    for pt in grid:
        if exact_ok(pt):
            return pt
        scored.append((violation(literals, float_env([float(v) for v in pt])), pt))
    scored.sort(key=lambda s: s[0])
    for _, pt in scored[:5]:
        found = refine(literals, pt, exact_ok, float_env, simplex=normalized)
        if found is not None:
            return found
    return None


def _dense(lf: Lin, n: int) -> tuple[Fraction, ...]:
    d = lf.as_dict()
    return tuple(d.get(j, Fraction(0)) for j in range(n))
