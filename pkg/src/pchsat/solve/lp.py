"""Exact rational linear feasibility via a two-phase tableau simplex.

All unknowns are non-negative.  Strict rows are handled by one shared slack
``t`` in ``[0, 1]``: every strict row ``a.x > b`` becomes ``a.x - t >= b`` and
``t`` is maximised; the system is feasible iff the optimum is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

RELATIONS = ("<=", "<", "=", ">=", ">")
DEFAULT_MAX_PIVOTS = 20000

ZERO = Fraction(0)
ONE = Fraction(1)


class PivotLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    rel: str
    rhs: Fraction

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "coeffs", tuple(Fraction(a) for a in self.coeffs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    @property
    def strict(self) -> bool:
        return self.rel in ("<", ">")

    def holds(self, x: Sequence[Fraction]) -> bool:
        lhs = sum((a * v for a, v in zip(self.coeffs, x)), ZERO)
        return {
            "<=": lhs <= self.rhs, "<": lhs < self.rhs, "=": lhs == self.rhs,
            ">=": lhs >= self.rhs, ">": lhs > self.rhs,
        }[self.rel]


@dataclass(frozen=True)
class LinearSystem:
    """Rows over unknowns ``q_1..q_n`` (all ``>= 0``).

    ``normalized`` adds ``sum q = 1`` and ``positive`` adds ``q_j > 0``.
    """

    num_vars: int
    constraints: tuple[Constraint, ...] = ()
    normalized: bool = False
    positive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for con in self.constraints:
            if len(con.coeffs) != self.num_vars:
                raise ValueError("constraint width does not match num_vars")

    def all_rows(self) -> list[Constraint]:
        rows = list(self.constraints)
        n = self.num_vars
        if self.normalized:
            rows.append(Constraint((ONE,) * n, "=", ONE))
        if self.positive:
            for j in range(n):
                rows.append(Constraint(tuple(ONE if i == j else ZERO for i in range(n)), ">", ZERO))
        return rows

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        return all(v >= 0 for v in x) and all(r.holds(x) for r in self.all_rows())


@dataclass
class LpResult:
    feasible: bool
    point: tuple[Fraction, ...] | None = None
    certificate: tuple[int, ...] | None = None
    pivots: int = 0
    stats: dict = field(default_factory=dict)


def _pivot(rows, obj_rows, r, col):
    prow = rows[r]
    pv = prow[col]
    if pv != 1:
        rows[r] = prow = [a / pv for a in prow]
    for i, row in enumerate(rows):
        if i != r and row[col] != 0:
            f = row[col]
            rows[i] = [a - f * b for a, b in zip(row, prow)]
    for obj in obj_rows:
        if obj[col] != 0:
            f = obj[col]
            obj[:] = [a - f * b for a, b in zip(obj, prow)]


def _maximise(rows, basis, obj, allowed, budget):
    """Bland's-rule simplex on a canonical tableau; returns pivots used or None if unbounded."""
    used = 0
    width = len(obj) - 1
    while True:
        col = next((j for j in range(width) if allowed[j] and obj[j] > 0), None)
        if col is None:
            return used
        best = None
        for i, row in enumerate(rows):
            a = row[col]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return None
        if used >= budget:
            raise PivotLimitExceeded(f"more than {budget} pivots")
        r = best[1]
        _pivot(rows, [obj], r, col)
        basis[r] = col
        used += 1


def _solve(n: int, rows_in: list[Constraint], max_pivots: int) -> tuple[bool, tuple[Fraction, ...] | None, int]:
    strict = any(r.strict for r in rows_in)
    # Column layout: x_0..x_{n-1}, [t], slacks..., artificials...
    nt = n + (1 if strict else 0)
    t_col = n if strict else None
    spec = []
    for con in rows_in:
        a = list(con.coeffs)
        if strict:
            a.append(ZERO)
        b = con.rhs
        rel = con.rel
        if rel == ">":
            a[t_col] = -ONE
            rel = ">="
        elif rel == "<":
            a[t_col] = ONE
            rel = "<="
        spec.append((a, rel, b))
    if strict:
        spec.append(([ZERO] * n + [ONE], "<=", ONE))
    # Normalise to b >= 0.
    norm = []
    for a, rel, b in spec:
        if b < 0:
            a = [-v for v in a]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        norm.append((a, rel, b))
    n_slack = sum(1 for _, rel, _ in norm if rel != "=")
    n_art = sum(1 for _, rel, _ in norm if rel != "<=")
    width = nt + n_slack + n_art
    rows, basis = [], []
    s_idx, a_idx = nt, nt + n_slack
    art_cols = []
    for a, rel, b in norm:
        row = a + [ZERO] * (n_slack + n_art) + [b]
        if rel == "<=":
            row[s_idx] = ONE
            basis.append(s_idx)
            s_idx += 1
        else:
            if rel == ">=":
                row[s_idx] = -ONE
                s_idx += 1
            row[a_idx] = ONE
            basis.append(a_idx)
            art_cols.append(a_idx)
            a_idx += 1
        rows.append(row)
    pivots = 0
    allowed = [True] * width
    if art_cols:
        obj = [ZERO] * (width + 1)
        for j in art_cols:
            obj[j] = -ONE
        for i, bcol in enumerate(basis):
            if bcol in art_cols:
                obj = [o + v for o, v in zip(obj, rows[i])]
        used = _maximise(rows, basis, obj, allowed, max_pivots)
        pivots += used
        if obj[-1] != 0:
            return False, None, pivots
        # Drive zero-valued artificials out of the basis, dropping redundant rows.
        art_set = set(art_cols)
        i = 0
        while i < len(rows):
            if basis[i] in art_set:
                col = next((j for j in range(nt + n_slack) if rows[i][j] != 0), None)
                if col is None:
                    del rows[i]
                    del basis[i]
                    continue
                _pivot(rows, [], i, col)
                basis[i] = col
                pivots += 1
            i += 1
        for j in art_cols:
            allowed[j] = False
    if strict:
        obj = [ZERO] * (width + 1)
        obj[t_col] = ONE
        for i, bcol in enumerate(basis):
            if bcol == t_col:
                obj = [o - v for o, v in zip(obj, rows[i])]
                obj[t_col] = ZERO
        used = _maximise(rows, basis, obj, allowed, max_pivots - pivots)
        pivots += used or 0
    x = [ZERO] * width
    for i, bcol in enumerate(basis):
        x[bcol] = rows[i][-1]
    if strict and x[t_col] <= 0:
        return False, None, pivots
    return True, tuple(x[:n]), pivots


def _iis(n: int, rows: list[Constraint], max_pivots: int) -> tuple[int, ...]:
    """Deletion filter: a subset of row indices that is still infeasible and minimal."""
    keep = list(range(len(rows)))
    for idx in list(keep):
        trial = [k for k in keep if k != idx]
        feasible, _, _ = _solve(n, [rows[k] for k in trial], max_pivots)
        if not feasible:
            keep = trial
    return tuple(keep)


def linear_feasibility_exact(
    sys: LinearSystem, max_pivots: int = DEFAULT_MAX_PIVOTS, certificate: bool = True
) -> LpResult:
    """An exact rational point satisfying ``sys`` or an infeasibility certificate.

    The certificate lists indices into ``sys.all_rows()`` forming an
    irreducible infeasible subsystem (non-negativity is implicit).
    """
    rows = sys.all_rows()
    feasible, point, pivots = _solve(sys.num_vars, rows, max_pivots)
    if feasible:
        if not sys.satisfied_by(point):
            raise AssertionError("simplex returned a point violating the system")
        return LpResult(True, point, None, pivots)
    cert = _iis(sys.num_vars, rows, max_pivots) if certificate else None
    return LpResult(False, None, cert, pivots)


def feasible_point(
    n: int, rows: list[Constraint], max_pivots: int = DEFAULT_MAX_PIVOTS
) -> tuple[Fraction, ...] | None:
    """Internal fast path: a point or ``None``, no certificate."""
    feasible, point, _ = _solve(n, rows, max_pivots)
    return point if feasible else None
