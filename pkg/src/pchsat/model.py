"""Structural causal models, Bayesian networks, DAGs and exact joint tables.

Every probability is a :class:`fractions.Fraction`; nothing here ever touches
floating point.  Objects are treated as immutable once built.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

Assignment = tuple[int, ...]


def as_fraction(value) -> Fraction:
    """Parse ``value`` as an exact rational.

    Accepts ``Fraction``/``int``, strings such as ``"474/10000"`` or
    ``"0.0474"``, and floats (read through their shortest decimal repr, so
    ``0.4`` becomes ``2/5``).
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(Fraction(num.strip()), Fraction(den.strip()))
        return Fraction(text)
    raise TypeError(f"cannot read {value!r} as a rational")


def assignments(c: int, k: int) -> Iterator[Assignment]:
    """All value tuples of length ``k`` over ``{0..c-1}`` in lexicographic order."""
    return itertools.product(range(c), repeat=k)


# ---------------------------------------------------------------------------
# DAG
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dag:
    vars: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate DAG vertex")
        known = set(self.vars)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ValueError(f"edge {a}->{b} mentions an unknown vertex")
            if a == b:
                raise ValueError(f"self-loop on {a}")
        self.topological_order  # raises on cycles

    @classmethod
    def complete(cls, order: Sequence[str]) -> "Dag":
        """Complete DAG with ``order[i] -> order[j]`` for every ``i < j``."""
        order = tuple(order)
        edges = {(order[i], order[j]) for i in range(len(order)) for j in range(i + 1, len(order))}
        return cls(order, frozenset(edges))

    def parents(self, v: str) -> tuple[str, ...]:
        """Parents of ``v``, listed in vertex declaration order."""
        return tuple(u for u in self.vars if (u, v) in self.edges)

    def children(self, v: str) -> tuple[str, ...]:
        return tuple(w for w in self.vars if (v, w) in self.edges)

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        # Kahn's algorithm; ties broken by declaration order so the result is stable.
        indeg = {v: 0 for v in self.vars}
        for _, b in self.edges:
            indeg[b] += 1
        order: list[str] = []
        ready = [v for v in self.vars if indeg[v] == 0]
        while ready:
            v = ready.pop(0)
            order.append(v)
            for w in self.children(v):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
            ready.sort(key=self.vars.index)
        if len(order) != len(self.vars):
            raise ValueError("edge relation is cyclic")
        return tuple(order)

    def is_supergraph_of(self, other: "Dag") -> bool:
        return set(self.vars) == set(other.vars) and other.edges <= self.edges


# ---------------------------------------------------------------------------
# Structural causal models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExogenousSpec:
    """Exogenous variables with an explicit list of positive-probability points.

    ``support`` holds ``(u, P(u))`` pairs; assignments omitted from it have
    probability zero.  In Markovian mode ``marginals`` records the declared
    per-variable distributions and the support must be their product.
    """

    u_vars: tuple[str, ...]
    domains: Mapping[str, int]
    support: tuple[tuple[Assignment, Fraction], ...]
    markovian: bool = False
    marginals: Mapping[str, tuple[Fraction, ...]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "u_vars", tuple(self.u_vars))
        object.__setattr__(self, "domains", dict(self.domains))
        object.__setattr__(
            self, "support", tuple((tuple(u), as_fraction(p)) for u, p in self.support)
        )
        if self.marginals is not None:
            object.__setattr__(
                self,
                "marginals",
                {k: tuple(as_fraction(x) for x in v) for k, v in self.marginals.items()},
            )

    @classmethod
    def joint(cls, domains: Mapping[str, int], support: Iterable) -> "ExogenousSpec":
        """Semi-Markovian exogenous spec; ``domains`` must be an ordered mapping."""
        return cls(tuple(domains), dict(domains), tuple(support))

    @classmethod
    def independent(cls, marginals: Mapping[str, Sequence]) -> "ExogenousSpec":
        """Markovian spec whose support is the product of the given marginals."""
        names = tuple(marginals)
        margs = {k: tuple(as_fraction(x) for x in v) for k, v in marginals.items()}
        support = []
        for u in itertools.product(*(range(len(margs[k])) for k in names)):
            p = Fraction(1)
            for k, val in zip(names, u):
                p *= margs[k][val]
            if p > 0:
                support.append((u, p))
        return cls(names, {k: len(margs[k]) for k in names}, tuple(support), True, margs)

    def probability(self, u: Assignment) -> Fraction:
        for point, p in self.support:
            if point == tuple(u):
                return p
        return Fraction(0)


@dataclass(frozen=True)
class Mechanism:
    """``target := table[(parent values..., exo values...)]``."""

    target: str
    parents: tuple[str, ...]
    exo_args: tuple[str, ...]
    table: Mapping[tuple[int, ...], int]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "exo_args", tuple(self.exo_args))
        object.__setattr__(self, "table", {tuple(k): int(v) for k, v in self.table.items()})

    @classmethod
    def constant(cls, target: str, value: int) -> "Mechanism":
        return cls(target, (), (), {(): value})

    @classmethod
    def from_function(cls, target, parents, exo_args, c, exo_domains, fn) -> "Mechanism":
        """Tabulate ``fn(*parent_values, *exo_values)`` over the full argument domain."""
        parents, exo_args = tuple(parents), tuple(exo_args)
        ranges = [range(c)] * len(parents) + [range(exo_domains[e]) for e in exo_args]
        table = {args: fn(*args) for args in itertools.product(*ranges)}
        return cls(target, parents, exo_args, table)

    def __call__(self, parent_values: Sequence[int], exo_values: Sequence[int]) -> int:
        return self.table[tuple(parent_values) + tuple(exo_values)]


@dataclass(frozen=True)
class Scm:
    c: int
    x_vars: tuple[str, ...]
    mechanisms: Mapping[str, Mechanism]
    exo: ExogenousSpec

    def __post_init__(self):
        object.__setattr__(self, "x_vars", tuple(self.x_vars))
        object.__setattr__(self, "mechanisms", dict(self.mechanisms))

    @cached_property
    def order(self) -> tuple[str, ...]:
        """A topological order of the endogenous variables (raises if cyclic)."""
        edges = {(p, m.target) for m in self.mechanisms.values() for p in m.parents}
        return Dag(self.x_vars, frozenset(edges)).topological_order

    @cached_property
    def _u_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.exo.u_vars)}

    def causal_diagram(self) -> Dag:
        edges = {(p, m.target) for m in self.mechanisms.values() for p in m.parents}
        return Dag(self.x_vars, frozenset(edges))


def evaluate_endogenous(scm: Scm, u: Sequence[int]) -> Assignment:
    """Endogenous values induced by exogenous assignment ``u`` (ordered like ``scm.x_vars``)."""
    u = tuple(u)
    values: dict[str, int] = {}
    for var in scm.order:
        mech = scm.mechanisms[var]
        key = tuple(values[p] for p in mech.parents) + tuple(u[scm._u_index[e]] for e in mech.exo_args)
        values[var] = mech.table[key]
    return tuple(values[v] for v in scm.x_vars)


def apply_intervention(scm: Scm, ints: Sequence[tuple[str, int]]) -> Scm:
    """Replace the mechanism of each intervened variable by a constant."""
    ints = list(ints)
    if not ints:
        return scm
    seen = set()
    for var, value in ints:
        if var in seen:
            raise ValueError(f"variable {var} intervened twice")
        seen.add(var)
        if var not in scm.mechanisms:
            raise ValueError(f"unknown endogenous variable {var}")
        if not (isinstance(value, int) and 0 <= value < scm.c):
            raise ValueError(f"value {value!r} for {var} is outside Val = 0..{scm.c - 1}")
    mechs = dict(scm.mechanisms)
    for var, value in ints:
        mechs[var] = Mechanism.constant(var, value)
    return Scm(scm.c, scm.x_vars, mechs, scm.exo)


# ---------------------------------------------------------------------------
# Joint tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointTable:
    c: int
    x_vars: tuple[str, ...]
    entries: Mapping[Assignment, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "x_vars", tuple(self.x_vars))
        clean = {}
        for k, v in self.entries.items():
            v = as_fraction(v)
            if v < 0:
                raise ValueError(f"negative probability at {k}")
            if v > 0:
                clean[tuple(k)] = v
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def __getitem__(self, x: Sequence[int]) -> Fraction:
        return self.entries.get(tuple(x), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def marginal(self, keep: Sequence[str]) -> "JointTable":
        idx = [self.x_vars.index(v) for v in keep]
        out: dict[Assignment, Fraction] = {}
        for x, p in self.entries.items():
            key = tuple(x[i] for i in idx)
            out[key] = out.get(key, Fraction(0)) + p
        return JointTable(self.c, tuple(keep), out)

    def probability(self, predicate) -> Fraction:
        """Sum of entries whose assignment dict satisfies ``predicate``."""
        total = Fraction(0)
        for x, p in self.entries.items():
            if predicate(dict(zip(self.x_vars, x))):
                total += p
        return total

    @property
    def support_size(self) -> int:
        return len(self.entries)


def joint_distribution(scm: Scm) -> JointTable:
    out: dict[Assignment, Fraction] = {}
    for u, p in scm.exo.support:
        x = evaluate_endogenous(scm, u)
        out[x] = out.get(x, Fraction(0)) + p
    return JointTable(scm.c, scm.x_vars, out)


def count_support_u(scm: Scm) -> int:
    return sum(1 for _, p in scm.exo.support if p > 0)


def count_support_x(scm: Scm) -> int:
    return joint_distribution(scm).support_size


def lift_joint_to_scm(jt: JointTable) -> Scm:
    """Semi-Markovian SCM with ``X_i := U_i`` whose exogenous law is ``jt`` itself."""
    u_names = tuple(f"U_{v}" for v in jt.x_vars)
    exo = ExogenousSpec(u_names, {u: jt.c for u in u_names}, tuple(jt.entries.items()))
    mechs = {
        v: Mechanism.from_function(v, (), (u,), jt.c, exo.domains, lambda val: val)
        for v, u in zip(jt.x_vars, u_names)
    }
    return Scm(jt.c, jt.x_vars, mechs, exo)


# ---------------------------------------------------------------------------
# Bayesian networks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bn:
    """``cpts[v][parent_values]`` is the row ``P(v = . | parents)``; parents follow ``dag.parents(v)``."""

    dag: Dag
    c: int
    cpts: Mapping[str, Mapping[Assignment, tuple[Fraction, ...]]]

    def __post_init__(self):
        cpts = {}
        for v, rows in self.cpts.items():
            cpts[v] = {tuple(k): tuple(as_fraction(x) for x in row) for k, row in rows.items()}
        object.__setattr__(self, "cpts", cpts)

    @property
    def x_vars(self) -> tuple[str, ...]:
        return self.dag.vars

    def validate(self) -> list[str]:
        problems = []
        for v in self.dag.vars:
            rows = self.cpts.get(v)
            if rows is None:
                problems.append(f"missing CPT for {v}")
                continue
            k = len(self.dag.parents(v))
            for pa in assignments(self.c, k):
                row = rows.get(pa)
                if row is None:
                    problems.append(f"CPT of {v} lacks parent assignment {pa}")
                elif len(row) != self.c or any(x < 0 for x in row) or sum(row) != 1:
                    problems.append(f"CPT row {v}|{pa} is not a distribution over Val")
        return problems


def bn_joint_distribution(bn: Bn) -> JointTable:
    order = bn.dag.vars
    parents = {v: [order.index(p) for p in bn.dag.parents(v)] for v in order}
    out = {}
    for x in assignments(bn.c, len(order)):
        p = Fraction(1)
        for i, v in enumerate(order):
            p *= bn.cpts[v][tuple(x[j] for j in parents[v])][x[i]]
            if p == 0:
                break
        if p:
            out[x] = p
    return JointTable(bn.c, order, out)


def bn_from_joint(jt: JointTable, order: Sequence[str] | None = None) -> Bn:
    """Chain-rule factorisation of ``jt`` over the complete DAG of ``order``.

    Conditional rows for zero-probability contexts are uniform.
    """
    order = tuple(order or jt.x_vars)
    table = jt.marginal(order)
    cpts: dict[str, dict[Assignment, tuple[Fraction, ...]]] = {}
    for i, v in enumerate(order):
        prefix = table.marginal(order[: i + 1])
        context = table.marginal(order[:i]) if i else None
        rows = {}
        for pa in assignments(jt.c, i):
            denom = context[pa] if context is not None else Fraction(1)
            if denom == 0:
                rows[pa] = tuple(Fraction(1, jt.c) for _ in range(jt.c))
            else:
                rows[pa] = tuple(prefix[pa + (x,)] / denom for x in range(jt.c))
        cpts[v] = rows
    return Bn(Dag.complete(order), jt.c, cpts)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    invariant: str
    location: str

    def __str__(self) -> str:
        return f"{self.invariant} ({self.location})"


def validate_scm(scm: Scm) -> list[Violation]:
    out: list[Violation] = []
    exo = scm.exo
    if scm.c < 1:
        out.append(Violation("domain size < 1", "domain"))
    if len(set(scm.x_vars)) != len(scm.x_vars):
        out.append(Violation("duplicate endogenous variable", "x_vars"))
    for v in scm.x_vars:
        if v not in scm.mechanisms:
            out.append(Violation("missing mechanism", v))
    for name, m in scm.mechanisms.items():
        where = f"mechanism {name}"
        if m.target != name or name not in scm.x_vars:
            out.append(Violation("mechanism target mismatch", where))
            continue
        if m.target in m.parents:
            out.append(Violation("target among its own parents", where))
        if any(p not in scm.x_vars for p in m.parents):
            out.append(Violation("unknown parent", where))
            continue
        if any(e not in exo.domains for e in m.exo_args):
            out.append(Violation("unknown exogenous argument", where))
            continue
        ranges = [range(scm.c)] * len(m.parents) + [range(exo.domains[e]) for e in m.exo_args]
        missing = [k for k in itertools.product(*ranges) if k not in m.table]
        if missing:
            out.append(Violation("table not total", f"{where} at {missing[0]}"))
        if any(not 0 <= val < scm.c for val in m.table.values()):
            out.append(Violation("table value outside Val", where))
    try:
        scm.order
    except (ValueError, KeyError):
        out.append(Violation("not recursive", "parent relation"))

    if set(exo.domains) != set(exo.u_vars):
        out.append(Violation("exogenous domain declarations mismatch", "exo"))
    seen = set()
    total = Fraction(0)
    for u, p in exo.support:
        where = f"support point {u}"
        if p <= 0:
            out.append(Violation("non-positive support probability", where))
        if u in seen:
            out.append(Violation("duplicate support point", where))
        seen.add(u)
        if len(u) != len(exo.u_vars) or any(
            not 0 <= val < exo.domains.get(name, 0) for name, val in zip(exo.u_vars, u)
        ):
            out.append(Violation("support point outside exogenous domain", where))
        total += p
    if total != 1:
        out.append(Violation("support sum ≠ 1", f"sum = {total}"))

    if exo.markovian:
        owner: dict[str, str] = {}
        for name, m in scm.mechanisms.items():
            for e in m.exo_args:
                if e in owner and owner[e] != name:
                    out.append(Violation("Markovian mechanisms share exogenous input", f"{e}: {owner[e]}, {name}"))
                owner.setdefault(e, name)
        if exo.marginals is None:
            out.append(Violation("Markovian spec without marginals", "exo"))
        else:
            expected = ExogenousSpec.independent({k: exo.marginals[k] for k in exo.u_vars})
            if dict(expected.support) != dict(exo.support):
                out.append(Violation("Markovian support is not the product of its marginals", "exo"))
    return out


# ---------------------------------------------------------------------------
# Random models
# ---------------------------------------------------------------------------


def _random_simplex(rng: random.Random, k: int) -> list[Fraction]:
    weights = [rng.randint(1, 9) for _ in range(k)]
    s = sum(weights)
    return [Fraction(w, s) for w in weights]


def random_scm(
    seed: int,
    n: int,
    c: int,
    p: int,
    dag: Dag | None = None,
    markovian: bool = False,
) -> Scm:
    """Seeded random SCM with at most ``p`` positive exogenous points.

    Without ``dag`` the variables are ``X1..Xn`` and each mechanism reads a
    random subset of its predecessors; with ``dag`` the parent sets are
    exactly the DAG's.  ``markovian`` gives every variable a private
    exogenous input with independent marginals.
    """
    if min(n, c, p) < 1:
        raise ValueError("n, c and p must be positive")
    rng = random.Random(seed)
    if dag is not None:
        names = dag.vars
        order = dag.topological_order
        parents = {v: dag.parents(v) for v in names}
    else:
        names = tuple(f"X{i + 1}" for i in range(n))
        order = names
        parents = {}
        for i, v in enumerate(names):
            parents[v] = tuple(u for u in names[:i] if rng.random() < 0.5)

    if markovian:
        sizes = {}
        budget = p
        for v in order:
            k = rng.randint(1, budget)
            sizes[v] = k
            budget //= k
        marginals = {f"U_{v}": _random_simplex(rng, sizes[v]) for v in names}
        exo = ExogenousSpec.independent(marginals)
        exo_args = {v: (f"U_{v}",) for v in names}
    else:
        k = rng.randint(1, p)
        exo = ExogenousSpec(("U",), {"U": k}, tuple(((j,), q) for j, q in enumerate(_random_simplex(rng, k))))
        exo_args = {v: ("U",) for v in names}

    mechs = {}
    for v in order:
        ranges = [range(c)] * len(parents[v]) + [range(exo.domains[e]) for e in exo_args[v]]
        table = {key: rng.randrange(c) for key in itertools.product(*ranges)}
        mechs[v] = Mechanism(v, parents[v], exo_args[v], table)
    return Scm(c, names, {v: mechs[v] for v in names}, exo)
