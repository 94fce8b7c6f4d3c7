"""Discrete skeletons of bounded models.

A *profile* fixes, for one exogenous support point, how every variable
responds to its parents.  A model with ``p`` support points is a multiset of
``p`` profiles plus their probabilities.  Only the behaviour of a profile
under the interventions a formula mentions matters, which the search
exploits through *signatures*: the truth vector of the formula's events.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from ..lang.ast import And, Atom, Not, Or, PostInt, Top
from ..model import Dag, ExogenousSpec, Mechanism, Scm, assignments

Worlds = Mapping[tuple, tuple[int, ...]]


class StructureLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelClass:
    """Variables with fixed parent sets and a topological order."""

    vars: tuple[str, ...]
    order: tuple[str, ...]
    parents: Mapping[str, tuple[str, ...]]

    @staticmethod
    def from_dag(dag: Dag) -> "ModelClass":
        return ModelClass(dag.vars, dag.topological_order, {v: dag.parents(v) for v in dag.vars})

    def dag(self) -> Dag:
        return Dag(self.vars, frozenset((p, v) for v in self.vars for p in self.parents[v]))


def intervention_key(pairs) -> tuple:
    return tuple(sorted(pairs))


# ---------------------------------------------------------------------------
# event evaluation against precomputed worlds
# ---------------------------------------------------------------------------


def _prop_holds(e, x: tuple[int, ...], index: Mapping[str, int]) -> bool:
    if isinstance(e, Atom):
        return x[index[e.var]] == e.value
    if isinstance(e, Top):
        return True
    if isinstance(e, Not):
        return not _prop_holds(e.arg, x, index)
    if isinstance(e, And):
        return _prop_holds(e.left, x, index) and _prop_holds(e.right, x, index)
    if isinstance(e, Or):
        return _prop_holds(e.left, x, index) or _prop_holds(e.right, x, index)
    raise TypeError(f"not a propositional event: {e!r}")


def event_holds(e, worlds: Worlds, index: Mapping[str, int]) -> bool:
    if isinstance(e, PostInt):
        return _prop_holds(e.event, worlds[intervention_key(e.intervention)], index)
    if isinstance(e, Not):
        return not event_holds(e.arg, worlds, index)
    if isinstance(e, And):
        return event_holds(e.left, worlds, index) and event_holds(e.right, worlds, index)
    if isinstance(e, Or):
        return event_holds(e.left, worlds, index) or event_holds(e.right, worlds, index)
    raise TypeError(f"not a counterfactual event: {e!r}")


def event_interventions(e) -> set[tuple]:
    if isinstance(e, PostInt):
        return {intervention_key(e.intervention)}
    if isinstance(e, Not):
        return event_interventions(e.arg)
    return event_interventions(e.left) | event_interventions(e.right)


# ---------------------------------------------------------------------------
# restricted response enumeration
# ---------------------------------------------------------------------------


def restricted_profiles(
    mc: ModelClass, c: int, interventions: Sequence[tuple], limit: int | None = None
) -> Iterator[tuple[Worlds, dict]]:
    """Every distinct behaviour of one support point under ``interventions``.

    Only the table entries actually queried under some intervention are
    chosen; the yielded profile maps each variable to ``{parent key: value}``.
    """
    interventions = list(interventions)
    fixed = [dict(i) for i in interventions]
    index = {v: k for k, v in enumerate(mc.vars)}
    states = [[0] * len(mc.vars) for _ in interventions]
    profile: dict[str, dict] = {}
    count = 0

    def rec(i):
        nonlocal count
        if i == len(mc.order):
            count += 1
            if limit is not None and count > limit:
                raise StructureLimitExceeded(f"more than {limit} response profiles")
            worlds = {key: tuple(st) for key, st in zip(interventions, states)}
            yield worlds, {v: dict(t) for v, t in profile.items()}
            return
        v = mc.order[i]
        pa_idx = [index[p] for p in mc.parents[v]]
        keys = []
        for j, fx in enumerate(fixed):
            if v in fx:
                states[j][index[v]] = fx[v]
            else:
                k = tuple(states[j][q] for q in pa_idx)
                if k not in keys:
                    keys.append(k)
        keys.sort()
        for values in itertools.product(range(c), repeat=len(keys)):
            table = dict(zip(keys, values))
            for j, fx in enumerate(fixed):
                if v not in fx:
                    states[j][index[v]] = table[tuple(states[j][q] for q in pa_idx)]
            profile[v] = table
            yield from rec(i + 1)
        profile.pop(v, None)

    yield from rec(0)


@dataclass
class SignatureSet:
    """Distinct signatures of one model class with a representative profile each."""

    model_class: ModelClass
    signatures: list[tuple[bool, ...]]
    representatives: list[dict]
    profiles_seen: int


def signature_set(
    mc: ModelClass, c: int, events: Sequence, limit: int | None = None
) -> SignatureSet:
    ints = sorted(set().union(*(event_interventions(e) for e in events))) if events else [()]
    index = {v: k for k, v in enumerate(mc.vars)}
    seen: dict[tuple, int] = {}
    sigs, reps = [], []
    total = 0
    for worlds, prof in restricted_profiles(mc, c, ints, limit):
        total += 1
        sig = tuple(event_holds(e, worlds, index) for e in events)
        if sig not in seen:
            seen[sig] = len(sigs)
            sigs.append(sig)
            reps.append(prof)
    return SignatureSet(mc, sigs, reps, total)


def build_witness(mc: ModelClass, c: int, rows: Sequence[dict], weights: Sequence[Fraction]) -> Scm:
    """SCM with one exogenous variable ``U`` whose point ``j`` follows ``rows[j]``.

    Table entries never queried by the formula default to 0.
    """
    k = len(rows)
    mechs = {}
    for v in mc.vars:
        pa = mc.parents[v]
        table = {}
        for key in assignments(c, len(pa)):
            for j, prof in enumerate(rows):
                table[key + (j,)] = prof.get(v, {}).get(key, 0)
        mechs[v] = Mechanism(v, pa, ("U",), table)
    exo = ExogenousSpec.joint({"U": k}, [((j,), w) for j, w in enumerate(weights)])
    return Scm(c, mc.vars, mechs, exo)


# ---------------------------------------------------------------------------
# full structures (public enumeration)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateStructure:
    """``p`` support rows; each row holds one full response table per variable.

    A table lists the variable's value for every parent assignment in
    lexicographic order.
    """

    model_class: ModelClass
    c: int
    rows: tuple[tuple[tuple[int, ...], ...], ...]

    def worlds(self, row: int, interventions: Sequence[tuple]) -> Worlds:
        mc = self.model_class
        index = {v: k for k, v in enumerate(mc.vars)}
        tables = self.rows[row]
        out = {}
        for key in interventions:
            fx = dict(key)
            x = [0] * len(mc.vars)
            for v in mc.order:
                if v in fx:
                    x[index[v]] = fx[v]
                    continue
                pos = 0
                for p in mc.parents[v]:
                    pos = pos * self.c + x[index[p]]
                x[index[v]] = tables[index[v]][pos]
            out[key] = tuple(x)
        return out

    def to_scm(self, weights: Sequence[Fraction]) -> Scm:
        mc = self.model_class
        rows = []
        for tables in self.rows:
            prof = {}
            for vi, v in enumerate(mc.vars):
                keys = list(assignments(self.c, len(mc.parents[v])))
                prof[v] = dict(zip(keys, tables[vi]))
            rows.append(prof)
        return build_witness(mc, self.c, rows, weights)


def full_profiles(mc: ModelClass, c: int) -> list[tuple[tuple[int, ...], ...]]:
    per_var = []
    for v in mc.vars:
        width = c ** len(mc.parents[v])
        per_var.append(list(itertools.product(range(c), repeat=width)))
    return list(itertools.product(*per_var))


def enumerate_model_structures(
    mc: ModelClass, c: int, p: int, limit: int | None = None
) -> Iterator[CandidateStructure]:
    """Multisets of ``p`` full profiles in nondecreasing lexicographic order."""
    profiles = full_profiles(mc, c)
    for n, rows in enumerate(itertools.combinations_with_replacement(profiles, p)):
        if limit is not None and n >= limit:
            raise StructureLimitExceeded(f"more than {limit} structures")
        yield CandidateStructure(mc, c, rows)


def default_model_class(cfg) -> ModelClass:
    """Parents from the dag, else the complete DAG of the ordering or of the declaration order."""
    if cfg.dag is not None:
        return ModelClass.from_dag(cfg.dag)
    return ModelClass.from_dag(Dag.complete(cfg.ordering if cfg.ordering is not None else cfg.vars))


def enumerate_structures(cfg) -> Iterator[CandidateStructure]:
    """Canonical stream of structures for ``cfg``; raises once ``cfg.max_structures`` is passed."""
    cfg.validate()
    yield from enumerate_model_structures(default_model_class(cfg), cfg.c, cfg.p, cfg.max_structures)


def structure_to_constraints(f, s: CandidateStructure, cfg):
    """Boolean combination of literals over the row probabilities ``q_0..q_{p-1}``.

    Keys of the returned literals are row indices.  ``sum q = 1`` and
    ``q_j > 0`` are implied by the model class and not included.
    """
    from ..transform import expand_sums
    from .qexpr import Lin, formula_to_boolean

    g = expand_sums(f, cfg.c, cfg.expansion_budget)
    index = {v: k for k, v in enumerate(s.model_class.vars)}
    cache: dict = {}

    def leaf(e):
        ints = sorted(event_interventions(e))
        rows = []
        for j in range(len(s.rows)):
            key = (j, tuple(ints))
            if key not in cache:
                cache[key] = s.worlds(j, ints)
            if event_holds(e, cache[key], index):
                rows.append(j)
        return Lin.make({j: 1 for j in rows})

    return formula_to_boolean(g, leaf)
