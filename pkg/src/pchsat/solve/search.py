"""Bounded satisfiability and validity.

The search fixes a model class (parent sets and a topological order), lists
the distinct signatures a single support point can have, and then asks for
at most ``p`` signatures with probabilities that make one DNF branch of the
formula true.  Linear branches are decided exactly by LP; polynomial ones
get an exact linear relaxation (which can refute) and a grid search (which
can only confirm).
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..evaluate import eval_formula
from ..lang.analysis import classify, free_dummies, variables_used
from ..lang.ast import FNot
from ..model import Dag, Scm, count_support_u, count_support_x, validate_scm
from ..transform import expand_sums
from .lp import Constraint, PivotLimitExceeded, feasible_point
from .naive import DEFAULT_GRID_POINTS, refine, simplex_grid, violation
from .qexpr import Lin, Literal, dnf_branches, formula_to_boolean, linear_form, substitute_constants
from .structures import (
    ModelClass, SignatureSet, StructureLimitExceeded, build_witness, signature_set,
)

BACKENDS = ("auto", "linear-exact", "poly-naive", "poly-export")

SAT = "SAT"
UNSAT = "UNSAT_WITHIN_BOUNDS"
UNKNOWN = "UNKNOWN"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolveConfig:
    vars: tuple[str, ...]
    c: int
    p: int
    dag: Dag | None = None
    ordering: tuple[str, ...] | None = None
    backend: str = "auto"
    max_structures: int = 500_000
    max_lp_pivots: int = 20_000
    max_subsets: int = 2_000_000
    time_budget: float | None = None
    grid_points: int = DEFAULT_GRID_POINTS
    expansion_budget: int = 10**6
    strict_markovian: bool = False
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.ordering is not None:
            object.__setattr__(self, "ordering", tuple(self.ordering))

    def validate(self) -> None:
        if self.p < 1:
            raise ConfigError("support bound p must be at least 1")
        if self.c < 1:
            raise ConfigError("domain size c must be at least 1")
        if len(set(self.vars)) != len(self.vars):
            raise ConfigError("duplicate variable names")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.dag is not None and set(self.dag.vars) != set(self.vars):
            raise ConfigError("dag vertices differ from the declared variables")
        if self.ordering is not None:
            if sorted(self.ordering) != sorted(self.vars):
                raise ConfigError("ordering is not a permutation of the declared variables")
            if self.dag is not None and self.dag.edges != Dag.complete(self.ordering).edges:
                raise ConfigError("ordering conflicts with the given dag")

    def model_classes(self, layer: int) -> list[ModelClass]:
        if self.dag is not None:
            return [ModelClass.from_dag(self.dag)]
        if self.ordering is not None:
            return [ModelClass.from_dag(Dag.complete(self.ordering))]
        if layer == 1:
            return [ModelClass.from_dag(Dag.complete(self.vars))]
        return [ModelClass.from_dag(Dag.complete(perm)) for perm in itertools.permutations(self.vars)]


@dataclass
class SatResult:
    verdict: str
    witness: Scm | None = None
    reason: str | None = None
    stats: dict = field(default_factory=dict)

    def __str__(self) -> str:
        return self.verdict if self.reason is None else f"{self.verdict} ({self.reason})"


class _Limit(Exception):
    pass


@dataclass
class _Outcome:
    status: str  # "sat" | "dead" | "unknown"
    sigs: tuple[int, ...] = ()
    weights: tuple[Fraction, ...] = ()
    reason: str | None = None


class _BranchSolver:
    """Decides one DNF branch over one signature set."""

    def __init__(self, sigset: SignatureSet, cfg: SolveConfig, deadline: float | None, stats: dict):
        self.S = sigset.signatures
        self.cfg = cfg
        self.deadline = deadline
        self.stats = stats

    def _tick(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Limit("time budget exhausted")

    def _dvec(self, lf: Lin) -> list[Fraction]:
        return [lf.const + sum((a for k, a in lf.coeffs if sig[k]), Fraction(0)) for sig in self.S]

    def _lp(self, cols: Sequence[int], rows: Sequence[tuple[list[Fraction], str]]):
        self.stats["lp_calls"] = self.stats.get("lp_calls", 0) + 1
        cons = [Constraint(tuple(d[j] for j in cols), rel, 0) for d, rel in rows]
        cons.append(Constraint((Fraction(1),) * len(cols), "=", 1))
        try:
            return feasible_point(len(cols), cons, self.cfg.max_lp_pivots)
        except PivotLimitExceeded as e:
            raise _Limit(str(e))

    @staticmethod
    def _prune_signs(rows, allowed: set[int]) -> set[int] | None:
        """Drop signatures that no solution can use; None when the branch is dead."""
        changed = True
        while changed:
            changed = False
            for d, rel in rows:
                vals = [d[j] for j in allowed]
                if not vals:
                    return None
                if rel == ">" and all(v <= 0 for v in vals):
                    return None
                keep = None
                if rel in (">=", "=") and all(v <= 0 for v in vals):
                    keep = {j for j in allowed if d[j] == 0}
                elif rel == "=" and all(v >= 0 for v in vals):
                    keep = {j for j in allowed if d[j] == 0}
                if keep is not None and keep != allowed:
                    allowed = keep
                    changed = True
                    if not allowed:
                        return None
        return allowed

    def solve(self, branch: Sequence[Literal], allow_grid: bool) -> _Outcome:
        self._tick()
        rows, nonlinear = [], []
        for lit in branch:
            lf = linear_form(lit.expr)
            if lf is None:
                nonlinear.append(lit)
            else:
                rows.append((self._dvec(lf), lit.rel))
        allowed = self._prune_signs(rows, set(range(len(self.S))))
        if allowed is None:
            return _Outcome("dead")
        cand = sorted(allowed)
        point = self._lp(cand, rows)
        if point is None:
            return _Outcome("dead")
        p = self.cfg.p
        if not nonlinear:
            support = [(j, w) for j, w in zip(cand, point) if w > 0]
            if len(support) <= p:
                return _Outcome("sat", tuple(j for j, _ in support), tuple(w for _, w in support))
        elif len(cand) <= p:
            return self._poly_leaf(branch, rows, cand, allow_grid)
        return self._subsets(branch, rows, cand, bool(nonlinear), allow_grid)

    def _subsets(self, branch, rows, cand, nonlinear: bool, allow_grid: bool) -> _Outcome:
        k = min(self.cfg.p, len(cand))
        hits = []
        for d, rel in rows:
            sets = []
            if rel == ">":
                sets.append(frozenset(i for i, j in enumerate(cand) if d[j] > 0))
            else:
                sets.append(frozenset(i for i, j in enumerate(cand) if d[j] >= 0))
                if rel == "=":
                    sets.append(frozenset(i for i, j in enumerate(cand) if d[j] <= 0))
            for s in sets:
                if len(s) < len(cand) and s not in hits:
                    hits.append(s)
        hits.sort(key=len)
        last = [max(h) if h else -1 for h in hits]
        undecided = []

        def rec(start: int, chosen: list[int]):
            slots = k - len(chosen)
            if slots == 0:
                self.stats["subsets"] = self.stats.get("subsets", 0) + 1
                if self.stats["subsets"] > self.cfg.max_subsets:
                    raise _Limit("subset limit exhausted")
                self._tick()
                cols = [cand[i] for i in chosen]
                if not nonlinear:
                    pt = self._lp(cols, rows)
                    if pt is None:
                        return None
                    support = [(j, w) for j, w in zip(cols, pt) if w > 0]
                    return _Outcome("sat", tuple(j for j, _ in support), tuple(w for _, w in support))
                out = self._poly_leaf(branch, rows, cols, allow_grid)
                if out.status == "unknown":
                    undecided.append(out.reason)
                    return None
                return out if out.status == "sat" else None
            chosen_set = set(chosen)
            packed: set[int] = set()
            need = 0
            for h, hl in zip(hits, last):
                if h & chosen_set:
                    continue
                if hl < start:
                    return None
                rest = {i for i in h if i >= start}
                if not rest & packed:
                    packed |= rest
                    need += 1
                    if need > slots:
                        return None
            for i in range(start, len(cand) - slots + 1):
                chosen.append(i)
                out = rec(i + 1, chosen)
                chosen.pop()
                if out is not None:
                    return out
            return None

        found = rec(0, [])
        if found is not None:
            return found
        if undecided:
            return _Outcome("unknown", reason=undecided[0])
        return _Outcome("dead")

    def _poly_leaf(self, branch, rows, cols, allow_grid: bool) -> _Outcome:
        seed = self._lp(cols, rows)
        if seed is None:
            return _Outcome("dead")
        if not allow_grid:
            return _Outcome("unknown", reason="polynomial constraints need the poly-naive or poly-export backend")
        S = self.S
        n_events = len(S[0]) if S else 0
        members = [[i for i, j in enumerate(cols) if S[j][e]] for e in range(n_events)]

        def env_of(w):
            cache = {}

            def env(e):
                if e not in cache:
                    cache[e] = sum((w[i] for i in members[e]), type(w[0])(0))
                return cache[e]

            return env

        def exact_ok(w):
            env = env_of(w)
            return all(lit.holds(env) for lit in branch)

        def float_env(wf):
            return env_of(wf)

        k = len(cols)
        tried = []
        for pt in itertools.chain([seed], simplex_grid(k, self.cfg.grid_points)):
            if exact_ok(pt):
                return self._sat(cols, pt)
            tried.append(pt)
        self._tick()
        scored = sorted(tried, key=lambda pt: violation(branch, float_env([float(v) for v in pt])))
        for pt in scored[:3]:
            found = refine(branch, pt, exact_ok, float_env, simplex=True, rounds=40)
            if found is not None:
                return self._sat(cols, found)
        return _Outcome("unknown", reason="grid search found no point for a polynomial branch")

    @staticmethod
    def _sat(cols, weights) -> _Outcome:
        support = [(j, w) for j, w in zip(cols, weights) if w > 0]
        return _Outcome("sat", tuple(j for j, _ in support), tuple(w for _, w in support))


def _constant_events(sigset: SignatureSet) -> dict[int, Fraction]:
    """Events that hold in every signature of the class, or in none."""
    sigs = sigset.signatures
    if not sigs:
        return {}
    return {k: Fraction(int(sigs[0][k])) for k in range(len(sigs[0])) if all(s[k] == sigs[0][k] for s in sigs)}


def _search_class(args):
    """Worker: first satisfying branch for one model class, in branch order."""
    sigset, tree, cfg, deadline, allow_grid = args
    stats: dict = {}
    solver = _BranchSolver(sigset, cfg, deadline, stats)
    tree = substitute_constants(tree, _constant_events(sigset))
    unknown = None
    try:
        for branch in dnf_branches(tree):
            stats["branches"] = stats.get("branches", 0) + 1
            out = solver.solve(branch, allow_grid)
            if out.status == "sat":
                return out, stats
            if out.status == "unknown" and unknown is None:
                unknown = out
    except _Limit as e:
        return _Outcome("unknown", reason=str(e)), stats
    return (unknown or _Outcome("dead")), stats


def _prepare(f, cfg: SolveConfig):
    cfg.validate()
    if free_dummies(f):
        raise ConfigError(f"formula has free dummies: {sorted(free_dummies(f))}")
    unknown_vars = variables_used(f) - set(cfg.vars)
    if unknown_vars:
        raise ConfigError(f"formula uses undeclared variables: {sorted(unknown_vars)}")
    g = expand_sums(f, cfg.c, cfg.expansion_budget)
    events: dict = {}

    def leaf(e):
        if e not in events:
            events[e] = len(events)
        return Lin.make({events[e]: 1})

    tree = formula_to_boolean(g, leaf)
    return tree, list(events)


def verify_witness(f, witness: Scm, cfg: SolveConfig) -> None:
    problems = validate_scm(witness)
    if problems:
        raise AssertionError(f"witness is not a valid SCM: {problems[0]}")
    if count_support_u(witness) > cfg.p:
        raise AssertionError("witness exceeds the support bound")
    if cfg.dag is not None and not cfg.dag.is_supergraph_of(witness.causal_diagram()):
        raise AssertionError("witness does not respect the dag")
    verdict = eval_formula(witness, f, cfg.expansion_budget)
    if not verdict.is_true:
        raise AssertionError(f"witness evaluates to {verdict}, not true")


def solve_sat(f, cfg: SolveConfig) -> SatResult:
    """Search the bounded model class of ``cfg`` for a model of ``f``."""
    start = time.monotonic()
    deadline = start + cfg.time_budget if cfg.time_budget else None
    tree, events = _prepare(f, cfg)
    layer = classify(f).layer
    stats = {"events": len(events), "classes": 0, "classes_skipped": 0}

    if cfg.strict_markovian:
        from .markovian import solve_markovian

        return solve_markovian(f, cfg, layer, start)
    if cfg.backend == "poly-export":
        from .smtlib import solve_with_z3

        return solve_with_z3(f, tree, events, cfg, layer, start)

    allow_grid = cfg.backend != "linear-exact"
    jobs = []
    searched: list[frozenset] = []
    try:
        for mc in cfg.model_classes(layer):
            sigset = signature_set(mc, cfg.c, events, cfg.max_structures)
            stats["profiles"] = stats.get("profiles", 0) + sigset.profiles_seen
            sset = frozenset(sigset.signatures)
            if any(sset <= prev for prev in searched):
                stats["classes_skipped"] += 1
                continue
            searched.append(sset)
            jobs.append((sigset, tree, cfg, deadline, allow_grid))
    except StructureLimitExceeded as e:
        return SatResult(UNKNOWN, reason=str(e), stats=_finish(stats, start))

    stats["classes"] = len(jobs)
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_search_class, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_search_class(job))
            if results[-1][0].status == "sat":
                break

    unknown = None
    for job, (out, sub) in zip(jobs, results):
        for key, val in sub.items():
            stats[key] = stats.get(key, 0) + val
        if out.status == "sat":
            sigset = job[0]
            rows = [sigset.representatives[j] for j in out.sigs]
            witness = build_witness(sigset.model_class, cfg.c, rows, out.weights)
            verify_witness(f, witness, cfg)
            stats["support_u"] = count_support_u(witness)
            stats["support_x"] = count_support_x(witness)
            return SatResult(SAT, witness, None, _finish(stats, start))
        if out.status == "unknown" and unknown is None:
            unknown = out.reason
    if unknown is not None:
        return SatResult(UNKNOWN, reason=unknown, stats=_finish(stats, start))
    return SatResult(UNSAT, stats=_finish(stats, start))


def _finish(stats: dict, start: float) -> dict:
    stats["elapsed"] = round(time.monotonic() - start, 6)
    return stats


def solve_validity_bounded(f, cfg: SolveConfig) -> SatResult:
    """Look for a counterexample; ``UNSAT_WITHIN_BOUNDS`` means valid within the bounds only."""
    return solve_sat(FNot(f), cfg)
