"""Search restricted to Markovian models: one private exogenous input per variable.

The support of such a model is a product, so a bound ``p`` on it caps the
product of the per-variable domain sizes.  The search is a small exhaustive
sweep over table multisets with a coarse grid of marginals; it can only
report SAT or UNKNOWN.
"""

from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction

from ..evaluate import eval_formula
from ..model import ExogenousSpec, Mechanism, Scm, assignments, validate_scm

MAX_MARGINAL_DENOMINATOR = 4


def _domain_vectors(n: int, p: int):
    """Per-variable exogenous sizes with product at most ``p``, smallest total first."""
    vecs = [v for v in itertools.product(range(1, p + 1), repeat=n) if math.prod(v) <= p]
    return sorted(vecs, key=lambda v: (sum(v), v))


def _marginal_grid(k: int):
    seen = []
    uniform = tuple(Fraction(1, k) for _ in range(k))
    seen.append(uniform)
    for den in range(k, MAX_MARGINAL_DENOMINATOR + 1):
        for cut in itertools.combinations(range(1, den), k - 1):
            parts = [b - a for a, b in zip((0,) + cut, cut + (den,))]
            m = tuple(Fraction(x, den) for x in parts)
            if m not in seen:
                seen.append(m)
    return seen


def solve_markovian(f, cfg, layer: int, start: float):
    from .search import SAT, UNKNOWN, SatResult, verify_witness

    deadline = start + cfg.time_budget if cfg.time_budget else None
    examined = 0
    for mc in cfg.model_classes(layer):
        tables = {}
        for v in mc.vars:
            width = cfg.c ** len(mc.parents[v])
            tables[v] = list(itertools.product(range(cfg.c), repeat=width))
        for sizes in _domain_vectors(len(mc.vars), cfg.p):
            choices = [list(itertools.combinations(tables[v], k)) for v, k in zip(mc.vars, sizes)]
            grids = [_marginal_grid(k) for k in sizes]
            for pick in itertools.product(*choices):
                mechs = {}
                for v, chosen in zip(mc.vars, pick):
                    pa = mc.parents[v]
                    table = {}
                    for pos, key in enumerate(assignments(cfg.c, len(pa))):
                        for j, t in enumerate(chosen):
                            table[key + (j,)] = t[pos]
                    mechs[v] = Mechanism(v, pa, (f"U_{v}",), table)
                for margs in itertools.product(*grids):
                    examined += 1
                    if examined > cfg.max_structures:
                        return SatResult(UNKNOWN, reason="structure limit exhausted", stats={"examined": examined})
                    if deadline is not None and time.monotonic() > deadline:
                        return SatResult(UNKNOWN, reason="time budget exhausted", stats={"examined": examined})
                    exo = ExogenousSpec.independent({f"U_{v}": m for v, m in zip(mc.vars, margs)})
                    scm = Scm(cfg.c, mc.vars, mechs, exo)
                    if validate_scm(scm):
                        continue
                    if eval_formula(scm, f, cfg.expansion_budget).is_true:
                        verify_witness(f, scm, cfg)
                        stats = {"examined": examined, "elapsed": round(time.monotonic() - start, 6)}
                        return SatResult(SAT, scm, None, stats)
    return SatResult(
        UNKNOWN,
        reason="no Markovian model found by the coarse sweep (the sweep is incomplete)",
        stats={"examined": examined, "elapsed": round(time.monotonic() - start, 6)},
    )
