"""Canonical JSON documents for SCMs, BNs, DAGs and joint tables.

Probabilities are written as lowest-terms rational strings (``"237/5000"``)
and read from either rational or decimal strings.  Mechanism tables and CPT
rows are flat lists in lexicographic order of their argument tuples, so a
document written by :func:`dumps` reads back and re-serialises to the same
bytes.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from typing import Any

from .model import Bn, Dag, ExogenousSpec, JointTable, Mechanism, Scm, as_fraction, assignments


class ModelFileError(ValueError):
    pass


def _q(x: Fraction) -> str:
    return str(Fraction(x))


def dag_to_dict(dag: Dag) -> dict:
    return {
        "kind": "dag",
        "variables": list(dag.vars),
        "edges": sorted([a, b] for a, b in dag.edges),
    }


def scm_to_dict(scm: Scm) -> dict:
    exo = scm.exo
    exo_doc: dict[str, Any] = {
        "variables": [[u, exo.domains[u]] for u in exo.u_vars],
        "mode": "markovian" if exo.markovian else "semi-markovian",
    }
    if exo.markovian and exo.marginals is not None:
        exo_doc["marginals"] = {u: [_q(x) for x in exo.marginals[u]] for u in exo.u_vars}
    else:
        exo_doc["support"] = [{"u": list(u), "p": _q(p)} for u, p in sorted(exo.support)]
    mechs = {}
    for v in scm.x_vars:
        m = scm.mechanisms[v]
        ranges = [range(scm.c)] * len(m.parents) + [range(exo.domains[e]) for e in m.exo_args]
        mechs[v] = {
            "parents": list(m.parents),
            "exo": list(m.exo_args),
            "values": [m.table[k] for k in itertools.product(*ranges)],
        }
    return {
        "kind": "scm",
        "domain": scm.c,
        "endogenous": list(scm.x_vars),
        "exogenous": exo_doc,
        "mechanisms": mechs,
    }


def bn_to_dict(bn: Bn) -> dict:
    cpts = {}
    for v in bn.dag.vars:
        k = len(bn.dag.parents(v))
        cpts[v] = [[_q(x) for x in bn.cpts[v][pa]] for pa in assignments(bn.c, k)]
    return {"kind": "bn", "domain": bn.c, "dag": dag_to_dict(bn.dag), "cpts": cpts}


def joint_to_dict(jt: JointTable) -> dict:
    return {
        "kind": "joint",
        "domain": jt.c,
        "variables": list(jt.x_vars),
        "entries": [{"x": list(x), "p": _q(p)} for x, p in sorted(jt.entries.items())],
    }


def to_dict(obj) -> dict:
    if isinstance(obj, Scm):
        return scm_to_dict(obj)
    if isinstance(obj, Bn):
        return bn_to_dict(obj)
    if isinstance(obj, JointTable):
        return joint_to_dict(obj)
    if isinstance(obj, Dag):
        return dag_to_dict(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_dict(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# reading
# ---------------------------------------------------------------------------


def _need(doc: dict, key: str):
    if key not in doc:
        raise ModelFileError(f"missing field {key!r}")
    return doc[key]


def dag_from_dict(doc: dict) -> Dag:
    try:
        return Dag(tuple(_need(doc, "variables")), frozenset(tuple(e) for e in doc.get("edges", [])))
    except (TypeError, ValueError) as exc:
        raise ModelFileError(str(exc)) from exc


def scm_from_dict(doc: dict) -> Scm:
    c = int(_need(doc, "domain"))
    x_vars = tuple(_need(doc, "endogenous"))
    exo_doc = _need(doc, "exogenous")
    u_decl = [(name, int(k)) for name, k in _need(exo_doc, "variables")]
    mode = exo_doc.get("mode", "semi-markovian")
    if mode == "markovian":
        marg = _need(exo_doc, "marginals")
        exo = ExogenousSpec.independent({name: marg[name] for name, _ in u_decl})
        if dict(exo.domains) != dict(u_decl):
            raise ModelFileError("marginal lengths disagree with exogenous domains")
    elif mode == "semi-markovian":
        support = [(tuple(pt["u"]), as_fraction(pt["p"])) for pt in _need(exo_doc, "support")]
        exo = ExogenousSpec(tuple(n for n, _ in u_decl), dict(u_decl), tuple(support))
    else:
        raise ModelFileError(f"unknown exogenous mode {mode!r}")
    mechs = {}
    for v, m in _need(doc, "mechanisms").items():
        parents, exo_args = tuple(m.get("parents", [])), tuple(m.get("exo", []))
        try:
            ranges = [range(c)] * len(parents) + [range(exo.domains[e]) for e in exo_args]
        except KeyError as exc:
            raise ModelFileError(f"mechanism {v} reads undeclared exogenous {exc}") from exc
        keys = list(itertools.product(*ranges))
        values = _need(m, "values")
        if len(values) != len(keys):
            raise ModelFileError(f"mechanism {v}: expected {len(keys)} table values, got {len(values)}")
        mechs[v] = Mechanism(v, parents, exo_args, dict(zip(keys, values)))
    return Scm(c, x_vars, mechs, exo)


def bn_from_dict(doc: dict) -> Bn:
    c = int(_need(doc, "domain"))
    dag = dag_from_dict(_need(doc, "dag"))
    cpts = {}
    for v, rows in _need(doc, "cpts").items():
        if v not in dag.vars:
            raise ModelFileError(f"CPT for unknown variable {v}")
        keys = list(assignments(c, len(dag.parents(v))))
        if len(rows) != len(keys):
            raise ModelFileError(f"CPT of {v}: expected {len(keys)} rows")
        cpts[v] = dict(zip(keys, rows))
    return Bn(dag, c, cpts)


def joint_from_dict(doc: dict) -> JointTable:
    c = int(_need(doc, "domain"))
    entries = {}
    for e in _need(doc, "entries"):
        key = tuple(e["x"])
        if key in entries:
            raise ModelFileError(f"duplicate joint entry {key}")
        entries[key] = as_fraction(e["p"])
    return JointTable(c, tuple(_need(doc, "variables")), entries)


_READERS = {"scm": scm_from_dict, "bn": bn_from_dict, "joint": joint_from_dict, "dag": dag_from_dict}


def from_dict(doc: dict):
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind not in _READERS:
        raise ModelFileError(f"unknown document kind {kind!r}")
    try:
        return _READERS[kind](doc)
    except ModelFileError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ModelFileError(f"malformed {kind} document: {exc}") from exc


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"invalid JSON: {exc}") from exc
    return from_dict(doc)


def load(path: str):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
