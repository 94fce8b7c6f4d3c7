"""Bounded satisfiability: exact LP, signature search, grid search and SMT-LIB export."""

from .lp import Constraint, LinearSystem, LpResult, linear_feasibility_exact
from .naive import poly_feasibility_naive
from .search import (
    BACKENDS, SAT, UNKNOWN, UNSAT, ConfigError, SatResult, SolveConfig, solve_sat,
    solve_validity_bounded, verify_witness,
)
from .smtlib import MODES, ExportError, export_smtlib
from .structures import (
    CandidateStructure, ModelClass, StructureLimitExceeded, enumerate_structures,
    structure_to_constraints,
)

__all__ = [
    "BACKENDS", "CandidateStructure", "ConfigError", "Constraint", "ExportError", "LinearSystem",
    "LpResult", "MODES", "ModelClass", "SAT", "SatResult", "SolveConfig", "StructureLimitExceeded",
    "UNKNOWN", "UNSAT", "enumerate_structures", "export_smtlib", "linear_feasibility_exact",
    "poly_feasibility_naive", "solve_sat", "solve_validity_bounded", "structure_to_constraints",
    "verify_witness",
]
