"""Formula language: syntax trees, parser, printer and classifier."""

from .analysis import (
    Classification, classify, desugar_core, desugar_neq, free_dummies, is_closed,
    substitute_dummy, term_sign, variables_used, walk,
)
from .ast import *  # noqa: F401,F403
from .parser import ParseError, parse_event, parse_formula, parse_term
from .printer import print_event, print_formula, print_intervention, print_term

__all__ = [  # noqa: F405
    "Classification", "ParseError", "classify", "desugar_core", "desugar_neq", "free_dummies",
    "is_closed", "parse_event", "parse_formula", "parse_term", "print_event", "print_formula",
    "print_intervention", "print_term", "substitute_dummy", "term_sign", "variables_used", "walk",
]
