"""Hierarchical automata, concrete-syntax transformation rules, and flattening."""

from .model import (
    Automaton,
    Diagnostic,
    DiagnosticError,
    State,
    Transition,
    state_index,
    validate,
)
from .syntax import parse_model, print_model
from .rules import NormalizedRule, normalize_rule, parse_rules
from .matching import Match, find_matches
from .rewrite import ApplyReport, Strategy, TransformError, apply, apply_at
from .flatten import copy_down_sources, fig3_rule, flatten, forward_targets
from .traces import Trace, equivalent, initial_configuration, step, traces

__all__ = [
    "Automaton", "Diagnostic", "DiagnosticError", "State", "Transition",
    "state_index", "validate", "parse_model", "print_model",
    "NormalizedRule", "normalize_rule", "parse_rules", "Match", "find_matches",
    "ApplyReport", "Strategy", "TransformError", "apply", "apply_at",
    "copy_down_sources", "fig3_rule", "flatten", "forward_targets",
    "Trace", "equivalent", "initial_configuration", "step", "traces",
]
