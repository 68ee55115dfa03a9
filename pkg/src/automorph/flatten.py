"""Flatten hierarchical automata into equivalent depth-0 automata.

The pipeline forwards transitions into composites down to the innermost
initial leaf, copies transitions leaving a composite down to every leaf it
contains (unless a state nearer the leaf handles the same label), settles
the ``initial``/``final`` markers on leaves and finally drops the
composites, keeping leaves in document order.
"""
from __future__ import annotations

from importlib.resources import files

from .model import (
    FINAL,
    INITIAL,
    Automaton,
    DiagnosticError,
    SemanticsError,
    State,
    Transition,
    _index_unchecked,
    dedup,
    diagnose,
)
from .traces import Interpreter


def _require_valid(model: Automaton) -> None:
    errors = [d for d in diagnose(model) if d.is_error]
    if errors:
        raise DiagnosticError(errors)


def _require_unique_initials(model: Automaton) -> None:
    for s in model.walk():
        if s.substates:
            count = sum(1 for c in s.substates if c.initial)
            if count != 1:
                raise SemanticsError(
                    "NO_UNIQUE_INITIAL",
                    f"composite state {s.name!r} has {count} initial substates, expected exactly one")


def forward_targets(model: Automaton) -> Automaton:
    """Retarget every transition into a composite to its innermost initial leaf."""
    _require_valid(model)
    _require_unique_initials(model)
    interp = Interpreter(model)
    transitions = [Transition(t.source, t.label, interp.descend(t.target, strict=True))
                   for t in model.transitions]
    return Automaton(model.states, dedup(transitions))


def _leaves(s: State):
    return [d for d in s.walk() if not d.substates]


def copy_down_sources(model: Automaton) -> Automaton:
    """Replace each transition leaving a composite by copies from its leaves.

    A leaf gets no copy when it, or an ancestor strictly inside the
    composite, already has an outgoing transition with the same label.
    """
    _require_valid(model)
    index = _index_unchecked(model)
    for t in model.transitions:
        if index[t.target].state.substates:
            raise SemanticsError("NOT_FORWARDED", f"transition {t} still targets a composite state")
    handles = {(t.source, t.label) for t in model.transitions}
    out = []
    for t in model.transitions:
        source = index[t.source].state
        if not source.substates:
            out.append(t)
            continue
        for leaf in _leaves(source):
            name, shadowed = leaf.name, False
            while name != source.name:
                if (name, t.label) in handles:
                    shadowed = True
                    break
                name = index[name].parent
            if not shadowed:
                out.append(Transition(leaf.name, t.label, t.target))
    return Automaton(model.states, dedup(out))


def flatten(model: Automaton) -> Automaton:
    _require_valid(model)
    tops = [s for s in model.states if s.initial]
    if len(tops) > 1:
        raise SemanticsError("MULTIPLE_TOP_INITIAL",
                             "several top-level initial states: " + ", ".join(s.name for s in tops))
    forwarded = copy_down_sources(forward_targets(model))
    interp = Interpreter(forwarded)
    start = interp.descend(tops[0].name, strict=True) if tops else None

    leaves = []
    for s in forwarded.walk():
        if s.substates:
            continue
        mods = set()
        if s.name == start:
            mods.add(INITIAL)
        if interp.accepting(s.name):
            mods.add(FINAL)
        leaves.append(State(s.name, frozenset(mods)))
    return Automaton(tuple(leaves), forwarded.transitions)


def fig3_rule() -> str:
    """The transition-forwarding rule in integrated notation, as bundled."""
    return files("automorph").joinpath("data", "fig3.rul").read_text(encoding="utf-8")


def fig3_separated_rule() -> str:
    """The same rule written with separate match and replace blocks."""
    return files("automorph").joinpath("data", "fig3_separated.rul").read_text(encoding="utf-8")
