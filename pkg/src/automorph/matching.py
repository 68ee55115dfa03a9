"""Find occurrences of a rule's left-hand side in a host automaton.

Matching is open-world: a host state may carry modifiers and substates the
pattern does not mention.  Pattern elements map injectively to host
elements, a schema variable binds the same identifier everywhere it occurs,
and a pattern state nested in another must be a direct substate of that
state's image.  A top-level pattern state may match a state at any depth.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import Automaton, State, Transition
from .rules import Name, NormalizedRule, Pattern


@dataclass(frozen=True)
class Match:
    binding: dict
    element_map: dict  # pattern key -> state name or Transition
    choices: tuple = field(default=(), compare=False)

    def summary(self, order=None) -> str:
        names = order if order is not None else sorted(self.binding)
        return " ".join(f"{v}={format_value(self.binding[v])}" for v in names if v in self.binding)


def format_value(value) -> str:
    if isinstance(value, Transition):
        return f"{value.source}-{value.label}>{value.target}"
    return value


def _bind(binding: dict, term: Name, value) -> Optional[dict]:
    """Extend ``binding`` so that ``term`` denotes ``value``; None on conflict."""
    if not term.is_var:
        return binding if term.value == value else None
    if term.value in binding:
        return binding if binding[term.value] == value else None
    extended = dict(binding)
    extended[term.value] = value
    return extended


def resolve(term: Name, binding: dict):
    return binding[term.value] if term.is_var else term.value


def check_constraints(constraints, binding: dict) -> bool:
    for c in constraints:
        left, right = resolve(c.left, binding), resolve(c.right, binding)
        if (left == right) != (c.op == "=="):
            return False
    return True


class _Host:
    """Document-order views of a model shared across one search."""

    def __init__(self, model: Automaton):
        self.model = model
        self.states: list[State] = list(model.walk())
        self.by_name = {s.name: s for s in self.states}
        self.position = {s.name: i for i, s in enumerate(self.states)}
        self.transitions = list(model.transitions)


def find_matches(lhs: Pattern, nacs, constraints, model: Automaton,
                 seed: Optional[dict] = None, limit: Optional[int] = None) -> list[Match]:
    """All matches of ``lhs`` in canonical order.

    ``seed`` pre-binds variables (used for negative application conditions);
    ``limit`` stops after that many matches.
    """
    return _search(lhs, tuple(nacs), tuple(constraints), _Host(model), seed or {}, limit)


def _search(lhs, nacs, constraints, host: _Host, seed, limit):
    elements = lhs.elements
    results: list[Match] = []

    def blocked(binding) -> bool:
        return any(_search(n, (), (), host, binding, 1) for n in nacs)

    def solve(i, binding, emap, used_s, used_t, choices) -> bool:
        if i == len(elements):
            if check_constraints(constraints, binding) and not blocked(binding):
                results.append(Match(binding, dict(emap), tuple(choices)))
                return limit is not None and len(results) >= limit
            return False
        el = elements[i]
        if el.kind == "state":
            for s in _state_candidates(el, binding, emap, host):
                if s.name in used_s or not el.modifiers <= s.modifiers:
                    continue
                b = _bind(binding, el.name, s.name)
                if b is None:
                    continue
                emap[el.key] = s.name
                used_s.add(s.name)
                choices.append(host.position[s.name])
                stop = solve(i + 1, b, emap, used_s, used_t, choices)
                choices.pop()
                used_s.discard(s.name)
                del emap[el.key]
                if stop:
                    return True
        else:
            for j, t in enumerate(host.transitions):
                if t in used_t:
                    continue
                b = binding
                if el.id is not None:
                    b = _bind(b, Name(el.id), t)
                for term, value in zip(el.terms(), (t.source, t.label, t.target)):
                    if b is None:
                        break
                    b = _bind(b, term, value)
                if b is None:
                    continue
                emap[el.key] = t
                used_t.add(t)
                choices.append(j)
                stop = solve(i + 1, b, emap, used_s, used_t, choices)
                choices.pop()
                used_t.discard(t)
                del emap[el.key]
                if stop:
                    return True
        return False

    solve(0, dict(seed), {}, set(), set(), [])
    return results


def _state_candidates(el, binding, emap, host: _Host):
    known = None
    if not el.name.is_var:
        known = el.name.value
    elif el.name.value in binding:
        known = binding[el.name.value]
    if el.parent is not None:
        pool = host.by_name[emap[el.parent]].substates
    else:
        pool = host.states
    if known is None:
        return pool
    s = host.by_name.get(known)
    return [s] if s is not None and any(c is s for c in pool) else []


def find_rule_matches(rule: NormalizedRule, model: Automaton) -> list[Match]:
    return find_matches(rule.lhs, rule.nacs, rule.constraints, model)


__all__ = ["Match", "find_matches", "find_rule_matches", "check_constraints", "resolve", "format_value"]
