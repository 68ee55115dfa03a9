"""Reference interpreter for hierarchical automata and bounded trace equivalence.

A configuration is the name of the state the automaton rests in, normally a
leaf.  On a label, the innermost state among the configuration and its
ancestors that has outgoing transitions with that label fires all of them;
each target is entered and the chain of initial substates is followed down.
A composite with no initial substate is entered and rested in, which is how
a rule that removed an ``initial`` marker shows up as a behavioural change.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import Automaton, SemanticsError, _index_unchecked


@dataclass(frozen=True, order=True)
class Trace:
    labels: tuple
    accepted: bool = False

    def __str__(self) -> str:
        return format_labels(self.labels)


def format_labels(labels) -> str:
    return " ".join(labels) if labels else "<empty>"


class Interpreter:
    def __init__(self, model: Automaton):
        self.model = model
        self.index = _index_unchecked(model)
        self.outgoing: dict[tuple, list[str]] = {}
        for t in model.transitions:
            self.outgoing.setdefault((t.source, t.label), []).append(t.target)
        self.alphabet = sorted({t.label for t in model.transitions})

    def ancestors(self, name: str):
        """``name`` followed by its enclosing states, innermost first."""
        while name is not None:
            yield name
            name = self.index[name].parent

    def descend(self, name: str, strict: bool = False) -> str:
        s = self.index[name].state
        while s.substates:
            initials = [c for c in s.substates if c.initial]
            if len(initials) > 1:
                raise SemanticsError(
                    "NO_UNIQUE_INITIAL",
                    f"state {s.name!r} has {len(initials)} initial substates")
            if not initials:
                if strict:
                    raise SemanticsError("NO_UNIQUE_INITIAL", f"state {s.name!r} has no initial substate")
                break
            s = initials[0]
        return s.name

    def initial(self) -> str:
        tops = [s for s in self.model.states if s.initial]
        if not tops:
            raise SemanticsError("NO_TOP_INITIAL", "no top-level state is marked initial")
        if len(tops) > 1:
            raise SemanticsError("MULTIPLE_TOP_INITIAL",
                                 "several top-level initial states: " + ", ".join(s.name for s in tops))
        return self.descend(tops[0].name, strict=True)

    def step(self, config: str, label: str) -> frozenset:
        for name in self.ancestors(config):
            targets = self.outgoing.get((name, label))
            if targets:
                return frozenset(self.descend(t) for t in targets)
        return frozenset()

    def accepting(self, config: str) -> bool:
        return any(self.index[n].state.final for n in self.ancestors(config))

    def traces(self, k: int) -> set:
        frontier = {(): frozenset({self.initial()})}
        out = set()
        for length in range(k + 1):
            for labels, configs in frontier.items():
                out.add(Trace(labels, any(self.accepting(c) for c in configs)))
            if length == k:
                break
            nxt = {}
            for labels, configs in frontier.items():
                for label in self.alphabet:
                    reached = frozenset().union(*(self.step(c, label) for c in configs))
                    if reached:
                        nxt[labels + (label,)] = reached
            frontier = nxt
        return out


def initial_configuration(model: Automaton) -> str:
    return Interpreter(model).initial()


def step(model: Automaton, config: str, label: str) -> frozenset:
    return Interpreter(model).step(config, label)


def traces(model: Automaton, k: int) -> set:
    """All traces of length <= k, each tagged with whether it can end accepting."""
    if k < 0:
        raise ValueError("trace depth must be non-negative")
    return Interpreter(model).traces(k)


def equivalent(m1: Automaton, m2: Automaton, k: int) -> tuple:
    """Compare bounded trace sets; return ``(flag, counterexample labels or None)``.

    The counterexample is the shortest, then lexicographically least, label
    sequence executable in only one model or accepted in only one.
    """
    t1 = {t.labels: t.accepted for t in traces(m1, k)}
    t2 = {t.labels: t.accepted for t in traces(m2, k)}
    differing = [labels for labels in t1.keys() | t2.keys() if t1.get(labels) != t2.get(labels)]
    if not differing:
        return True, None
    return False, min(differing, key=lambda labels: (len(labels), labels))


def counterexample_text(counterexample: Optional[tuple]) -> str:
    return format_labels(counterexample or ())
