"""In-memory hierarchical automata and their validation.

All names live in one flat, global namespace: a transition refers to a state
by name alone, wherever either of them is declared.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Optional

INITIAL = "initial"
FINAL = "final"
MODIFIER_ORDER = (INITIAL, FINAL)

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Words that start a production somewhere in the model or rule grammar.
RESERVED = frozenset({"state", "rule", "not", "where", "match", "replace", "Transition"})


def is_identifier(name: str) -> bool:
    return bool(IDENT_RE.match(name)) and name not in RESERVED


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def format(self, filename: str = "<input>") -> str:
        if self.line is None:
            return f"{filename}: {self.severity} {self.code}: {self.message}"
        return f"{filename}:{self.line}:{self.column}: {self.severity} {self.code}: {self.message}"


class DiagnosticError(Exception):
    """Raised when text is rejected; carries every diagnostic produced so far."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.format() for d in self.diagnostics))

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


class SemanticsError(Exception):
    """A model is well-formed but an operation cannot be carried out on it."""

    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}")


@dataclass(frozen=True)
class State:
    name: str
    modifiers: frozenset = frozenset()
    substates: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return not self.substates

    @property
    def initial(self) -> bool:
        return INITIAL in self.modifiers

    @property
    def final(self) -> bool:
        return FINAL in self.modifiers

    def walk(self) -> Iterator["State"]:
        yield self
        for sub in self.substates:
            yield from sub.walk()


def state(name: str, *modifiers: str, substates=()) -> State:
    """Shorthand constructor used heavily by tests and the flattener."""
    return State(name, frozenset(modifiers), tuple(substates))


@dataclass(frozen=True, order=True)
class Transition:
    source: str
    label: str
    target: str

    def __str__(self) -> str:
        return f"{self.source} -{self.label}> {self.target}"


@dataclass(frozen=True)
class Automaton:
    states: tuple = ()
    transitions: tuple = ()

    def walk(self) -> Iterator[State]:
        """All states, depth-first in declaration order."""
        for top in self.states:
            yield from top.walk()

    def names(self) -> list[str]:
        return [s.name for s in self.walk()]

    def is_flat(self) -> bool:
        return all(s.is_leaf for s in self.states)


class IndexEntry(NamedTuple):
    state: State
    parent: Optional[str]
    depth: int


def _index_unchecked(model: Automaton) -> dict[str, IndexEntry]:
    index: dict[str, IndexEntry] = {}

    def visit(s: State, parent: Optional[str], depth: int) -> None:
        index.setdefault(s.name, IndexEntry(s, parent, depth))
        for sub in s.substates:
            visit(sub, s.name, depth + 1)

    for top in model.states:
        visit(top, None, 0)
    return index


def state_index(model: Automaton) -> dict[str, IndexEntry]:
    """Map each state name to its state, parent name and nesting depth."""
    errors = [d for d in validate(model) if d.is_error]
    if errors:
        raise DiagnosticError(errors)
    return _index_unchecked(model)


Locator = Callable[[str, int], Optional[tuple]]


def validate(model: Automaton) -> list[Diagnostic]:
    return diagnose(model)


def diagnose(model: Automaton, locate: Optional[Locator] = None) -> list[Diagnostic]:
    """Check the automaton invariants, one error per violation.

    ``locate(kind, i)`` may supply a (line, column) for the i-th state
    (preorder) or i-th transition; the parser uses it to position messages.
    """
    locate = locate or (lambda kind, i: None)
    out: list[Diagnostic] = []

    def emit(code: str, message: str, where) -> None:
        line, col = where if where else (None, None)
        out.append(Diagnostic("error", code, message, line, col))

    seen: set[str] = set()
    for i, s in enumerate(model.walk()):
        if not isinstance(s.name, str) or not is_identifier(s.name):
            emit("BAD_IDENT", f"invalid state name {s.name!r}", locate("state", i))
        bad = set(s.modifiers) - set(MODIFIER_ORDER)
        if bad:
            emit("BAD_IDENT", f"unknown modifier {sorted(bad)[0]!r} on state {s.name!r}",
                 locate("state", i))
        if s.name in seen:
            emit("DUP_NAME", f"state {s.name!r} is declared more than once", locate("state", i))
        seen.add(s.name)

    triples: set[Transition] = set()
    for i, t in enumerate(model.transitions):
        if not isinstance(t.label, str) or not is_identifier(t.label):
            emit("BAD_IDENT", f"invalid transition label {t.label!r}", locate("transition", i))
        for end in (t.source, t.target):
            if end not in seen:
                emit("UNDECLARED_REF", f"transition {t} refers to undeclared state {end!r}",
                     locate("transition", i))
        if t in triples:
            emit("DUP_TRANSITION", f"transition {t} is declared more than once",
                 locate("transition", i))
        triples.add(t)
    return out


def sibling_initial_warnings(model: Automaton) -> list[Diagnostic]:
    """Warn about sibling groups with more than one initial state."""
    out = []

    def check(group, owner):
        initials = [s.name for s in group if s.initial]
        if len(initials) > 1:
            out.append(Diagnostic(
                "warning", "MULTIPLE_INITIAL",
                f"{owner} has several initial states: {', '.join(initials)}"))

    check(model.states, "top level")
    for s in model.walk():
        if s.substates:
            check(s.substates, f"state {s.name!r}")
    return out


def map_states(model: Automaton, fn: Callable[[State], Optional[State]]) -> tuple:
    """Rebuild the state forest bottom-up; ``fn`` returning None drops a state."""

    def rebuild(s: State):
        subs = tuple(r for r in (rebuild(c) for c in s.substates) if r is not None)
        return fn(State(s.name, s.modifiers, subs))

    return tuple(r for r in (rebuild(s) for s in model.states) if r is not None)


def dedup(transitions) -> tuple:
    """Keep the first occurrence of each triple."""
    return tuple(dict.fromkeys(transitions))


def depth(model: Automaton) -> int:
    def d(s: State) -> int:
        return 0 if not s.substates else 1 + max(d(c) for c in s.substates)

    return max((d(s) for s in model.states), default=0)
