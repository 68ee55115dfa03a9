"""Parser and canonical printer for the textual automata language.

    model      := element*
    element    := stateDecl | transition
    stateDecl  := 'state' IDENT modifiers? ( ';' | '{' element* '}' )
    modifiers  := '<<' ('initial' | 'final')* '>>'
    transition := IDENT '-' IDENT '>' IDENT ';'

Transitions may appear inside state bodies; they are collected into the
single global transition list in source order.
"""
from __future__ import annotations

from .lexer import EOF, IDENT, VAR, Token, TokenStream
from .model import (
    FINAL,
    INITIAL,
    MODIFIER_ORDER,
    RESERVED,
    Automaton,
    Diagnostic,
    DiagnosticError,
    State,
    Transition,
    diagnose,
    sibling_initial_warnings,
)


class _ModelParser:
    def __init__(self, text: str):
        self.ts = TokenStream(text)
        self.warnings: list[Diagnostic] = []
        self.transitions: list[Transition] = []
        self.transition_where: list[tuple] = []
        self.state_where: list[tuple] = []

    def warn(self, code: str, message: str, tok: Token) -> None:
        self.warnings.append(Diagnostic("warning", code, message, tok.line, tok.column))

    def ident(self, what: str) -> Token:
        tok = self.ts.peek
        if tok.kind == VAR:
            self.ts.fail("BAD_IDENT",
                         f"{tok.value!r} is not an identifier; '$' is reserved for schema variables")
        if tok.kind == IDENT and tok.value in RESERVED:
            self.ts.fail("BAD_IDENT", f"{tok.value!r} is a reserved word")
        return self.ts.expect(IDENT, what=what)

    def model(self) -> Automaton:
        states = self.elements(until=EOF)
        transitions = []
        where = []
        seen = set()
        for t, w in zip(self.transitions, self.transition_where):
            if t in seen:
                self.warnings.append(Diagnostic(
                    "warning", "DUP_TRANSITION", f"duplicate transition {t} ignored", *w))
                continue
            seen.add(t)
            transitions.append(t)
            where.append(w)
        self.transition_where = where
        return Automaton(tuple(states), tuple(transitions))

    def elements(self, until: str) -> list[State]:
        states = []
        while not self.ts.at(until):
            if self.ts.at_keyword("state"):
                states.append(self.state_decl())
            elif self.ts.at(IDENT) or self.ts.at(VAR):
                self.transition()
            else:
                self.ts.fail("SYNTAX", f"expected 'state' or a transition, found {self.ts.peek.describe()}")
        return states

    def state_decl(self) -> State:
        self.ts.expect(IDENT, "state")
        name = self.ident("state name")
        self.state_where.append(name.where)
        modifiers: set[str] = set()
        if self.ts.accept("<<"):
            while not self.ts.accept(">>"):
                tok = self.ts.peek
                if not (tok.kind == IDENT and tok.value in MODIFIER_ORDER):
                    self.ts.fail("SYNTAX", f"expected 'initial', 'final' or '>>', found {tok.describe()}")
                self.ts.next()
                if tok.value in modifiers:
                    self.warn("DUP_MODIFIER", f"modifier {tok.value!r} repeated on state {name.value!r}", tok)
                modifiers.add(tok.value)
        substates = []
        if self.ts.accept("{"):
            substates = self.elements(until="}")
            self.ts.expect("}")
        else:
            self.ts.expect(";", what="';' or '{'")
        return State(name.value, frozenset(modifiers), tuple(substates))

    def transition(self) -> None:
        source = self.ident("transition source")
        self.ts.expect("-")
        label = self.ident("transition label")
        self.ts.expect(">")
        target = self.ident("transition target")
        self.ts.expect(";")
        self.transitions.append(Transition(source.value, label.value, target.value))
        self.transition_where.append(source.where)


def parse_model_with_diagnostics(text: str) -> tuple:
    """Parse model text, returning ``(model or None, diagnostics)``."""
    try:
        parser = _ModelParser(text)
    except DiagnosticError as err:
        return None, err.diagnostics
    try:
        model = parser.model()
    except DiagnosticError as err:
        return None, parser.warnings + err.diagnostics

    def locate(kind, i):
        spans = parser.state_where if kind == "state" else parser.transition_where
        return spans[i] if i < len(spans) else None

    errors = diagnose(model, locate)
    diagnostics = parser.warnings + errors
    if errors:
        return None, diagnostics
    return model, diagnostics + sibling_initial_warnings(model)


def parse_model(text: str) -> Automaton:
    """Parse and validate model text; raise DiagnosticError on any error."""
    model, diagnostics = parse_model_with_diagnostics(text)
    if model is None:
        raise DiagnosticError([d for d in diagnostics if d.is_error])
    return model


def format_modifiers(modifiers) -> str:
    present = [m for m in MODIFIER_ORDER if m in modifiers]
    return f" <<{' '.join(present)}>>" if present else ""


def print_model(model: Automaton) -> str:
    errors = [d for d in diagnose(model) if d.is_error]
    if errors:
        raise DiagnosticError(errors)
    lines: list[str] = []

    def emit(s: State, indent: int) -> None:
        pad = "  " * indent
        head = f"{pad}state {s.name}{format_modifiers(s.modifiers)}"
        if not s.substates:
            lines.append(head + ";")
            return
        lines.append(head + " {")
        for sub in s.substates:
            emit(sub, indent + 1)
        lines.append(pad + "}")

    for top in model.states:
        emit(top, 0)
    if model.transitions:
        if lines:
            lines.append("")
        lines.extend(f"{t};" for t in model.transitions)
    return "".join(line + "\n" for line in lines)


def model_to_json(model: Automaton) -> dict:
    def st(s: State) -> dict:
        return {
            "name": s.name,
            "modifiers": [m for m in MODIFIER_ORDER if m in s.modifiers],
            "substates": [st(c) for c in s.substates],
        }

    return {
        "states": [st(s) for s in model.states],
        "transitions": [
            {"source": t.source, "label": t.label, "target": t.target}
            for t in model.transitions
        ],
    }


__all__ = ["parse_model", "parse_model_with_diagnostics", "print_model", "model_to_json",
           "INITIAL", "FINAL"]
