"""Tokenizer shared by model (.aut) and rule (.rul) files."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .model import Diagnostic, DiagnosticError

IDENT = "IDENT"
VAR = "VAR"
EOF = "EOF"

# Longest punctuators first.
_PUNCT = ("[[", "]]", ":-", "<<", ">>", "==", "!=", "{", "}", ";", "-", ">", ",")

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<var>\$[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in _PUNCT) + ")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, VAR, EOF, or the punctuator text itself
    value: str
    line: int
    column: int

    @property
    def where(self) -> tuple:
        return (self.line, self.column)

    def describe(self) -> str:
        if self.kind == EOF:
            return "end of input"
        return repr(self.value)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            ch = text[pos]
            raise DiagnosticError([Diagnostic(
                "error", "LEX_ERROR", f"unexpected character {ch!r}", line, col)])
        kind = m.lastgroup
        value = m.group()
        if kind == "var":
            tokens.append(Token(VAR, value, line, col))
        elif kind == "ident":
            tokens.append(Token(IDENT, value, line, col))
        elif kind == "punct":
            tokens.append(Token(value, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token(EOF, "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list with expect/accept helpers for LL(1) parsers."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def peek_at(self, offset: int) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek
        return tok.kind == kind and (value is None or tok.value == value)

    def at_keyword(self, word: str) -> bool:
        return self.at(IDENT, word)

    def accept(self, kind: str, value: str | None = None):
        if self.at(kind, value):
            return self.next()
        return None

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        if self.at(kind, value):
            return self.next()
        self.fail("SYNTAX", f"expected {what or repr(value or kind)}, found {self.peek.describe()}")

    def fail(self, code: str, message: str, tok: Token | None = None):
        tok = tok or self.peek
        raise DiagnosticError([Diagnostic("error", code, message, tok.line, tok.column)])
