"""Transformation rules written in the automata language's own syntax.

A rule file holds ``rule <name> { ... }`` blocks.  Inside, model syntax is
extended with schema variables (``$x``), inline replacements
``[[ left :- right ]]`` (at name positions, inside modifier lists, and around
whole elements), negative application conditions ``not { ... }`` and
``where`` constraints.  The separated notation writes the two sides as
``match { ... } replace { ... }`` and names transitions with
``Transition $T [[ ... ]]`` so that they can be identified across blocks.

``normalize_rule`` turns either notation into a :class:`NormalizedRule`:
a left pattern, a right pattern and a correspondence between their elements.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Union

from .lexer import EOF, IDENT, VAR, TokenStream
from .model import MODIFIER_ORDER, RESERVED, Diagnostic, DiagnosticError


# --- rule AST -------------------------------------------------------------

@dataclass(frozen=True)
class Name:
    """A fixed identifier or, when it starts with ``$``, a schema variable."""

    value: str

    @property
    def is_var(self) -> bool:
        return self.value.startswith("$")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Replacement:
    """``[[ left :- right ]]``; either side may be empty."""

    left: object = None
    right: object = None


NameTerm = Union[Name, Replacement]


@dataclass(frozen=True)
class StatePattern:
    uid: int
    name: NameTerm
    modifiers: tuple = ()  # str | Replacement(left=tuple[str], right=tuple[str])
    body: tuple = ()  # nested StatePattern / TransitionPattern
    deleted: bool = False
    created: bool = False
    where: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class TransitionPattern:
    uid: int
    source: NameTerm
    label: NameTerm
    target: NameTerm
    id: Optional[str] = None
    deleted: bool = False
    created: bool = False
    where: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Nac:
    body: tuple


@dataclass(frozen=True)
class Where:
    constraints: tuple  # of Constraint


@dataclass(frozen=True)
class Constraint:
    left: Name
    op: str  # "==" | "!="
    right: Name

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Rule:
    name: str
    body: tuple = ()  # integrated notation
    match: Optional[tuple] = None  # separated notation
    replace: Optional[tuple] = None
    where: tuple = field(default=(0, 0), compare=False)

    @property
    def separated(self) -> bool:
        return self.match is not None


# --- parser ---------------------------------------------------------------

class _RuleParser:
    def __init__(self, text: str):
        self.ts = TokenStream(text)
        self.uid = 0

    def fresh(self) -> int:
        self.uid += 1
        return self.uid

    def rules(self) -> list[Rule]:
        out = []
        names = set()
        while not self.ts.at(EOF):
            kw = self.ts.expect(IDENT, "rule", what="'rule'")
            name = self.ts.expect(IDENT, what="rule name")
            if name.value in names:
                self.ts.fail("DUP_RULE", f"rule {name.value!r} is defined more than once", name)
            names.add(name.value)
            self.uid = 0
            self.ts.expect("{")
            if self.ts.at_keyword("match"):
                rule = self.separated(name.value, kw.where)
            else:
                rule = Rule(name.value, tuple(self.elements("}", top=True)), where=kw.where)
            self.ts.expect("}")
            out.append(rule)
        return out

    def separated(self, name: str, where) -> Rule:
        self.ts.expect(IDENT, "match")
        self.ts.expect("{")
        lhs = self.elements("}", top=True, separated=True)
        self.ts.expect("}")
        if not self.ts.at_keyword("replace"):
            self.ts.fail("SYNTAX", f"expected 'replace', found {self.ts.peek.describe()}")
        self.ts.next()
        self.ts.expect("{")
        rhs = self.elements("}", top=True, separated=True, rhs=True)
        self.ts.expect("}")
        if not self.ts.at("}"):
            self.ts.fail("MIXED_FORM", "a rule with match/replace blocks may contain nothing else")
        return Rule(name, match=tuple(lhs), replace=tuple(rhs), where=where)

    def elements(self, until, top=False, separated=False, rhs=False, flag=None, nac=False):
        """Parse elements up to (not including) a token of kind ``until``."""
        out = []
        while not self.ts.at(until):
            tok = self.ts.peek
            if tok.kind == EOF:
                self.ts.fail("SYNTAX", f"expected {until!r}, found end of input")
            if self.ts.at_keyword("state"):
                out.append(self.state(separated, flag, nac))
            elif self.ts.at_keyword("Transition"):
                out.append(self.named_transition(separated, flag, nac))
            elif self.ts.at_keyword("not"):
                if not top or rhs or flag:
                    self.ts.fail("SYNTAX", "'not' blocks are only allowed at the top of a rule or match block")
                self.ts.next()
                self.ts.expect("{")
                body = self.elements("}", separated=separated, nac=True)
                self.ts.expect("}")
                out.append(Nac(tuple(body)))
            elif self.ts.at_keyword("where"):
                if not top or rhs or flag:
                    self.ts.fail("SYNTAX", "'where' is only allowed at the top of a rule or match block")
                out.append(self.where())
            elif self.ts.at_keyword("match") or self.ts.at_keyword("replace"):
                self.ts.fail("MIXED_FORM", f"{tok.value!r} block inside an integrated rule")
            elif tok.kind == "[[":
                if self.bracket_starts_transition():
                    out.append(self.transition(separated, flag, nac))
                else:
                    out.extend(self.element_replacement(separated, flag, nac))
            elif tok.kind in (IDENT, VAR):
                out.append(self.transition(separated, flag, nac))
            else:
                self.ts.fail("SYNTAX", f"expected a rule element, found {tok.describe()}")
        return out

    def bracket_starts_transition(self) -> bool:
        """At ``[[``: is this a replaced name term opening a transition?"""
        i = 1
        while True:
            tok = self.ts.peek_at(i)
            if tok.kind == IDENT and tok.value == "Transition" and self.ts.peek_at(i + 2).kind == "[[":
                # skip the id brackets of a named transition
                i += 3
                while self.ts.peek_at(i).kind not in ("]]", EOF):
                    i += 1
                i += 1
                continue
            if tok.kind == "[[":
                self.ts.fail("NESTED_REPL", "replacements may not be nested", tok)
            if tok.kind == EOF:
                self.ts.fail("SYNTAX", "unterminated '[['")
            if tok.kind == "]]":
                return self.ts.peek_at(i + 1).kind == "-"
            i += 1

    def open_replacement(self, separated, flag, nac):
        tok = self.ts.expect("[[")
        if separated:
            self.ts.fail("MIXED_FORM", "replacements are not allowed in match/replace blocks", tok)
        if nac:
            self.ts.fail("SYNTAX", "replacements are not allowed inside 'not' blocks", tok)
        if flag:
            self.ts.fail("NESTED_REPL", "replacements may not be nested", tok)
        return tok

    def element_replacement(self, separated, flag, nac):
        self.open_replacement(separated, flag, nac)
        left = self.elements(":-", flag="deleted")
        self.ts.expect(":-")
        right = self.elements("]]", flag="created")
        self.ts.expect("]]")
        return left + right

    def atom(self, what: str) -> Name:
        tok = self.ts.peek
        if tok.kind == VAR:
            return Name(self.ts.next().value)
        if tok.kind == IDENT and tok.value not in RESERVED:
            return Name(self.ts.next().value)
        if tok.kind == "[[":
            self.ts.fail("NESTED_REPL", "replacements may not be nested")
        self.ts.fail("SYNTAX", f"expected {what}, found {tok.describe()}")

    def name_term(self, what, separated, flag, nac) -> NameTerm:
        if not self.ts.at("[["):
            return self.atom(what)
        self.open_replacement(separated, flag, nac)
        left = right = None
        if not self.ts.at(":-"):
            left = self.atom(what)
        self.ts.expect(":-")
        if not self.ts.at("]]"):
            right = self.atom(what)
        self.ts.expect("]]")
        return Replacement(left, right)

    def modifier(self):
        tok = self.ts.peek
        if tok.kind == IDENT and tok.value in MODIFIER_ORDER:
            return self.ts.next().value
        if tok.kind == "[[":
            self.ts.fail("NESTED_REPL", "replacements may not be nested")
        self.ts.fail("SYNTAX", f"expected 'initial' or 'final', found {tok.describe()}")

    def modifiers(self, separated, flag, nac) -> tuple:
        items = []
        if not self.ts.accept("<<"):
            return ()
        while not self.ts.accept(">>"):
            if self.ts.at("[["):
                self.open_replacement(separated, flag, nac)
                left, right = [], []
                while not self.ts.at(":-"):
                    left.append(self.modifier())
                self.ts.expect(":-")
                while not self.ts.at("]]"):
                    right.append(self.modifier())
                self.ts.expect("]]")
                items.append(Replacement(tuple(left), tuple(right)))
            else:
                items.append(self.modifier())
        return tuple(items)

    def state(self, separated, flag, nac) -> StatePattern:
        self.ts.expect(IDENT, "state")
        where = self.ts.peek.where
        uid = self.fresh()
        name = self.name_term("state name", separated, flag, nac)
        mods = self.modifiers(separated, flag, nac)
        body = ()
        if self.ts.accept("{"):
            body = tuple(self.elements("}", separated=separated, flag=flag, nac=nac))
            self.ts.expect("}")
        else:
            self.ts.expect(";", what="';' or '{'")
        return StatePattern(uid, name, mods, body, flag == "deleted", flag == "created", where)

    def transition(self, separated, flag, nac, tid=None, terminated=True) -> TransitionPattern:
        where = self.ts.peek.where
        uid = self.fresh()
        source = self.name_term("transition source", separated, flag, nac)
        self.ts.expect("-")
        label = self.name_term("transition label", separated, flag, nac)
        self.ts.expect(">")
        target = self.name_term("transition target", separated, flag, nac)
        self.ts.expect(";")
        return TransitionPattern(uid, source, label, target, tid,
                                 flag == "deleted", flag == "created", where)

    def named_transition(self, separated, flag, nac) -> TransitionPattern:
        self.ts.expect(IDENT, "Transition")
        tid = self.ts.expect(VAR, what="transition id variable").value
        self.ts.expect("[[")
        t = self.transition(separated, flag, nac, tid)
        self.ts.expect("]]")
        return t

    def where(self) -> Where:
        self.ts.expect(IDENT, "where")
        constraints = []
        while True:
            left = self.atom("constraint operand")
            op = self.ts.peek
            if op.kind not in ("==", "!="):
                self.ts.fail("SYNTAX", f"expected '==' or '!=', found {op.describe()}")
            self.ts.next()
            right = self.atom("constraint operand")
            constraints.append(Constraint(left, op.value, right))
            if not self.ts.accept(","):
                break
        self.ts.expect(";")
        return Where(tuple(constraints))


def parse_rules(text: str) -> list[Rule]:
    """Parse a rule file; raise DiagnosticError on the first error."""
    return _RuleParser(text).rules()


# --- normalized rules -----------------------------------------------------

@dataclass(frozen=True)
class PState:
    key: object
    name: Name
    modifiers: frozenset
    parent: object = None  # key of the enclosing pattern state

    kind = "state"


@dataclass(frozen=True)
class PTransition:
    key: object
    source: Name
    label: Name
    target: Name
    id: Optional[str] = None

    kind = "transition"

    def terms(self):
        return (self.source, self.label, self.target)


@dataclass(frozen=True)
class Pattern:
    """Pattern elements in declaration order; a state precedes its substates."""

    elements: tuple = ()

    @property
    def states(self) -> tuple:
        return tuple(e for e in self.elements if e.kind == "state")

    @property
    def transitions(self) -> tuple:
        return tuple(e for e in self.elements if e.kind == "transition")

    def get(self, key):
        for e in self.elements:
            if e.key == key:
                return e
        raise KeyError(key)

    def variables(self, include_ids: bool = True) -> list[str]:
        """Schema variables in order of first occurrence."""
        seen: dict[str, None] = {}
        for e in self.elements:
            if e.kind == "state":
                names = [e.name]
            else:
                names = ([Name(e.id)] if include_ids and e.id else []) + list(e.terms())
            for n in names:
                if n.is_var:
                    seen.setdefault(n.value, None)
        return list(seen)

    def canonical(self):
        """Structure with keys replaced by element positions and ids dropped."""
        pos = {e.key: i for i, e in enumerate(self.elements)}
        out = []
        for e in self.elements:
            if e.kind == "state":
                out.append(("state", e.name.value, tuple(m for m in MODIFIER_ORDER if m in e.modifiers),
                            None if e.parent is None else pos[e.parent]))
            else:
                out.append(("transition",) + tuple(t.value for t in e.terms()))
        return tuple(out)


@dataclass(eq=False)
class NormalizedRule:
    name: str
    lhs: Pattern
    rhs: Pattern
    correspondence: dict = field(default_factory=dict)  # lhs key -> rhs key
    nacs: tuple = ()
    constraints: tuple = ()

    def canonical(self):
        lpos = {e.key: i for i, e in enumerate(self.lhs.elements)}
        rpos = {e.key: i for i, e in enumerate(self.rhs.elements)}
        corr = tuple(sorted((lpos[k], rpos[v]) for k, v in self.correspondence.items()))
        return (self.lhs.canonical(), self.rhs.canonical(), corr,
                tuple(n.canonical() for n in self.nacs), tuple(self.constraints))

    def __eq__(self, other):
        if not isinstance(other, NormalizedRule):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    @property
    def inverse(self) -> dict:
        return {v: k for k, v in self.correspondence.items()}

    def created(self) -> list:
        return [e for e in self.rhs.elements if e.key not in self.inverse]

    def deleted(self) -> list:
        return [e for e in self.lhs.elements if e.key not in self.correspondence]


def _side(term, side: str):
    """Project a name term or modifier item onto one side of its replacement."""
    if isinstance(term, Replacement):
        return term.left if side == "L" else term.right
    return term


def project(body, side: str) -> Pattern:
    """One side of an integrated body; elements absent on that side drop out."""
    elements = []

    def visit(items, parent):
        for el in items:
            if isinstance(el, (Nac, Where)):
                continue
            if (side == "L" and el.created) or (side == "R" and el.deleted):
                continue
            if isinstance(el, StatePattern):
                name = _side(el.name, side)
                if name is None:
                    continue
                mods = set()
                for item in el.modifiers:
                    projected = _side(item, side)
                    mods.update([projected] if isinstance(projected, str) else projected)
                elements.append(PState(el.uid, name, frozenset(mods), parent))
                visit(el.body, el.uid)
            else:
                terms = [_side(t, side) for t in (el.source, el.label, el.target)]
                if any(t is None for t in terms):
                    continue
                elements.append(PTransition(el.uid, *terms, id=el.id))

    visit(body, None)
    # transitions nested in state bodies are global; keep textual order
    return Pattern(tuple(elements))


def _conditions(body):
    nacs, constraints = [], []
    for el in body:
        if isinstance(el, Nac):
            nacs.append(project(el.body, "L"))
        elif isinstance(el, Where):
            constraints.extend(el.constraints)
    return tuple(nacs), tuple(constraints)


def _fail(code: str, message: str, where=None):
    line, col = where if where else (None, None)
    raise DiagnosticError([Diagnostic("error", code, message, line, col)])


def _separated_correspondence(rule: Rule, lhs: Pattern, rhs: Pattern) -> dict:
    corr = {}
    lstates = Counter(s.name for s in lhs.states)
    rstates = Counter(s.name for s in rhs.states)
    for name in lstates:
        if name in rstates:
            if lstates[name] > 1 or rstates[name] > 1:
                _fail("AMBIGUOUS_CORRESPONDENCE",
                      f"rule {rule.name!r}: state {name} occurs more than once on a side", rule.where)
            ls = next(s for s in lhs.states if s.name == name)
            rs = next(s for s in rhs.states if s.name == name)
            corr[ls.key] = rs.key
    for ls in lhs.states:
        if ls.key not in corr:
            continue
        rs = rhs.get(corr[ls.key])
        lp = None if ls.parent is None else corr.get(ls.parent)
        if (ls.parent is None) != (rs.parent is None) or (ls.parent is not None and lp != rs.parent):
            _fail("MOVED_STATE",
                  f"rule {rule.name!r}: state {ls.name} changes its parent between match and replace",
                  rule.where)

    lids = Counter(t.id for t in lhs.transitions if t.id)
    rids = Counter(t.id for t in rhs.transitions if t.id)
    for tid in lids:
        if tid in rids:
            if lids[tid] > 1 or rids[tid] > 1:
                _fail("AMBIGUOUS_CORRESPONDENCE",
                      f"rule {rule.name!r}: transition id {tid} is used more than once on a side", rule.where)
            lt = next(t for t in lhs.transitions if t.id == tid)
            rt = next(t for t in rhs.transitions if t.id == tid)
            corr[lt.key] = rt.key

    lplain = Counter(t.terms() for t in lhs.transitions if not t.id)
    rplain = Counter(t.terms() for t in rhs.transitions if not t.id)
    for terms in lplain:
        if terms in rplain:
            if lplain[terms] > 1 or rplain[terms] > 1:
                _fail("AMBIGUOUS_CORRESPONDENCE",
                      f"rule {rule.name!r}: unnamed transition {terms[0]} -{terms[1]}> {terms[2]} "
                      "cannot be paired unambiguously; give it a Transition id", rule.where)
            lt = next(t for t in lhs.transitions if not t.id and t.terms() == terms)
            rt = next(t for t in rhs.transitions if not t.id and t.terms() == terms)
            corr[lt.key] = rt.key
    return corr


def normalize_rule(rule: Rule) -> NormalizedRule:
    if rule.separated:
        lhs = project(rule.match, "L")
        rhs = project(rule.replace, "R")
        nacs, constraints = _conditions(rule.match)
        corr = _separated_correspondence(rule, lhs, rhs)
    else:
        lhs = project(rule.body, "L")
        rhs = project(rule.body, "R")
        nacs, constraints = _conditions(rule.body)
        rkeys = {e.key for e in rhs.elements}
        corr = {e.key: e.key for e in lhs.elements if e.key in rkeys}

    bound = set(lhs.variables())
    for var in rhs.variables(include_ids=False):
        if var not in bound:
            _fail("UNBOUND_RHS_VAR",
                  f"rule {rule.name!r}: variable {var} on the right-hand side does not occur on the left",
                  rule.where)
    for c in constraints:
        for n in (c.left, c.right):
            if n.is_var and n.value not in bound:
                _fail("UNBOUND_RHS_VAR",
                      f"rule {rule.name!r}: variable {n} in 'where {c}' does not occur on the left",
                      rule.where)
    return NormalizedRule(rule.name, lhs, rhs, corr, nacs, constraints)


def load_rule(text: str, name: Optional[str] = None) -> NormalizedRule:
    """Parse ``text`` and normalize the rule called ``name`` (or the only rule)."""
    rules = parse_rules(text)
    if name is None:
        if len(rules) != 1:
            _fail("NO_SUCH_RULE", f"expected exactly one rule, found {len(rules)}; pick one by name")
        return normalize_rule(rules[0])
    for r in rules:
        if r.name == name:
            return normalize_rule(r)
    _fail("NO_SUCH_RULE", f"no rule named {name!r}")


def print_pattern(pattern: Pattern, name: str = "pattern") -> str:
    """Render a pattern as an integrated rule without replacements."""
    from .syntax import format_modifiers

    children: dict = {}
    for s in pattern.states:
        children.setdefault(s.parent, []).append(s)
    lines = [f"rule {name} {{"]

    def emit(s: PState, indent: int) -> None:
        pad = "  " * indent
        head = f"{pad}state {s.name}{format_modifiers(s.modifiers)}"
        kids = children.get(s.key, [])
        if not kids:
            lines.append(head + ";")
            return
        lines.append(head + " {")
        for k in kids:
            emit(k, indent + 1)
        lines.append(pad + "}")

    for s in children.get(None, []):
        emit(s, 1)
    for t in pattern.transitions:
        text = f"{t.source} -{t.label}> {t.target};"
        lines.append(f"  Transition {t.id} [[ {text} ]]" if t.id else f"  {text}")
    lines.append("}")
    return "\n".join(lines) + "\n"
