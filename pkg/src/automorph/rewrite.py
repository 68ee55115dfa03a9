"""Replace a matched left-hand side by the rule's right-hand side."""
from __future__ import annotations

from dataclasses import dataclass, field

from .matching import Match, find_rule_matches, resolve
from .model import Automaton, SemanticsError, State, Transition, dedup, diagnose
from .rules import NormalizedRule

DEFAULT_MAX_ITERATIONS = 10000


class TransformError(SemanticsError):
    pass


@dataclass(frozen=True)
class Strategy:
    kind: str = "once"  # "once" | "fixpoint"
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        if self.kind not in ("once", "fixpoint"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass
class ApplyReport:
    applications: int
    final_model: Automaton
    log: list = field(default_factory=list)  # (rule name, binding summary)
    warnings: list = field(default_factory=list)


def _resolve(term, binding):
    try:
        return resolve(term, binding)
    except KeyError:
        raise TransformError("UNBOUND_RHS_VAR", f"variable {term} is not bound by the match") from None


def apply_at(model: Automaton, rule: NormalizedRule, match: Match) -> Automaton:
    binding, emap = match.binding, match.element_map
    inverse = rule.inverse
    names = set(model.names())

    renames: dict[str, str] = {}
    mod_changes: dict[str, tuple] = {}
    retargets: dict[Transition, tuple] = {}
    for lkey, rkey in rule.correspondence.items():
        left, right = rule.lhs.get(lkey), rule.rhs.get(rkey)
        host = emap[lkey]
        if left.kind == "state":
            new = _resolve(right.name, binding)
            if new != host:
                renames[host] = new
            mod_changes[host] = (left.modifiers - right.modifiers, right.modifiers - left.modifiers)
        else:
            fields = []
            for lt, rt, value in zip(left.terms(), right.terms(), (host.source, host.label, host.target)):
                fields.append(value if lt == rt else _resolve(rt, binding))
            retargets[host] = tuple(fields)

    deleted_states = {emap[e.key] for e in rule.deleted() if e.kind == "state"}
    deleted_transitions = {emap[e.key] for e in rule.deleted() if e.kind == "transition"}

    by_name = {s.name: s for s in model.walk()}
    for name in deleted_states:
        for t in model.transitions:
            if name in (t.source, t.target) and t not in deleted_transitions:
                raise TransformError("DANGLING", f"deleting state {name!r} would leave transition {t} dangling")
        for sub in by_name[name].substates:
            if sub.name not in deleted_states:
                raise TransformError("DANGLING", f"deleting state {name!r} would orphan substate {sub.name!r}")

    # names that survive the rewrite, to detect collisions
    final_names = {renames.get(n, n) for n in names - deleted_states}
    if len(final_names) != len(names - deleted_states):
        raise TransformError("NAME_COLLISION", "renaming would give two states the same name")

    created_children: dict = {}  # host parent name (after renaming) or None -> [State]
    created_names: dict = {}  # rhs key -> name
    created = rule.created()
    created_keys = {e.key for e in created}
    for el in created:
        if el.kind != "state":
            continue
        name = _resolve(el.name, binding)
        if name in final_names:
            raise TransformError("NAME_COLLISION", f"cannot create state {name!r}: the name is taken")
        final_names.add(name)
        created_names[el.key] = name
        if el.parent is None:
            parent = None
        elif el.parent in created_keys:
            parent = ("new", el.parent)
        else:
            host = emap[inverse[el.parent]]
            parent = renames.get(host, host)
        created_children.setdefault(parent, []).append((el.key, el.modifiers))

    def build_created(key, modifiers) -> State:
        kids = [build_created(k, m) for k, m in created_children.get(("new", key), [])]
        return State(created_names[key], frozenset(modifiers), tuple(kids))

    def rebuild(s: State):
        if s.name in deleted_states:
            return None
        mods = s.modifiers
        if s.name in mod_changes:
            remove, add = mod_changes[s.name]
            mods = (mods - remove) | add
        name = renames.get(s.name, s.name)
        subs = [r for r in (rebuild(c) for c in s.substates) if r is not None]
        subs.extend(build_created(k, m) for k, m in created_children.get(name, []))
        return State(name, frozenset(mods), tuple(subs))

    states = [r for r in (rebuild(s) for s in model.states) if r is not None]
    states.extend(build_created(k, m) for k, m in created_children.get(None, []))

    def renamed(t: Transition) -> Transition:
        return Transition(renames.get(t.source, t.source), t.label, renames.get(t.target, t.target))

    transitions = []
    for t in model.transitions:
        if t in deleted_transitions:
            continue
        if t in retargets:
            t = Transition(*retargets[t])
        transitions.append(renamed(t))
    for el in created:
        if el.kind == "transition":
            transitions.append(renamed(Transition(*(_resolve(x, binding) for x in el.terms()))))

    result = Automaton(tuple(states), dedup(transitions))
    errors = [d for d in diagnose(result) if d.is_error]
    if errors:
        raise TransformError("INVALID_RESULT", "; ".join(f"{d.code}: {d.message}" for d in errors))
    return result


def apply(model: Automaton, rule: NormalizedRule, strategy: Strategy = Strategy()) -> ApplyReport:
    order = rule.lhs.variables()
    report = ApplyReport(0, model)
    if strategy.kind == "once":
        matches = find_rule_matches(rule, model)
        if matches:
            report.final_model = apply_at(model, rule, matches[0])
            report.applications = 1
            report.log.append((rule.name, matches[0].summary(order)))
        return report

    current = model
    while True:
        matches = find_rule_matches(rule, current)
        if not matches:
            break
        if report.applications >= strategy.max_iterations:
            raise TransformError(
                "MAX_ITER_EXCEEDED",
                f"rule {rule.name!r} still matches after {report.applications} applications")
        failures = []
        for m in matches:
            try:
                current = apply_at(current, rule, m)
            except TransformError as err:
                failures.append(err.code)
                continue
            report.applications += 1
            report.log.append((rule.name, m.summary(order)))
            break
        else:
            report.warnings.append(
                f"ALL_MATCHES_BLOCKED: all {len(matches)} matches of rule {rule.name!r} "
                f"failed to apply ({', '.join(sorted(set(failures)))})")
            break
    report.final_model = current
    return report
