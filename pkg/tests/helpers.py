"""Model generators and a brute-force matcher used as an independent oracle."""
from __future__ import annotations

import itertools
import random

from automorph.matching import Match
from automorph.model import Automaton, State, Transition

LABELS = ("x", "y", "z")


def random_model(rng: random.Random, max_states=6, max_depth=3, max_transitions=6,
                 labels=LABELS, unique_initial=False, min_states=1) -> Automaton:
    """A random valid automaton with states named s0, s1, ... in preorder.

    With ``unique_initial`` every composite gets exactly one initial
    substate and exactly one top-level state is initial.
    """
    n = rng.randint(min_states, max_states)
    # parents[i] is the index of state i's parent, chosen among earlier states
    parents: list = []
    level = []
    for i in range(n):
        options = [None] + [j for j in range(i) if level[j] < max_depth]
        p = rng.choice(options)
        parents.append(p)
        level.append(0 if p is None else level[p] + 1)

    children: dict = {}
    for i, p in enumerate(parents):
        children.setdefault(p, []).append(i)

    mods: list = [set() for _ in range(n)]
    for i in range(n):
        if rng.random() < 0.2:
            mods[i].add("final")
    if unique_initial:
        for group in children.values():
            mods[rng.choice(group)].add("initial")
    else:
        for i in range(n):
            if rng.random() < 0.35:
                mods[i].add("initial")

    def build(i) -> State:
        return State(f"s{i}", frozenset(mods[i]), tuple(build(c) for c in children.get(i, [])))

    # renumber so names follow document order
    tops = tuple(build(i) for i in children.get(None, []))
    model = Automaton(tops)
    order = {s.name: f"s{k}" for k, s in enumerate(model.walk())}

    def rename(s: State) -> State:
        return State(order[s.name], s.modifiers, tuple(rename(c) for c in s.substates))

    tops = tuple(rename(s) for s in tops)
    names = [f"s{k}" for k in range(n)]
    transitions = {}
    for _ in range(rng.randint(0, max_transitions)):
        t = Transition(rng.choice(names), rng.choice(labels), rng.choice(names))
        transitions.setdefault(t, None)
    return Automaton(tops, tuple(transitions))


def _unify(binding, term, value):
    if not term.is_var:
        return term.value == value
    if term.value in binding:
        return binding[term.value] == value
    binding[term.value] = value
    return True


def _holds(constraint, binding):
    def val(n):
        return binding[n.value] if n.is_var else n.value
    equal = val(constraint.left) == val(constraint.right)
    return equal if constraint.op == "==" else not equal


def brute_force_matches(pattern, nacs, constraints, model: Automaton, seed=None) -> list:
    """Enumerate every injective assignment and keep the consistent ones."""
    host_states = list(model.walk())
    parent_of = {}
    for s in host_states:
        for c in s.substates:
            parent_of[c.name] = s.name
    host_transitions = list(model.transitions)
    pstates = [e for e in pattern.elements if e.kind == "state"]
    ptrans = [e for e in pattern.elements if e.kind == "transition"]

    found = []
    for sa in itertools.permutations(range(len(host_states)), len(pstates)):
        for ta in itertools.permutations(range(len(host_transitions)), len(ptrans)):
            binding = dict(seed or {})
            emap = {}
            ok = True
            for p, i in zip(pstates, sa):
                h = host_states[i]
                emap[p.key] = h.name
                ok = ok and _unify(binding, p.name, h.name) and p.modifiers <= h.modifiers
            for p, i in zip(ptrans, ta):
                h = host_transitions[i]
                emap[p.key] = h
                if p.id is not None:
                    ok = ok and _unify(binding, type(p.source)(p.id), h)
                for term, value in zip((p.source, p.label, p.target), (h.source, h.label, h.target)):
                    ok = ok and _unify(binding, term, value)
            if not ok:
                continue
            if any(p.parent is not None and parent_of.get(emap[p.key]) != emap[p.parent] for p in pstates):
                continue
            if not all(_holds(c, binding) for c in constraints):
                continue
            if any(brute_force_matches(n, (), (), model, binding) for n in nacs):
                continue
            index = {}
            for p, i in zip(pstates, sa):
                index[p.key] = i
            for p, i in zip(ptrans, ta):
                index[p.key] = i
            key = tuple(index[e.key] for e in pattern.elements)
            found.append((key, Match(binding, emap)))
    found.sort(key=lambda kv: kv[0])
    return [m for _, m in found]


def hierarchical_corpus(count=24, seed=2024, max_states=12):
    """Models with unique initials and at least one composite state."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        m = random_model(rng, max_states=max_states, max_depth=3, max_transitions=10,
                         unique_initial=True, min_states=3)
        if not m.is_flat():
            out.append(m)
    return out
