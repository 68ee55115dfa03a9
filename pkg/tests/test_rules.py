import re

import pytest

from automorph.flatten import fig3_rule, fig3_separated_rule
from automorph.model import DiagnosticError
from automorph.rules import (
    Name,
    Nac,
    Replacement,
    StatePattern,
    TransitionPattern,
    Where,
    load_rule,
    normalize_rule,
    parse_rules,
    print_pattern,
)

FORWARD_INLINE = ("rule forward { state $source; state $outer { state $inner << [[ initial :- ]] >>; } "
               "$source -$event> [[ $outer :- $inner ]]; }")


def variables(elements):
    found = set()
    for el in elements:
        found.update(re.findall(r"\$\w+", repr(el)))
    return found


def test_parse_integrated_forwarding_rule():
    [rule] = parse_rules(FORWARD_INLINE)
    assert rule.name == "forward" and not rule.separated
    assert len(rule.body) == 3
    source, outer, trans = rule.body
    assert isinstance(source, StatePattern) and source.name == Name("$source")
    inner = outer.body[0]
    assert inner.modifiers == (Replacement(("initial",), ()),)
    assert isinstance(trans, TransitionPattern)
    assert trans.target == Replacement(Name("$outer"), Name("$inner"))
    assert variables(rule.body) == {"$source", "$outer", "$inner", "$event"}


def test_bundled_rule_is_the_figure_text():
    text = fig3_rule()
    body = text[text.index("{") + 1:text.rindex("}")]
    assert body.strip("\n") == (
        "state $source;\n\n"
        "state $outer {\n"
        "  state $inner << [[ initial :- ]] >>;\n"
        "}\n\n"
        "$source -$event> [[ $outer :- $inner]];"
    )
    assert parse_rules(text) == parse_rules(FORWARD_INLINE)


def test_parse_separated_forwarding_rule():
    [rule] = parse_rules(fig3_separated_rule())
    assert rule.separated
    ids = [el.id for el in rule.match + rule.replace if isinstance(el, TransitionPattern)]
    assert ids == ["$T", "$T"]


def test_pure_creation():
    [rule] = parse_rules("rule r { state $a; state [[ :- done ]]; }")
    n = normalize_rule(rule)
    assert [s.name.value for s in n.lhs.states] == ["$a"]
    assert [s.name.value for s in n.rhs.states] == ["$a", "done"]
    assert [e.name.value for e in n.created()] == ["done"]
    assert n.deleted() == []


def test_normalize_integrated_forwarding_rule():
    n = normalize_rule(parse_rules(FORWARD_INLINE)[0])
    assert n.lhs.canonical() == (
        ("state", "$source", (), None),
        ("state", "$outer", (), None),
        ("state", "$inner", ("initial",), 1),
        ("transition", "$source", "$event", "$outer"),
    )
    assert n.rhs.canonical() == (
        ("state", "$source", (), None),
        ("state", "$outer", (), None),
        ("state", "$inner", (), 1),
        ("transition", "$source", "$event", "$inner"),
    )
    assert len(n.correspondence) == 4
    assert n.created() == [] and n.deleted() == []


def test_notations_normalize_equal():
    integrated = load_rule(fig3_rule())
    separated = load_rule(fig3_separated_rule())
    assert integrated == separated
    assert separated.lhs.transitions[0].id == "$T"


def test_identity_rule():
    n = load_rule("rule id { state $a { state $b; } $a -$e> $b; }")
    assert n.lhs == n.rhs
    assert n.correspondence == {e.key: e.key for e in n.lhs.elements}


def test_whole_element_replacement_flags():
    n = load_rule("rule r { [[ state z; a -x> z; :- ]] [[ :- state w <<final>>; ]] }")
    assert [e.kind for e in n.deleted()] == ["state", "transition"]
    assert [(e.name.value, sorted(e.modifiers)) for e in n.created()] == [("w", ["final"])]


def test_created_subtree():
    n = load_rule("rule r { state $p { [[ :- state q { state r <<initial>>; } ]] } }")
    created = n.created()
    assert [e.name.value for e in created] == ["q", "r"]
    assert created[1].parent == created[0].key
    assert created[0].parent == n.rhs.states[0].key


def test_nac_and_where():
    [rule] = parse_rules("rule r { state $s; not { $s -x> $t; } $s -$e> $u; where $e != y, $u == $s; }")
    assert any(isinstance(el, Nac) for el in rule.body)
    n = normalize_rule(rule)
    assert len(n.nacs) == 1 and n.nacs[0].transitions[0].target == Name("$t")
    assert [str(c) for c in n.constraints] == ["$e != y", "$u == $s"]


def test_nested_replacement_rejected():
    with pytest.raises(DiagnosticError) as err:
        parse_rules("rule r { state [[ [[ a :- b ]] :- c ]]; }")
    assert err.value.codes == ["NESTED_REPL"]
    with pytest.raises(DiagnosticError) as err:
        parse_rules("rule r { [[ state a << [[ initial :- ]] >>; :- ]] }")
    assert err.value.codes == ["NESTED_REPL"]


def test_mixed_form_rejected():
    with pytest.raises(DiagnosticError) as err:
        parse_rules("rule r { match { state [[ a :- b ]]; } replace { } }")
    assert err.value.codes == ["MIXED_FORM"]
    with pytest.raises(DiagnosticError) as err:
        parse_rules("rule r { match { state a; } replace { state a; } state b; }")
    assert err.value.codes == ["MIXED_FORM"]
    with pytest.raises(DiagnosticError) as err:
        parse_rules("rule r { state a; match { } replace { } }")
    assert err.value.codes == ["MIXED_FORM"]


def test_unbound_rhs_variable():
    with pytest.raises(DiagnosticError) as err:
        load_rule("rule r { state [[ $a :- $b ]]; }")
    assert err.value.codes == ["UNBOUND_RHS_VAR"]
    assert "$b" in err.value.diagnostics[0].message
    with pytest.raises(DiagnosticError) as err:
        load_rule("rule r { state $a; where $a != $z; }")
    assert "$z" in err.value.diagnostics[0].message


def test_ambiguous_correspondence():
    text = "rule r { match { state a; a -x> a; a -x> a; } replace { state a; a -x> a; } }"
    with pytest.raises(DiagnosticError) as err:
        load_rule(text)
    assert err.value.codes == ["AMBIGUOUS_CORRESPONDENCE"]


def test_separated_pairs_by_structure_and_id():
    n = load_rule("rule r { match { state $a; $a -x> $a; Transition $T [[ $a -y> $a; ]] } "
                  "replace { state $a; $a -x> $a; } }")
    lt = n.lhs.transitions
    assert n.correspondence[lt[0].key] == n.rhs.transitions[0].key
    assert lt[1].key not in n.correspondence  # $T only on the left: deleted


def test_duplicate_rule_names():
    with pytest.raises(DiagnosticError) as err:
        parse_rules("rule r { } rule r { }")
    assert err.value.codes == ["DUP_RULE"]


def test_syntax_error_location():
    with pytest.raises(DiagnosticError) as err:
        parse_rules("rule r {\n  state $a\n}")
    d = err.value.diagnostics[0]
    assert (d.code, d.line, d.column) == ("SYNTAX", 3, 1)


def test_rule_order_preserved():
    assert [r.name for r in parse_rules("rule b { } rule a { } rule c { }")] == ["b", "a", "c"]


def _strip(text, side):
    pick = 1 if side == "L" else 2
    return re.sub(r"\[\[(.*?):-(.*?)\]\]", lambda m: m.group(pick), text, flags=re.S)


@pytest.mark.parametrize("text", [
    FORWARD_INLINE,
    "rule r { state [[ a :- b ]] << initial [[ final :- ]] >> { state $c; } $c -[[ x :- y ]]> [[ a :- b ]]; }",
    "rule r { state $a; state [[ :- done ]]; $a -e> $a; }",
    "rule r { state $p { state $q << [[ :- final ]] >>; } $q -$e> $p; }",
])
def test_projection_soundness(text):
    n = load_rule(text)
    left = load_rule(re.sub(r"state\s*;", "", _strip(text, "L")))
    right = load_rule(re.sub(r"state\s*;", "", _strip(text, "R")))
    assert left.lhs.canonical() == n.lhs.canonical()
    assert right.rhs.canonical() == n.rhs.canonical()


def test_print_pattern_round_trip():
    n = load_rule(fig3_separated_rule())
    again = load_rule(print_pattern(n.lhs))
    assert again.lhs.canonical() == n.lhs.canonical()
    assert again.lhs.transitions[0].id == "$T"


def test_normalize_is_pure():
    [rule] = parse_rules(FORWARD_INLINE)
    assert normalize_rule(rule) == normalize_rule(rule)
    assert isinstance(parse_rules("rule w { where a == a; }")[0].body[0], Where)


def test_named_transition_inside_element_replacement():
    n = load_rule("rule r { state $a; [[ :- Transition $N [[ $a -go> $a; ]] ]] }")
    [created] = n.created()
    assert created.kind == "transition" and created.id == "$N"
