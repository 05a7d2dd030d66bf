import random

import pytest

from invh import (
    ScopeError,
    enumerate_reachable,
    export_program,
    insert_assumes,
    make_check,
    parse_program,
    pretty_print,
    property_from_text,
    verify_explicit,
    Verdict,
    VerifierConfig,
)
from invh import Property
from invh.lang import Assume, While
from invh.randgen import gen_program, gen_property_set
from invh.interp import property_violation


def test_insert_at_loop_head_covers_reentry(fig1, fig1_candidate):
    asm = insert_assumes(fig1, [fig1_candidate])
    # assume before the loop and at the body end, label preserved
    assert isinstance(asm.body[0], Assume)
    loop = asm.body[1]
    assert isinstance(loop, While) and loop.label == "B"
    assert isinstance(loop.body[-1], Assume)
    assert set(asm.labels) == {"B", "E"}
    assert parse_program(pretty_print(asm)) == asm


def test_insert_true_invariant_preserves_behavior(fig1, fig1_candidate):
    base = enumerate_reachable(fig1, budget=100_000, width=8)
    asm = insert_assumes(fig1, [fig1_candidate])
    restricted = enumerate_reachable(asm, budget=100_000, width=8)
    for label in ("B", "E"):
        assert restricted.label_states[label] == base.label_states[label]


def test_insert_empty_set_is_identity(fig1):
    assert insert_assumes(fig1, []) == fig1


def test_two_properties_same_label_in_order(fig1):
    q1 = property_from_text("x > 0", "B", fig1)
    q2 = property_from_text("x < 200", "B", fig1)
    asm = insert_assumes(fig1, [q1, q2])
    assert asm.body[0] == Assume(q1.predicate)
    assert asm.body[1] == Assume(q2.predicate)
    loop = asm.body[2]
    assert loop.body[-2:] == (Assume(q1.predicate), Assume(q2.predicate))


def test_insert_unknown_label_rejected(fig1):
    prop = property_from_text("x > 0", "B", fig1)
    with pytest.raises(ScopeError, match="unknown label 'Z'"):
        insert_assumes(fig1, [Property(prop.predicate, "Z")])


def test_insert_scope_failure_rejected(fig1):
    other = parse_program("int y; @B: skip;")
    prop = property_from_text("y > 0", "B", other)
    with pytest.raises(ScopeError, match="undeclared"):
        insert_assumes(fig1, [prop])


def test_insert_before_plain_statement():
    p = parse_program("int x; x = 1; @E: assert(x == 1);")
    prop = property_from_text("x == 1", "E", p)
    asm = insert_assumes(p, [prop])
    assert isinstance(asm.body[1], Assume)
    assert asm.body[2].label == "E"


def test_insert_inside_loop_body():
    p = parse_program("int x; while (x < 4) { @L: x = x + 1; }")
    prop = property_from_text("x < 4", "L", p)
    asm = insert_assumes(p, [prop])
    loop = asm.body[0]
    assert isinstance(loop.body[0], Assume)
    assert loop.body[1].label == "L"


def test_behavior_restriction_random():
    rng = random.Random(23)
    for _ in range(30):
        p = gen_program(rng, max_vars=2, width=3)
        props = gen_property_set(rng, p)
        base = enumerate_reachable(p, budget=300_000, width=3)
        restricted = enumerate_reachable(insert_assumes(p, props),
                                         budget=300_000, width=3)
        for label, states in restricted.label_states.items():
            assert states <= base.label_states[label]


def test_transparency_when_assumptions_hold():
    rng = random.Random(29)
    checked = 0
    for _ in range(60):
        p = gen_program(rng, max_vars=2, width=3)
        props = gen_property_set(rng, p)
        base = enumerate_reachable(p, budget=300_000, width=3)
        if any(property_violation(base, q.label, q.predicate, 3) is not None
               for q in props):
            continue
        checked += 1
        restricted = enumerate_reachable(insert_assumes(p, props),
                                         budget=300_000, width=3)
        for label, states in base.label_states.items():
            assert restricted.label_states[label] == states
    assert checked >= 5


def test_idempotence(fig1, fig1_candidate):
    once = insert_assumes(fig1, [fig1_candidate])
    assert insert_assumes(once, []) == once


def test_make_check_trivial_and_failing(fig1, cfg8):
    always = make_check(fig1, property_from_text("true", "B", fig1))
    assert always.label == "B"
    r = verify_explicit(fig1, (), property_from_text("true", "B", fig1), cfg8)
    assert r.verdict is Verdict.T

    # enumeration shows x=150 reaches B, so x<150 fails on the last head visit
    reach = enumerate_reachable(fig1, budget=100_000, width=8)
    assert any(s["x"] == 150 for s in reach.states_at("B"))
    r2 = verify_explicit(fig1, (), property_from_text("x < 150", "B", fig1), cfg8)
    assert r2.verdict is Verdict.F
    assert r2.counterexample.configs[-1].state["x"] == 150


def test_make_check_unknown_label(fig1):
    prop = property_from_text("x > 0", "B", fig1)
    with pytest.raises(ScopeError):
        make_check(fig1, Property(prop.predicate, "Z"))


def test_export_contains_inline_text(fig1, fig1_candidate, fig1_target):
    text = export_program(fig1, [fig1_candidate], make_check(fig1, fig1_target))
    assert "assume(x % 7 == 3)" in text
    assert "assert(x != 145)" in text
    exported = parse_program(text)
    # the check assert lands immediately before the labeled statement
    idx = next(i for i, s in enumerate(exported.body) if s.label == "E")
    assert pretty_print(exported).count("assert(x != 145)") == 2  # check + original
    assert exported.body[idx - 1].cond == fig1_target.predicate


def test_export_check_at_loop_head(fig1, fig1_candidate):
    chk = make_check(fig1, fig1_candidate)
    text = export_program(fig1, [], chk)
    exported = parse_program(text)
    # dual insertion: before the loop and at the body end
    assert text.count("assert(x % 7 == 3)") == 2
    loop = exported.statement_at(exported.resolve_label("B"))
    assert isinstance(loop.body[-1].cond, type(fig1_candidate.predicate))
