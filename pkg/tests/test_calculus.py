import itertools
import threading
import time

import pytest

from invh import (
    DEC_FALSE,
    DEC_PROP,
    DEC_U,
    ImpureCandidateError,
    Verdict,
    VerifierConfig,
    baseline_solve,
    check_hoare_while,
    decide,
    make_loop_spec,
    parse_program,
    parse_predicate,
    property_from_text,
    run_concrete,
)
from invh.calculus import classify
from invh.interp import BudgetExceeded


@pytest.fixture(scope="module")
def five_loop():
    return parse_program("int x = 0; @H: while (x < 5) { x = x + 1; } @E: assert(x == 6);")


def test_rule_table_total_and_exclusive():
    expected = {
        # target query F always short-circuits
        (Verdict.T, Verdict.F): (DEC_FALSE, Verdict.F),
        (Verdict.F, Verdict.F): (DEC_FALSE, Verdict.F),
        (Verdict.U, Verdict.F): (DEC_FALSE, Verdict.F),
        # proved candidate passes the target verdict through
        (Verdict.T, Verdict.T): (DEC_PROP, Verdict.T),
        (Verdict.T, Verdict.U): (DEC_PROP, Verdict.U),
        # everything else is explicitly inconclusive
        (Verdict.F, Verdict.T): (DEC_U, Verdict.U),
        (Verdict.F, Verdict.U): (DEC_U, Verdict.U),
        (Verdict.U, Verdict.T): (DEC_U, Verdict.U),
        (Verdict.U, Verdict.U): (DEC_U, Verdict.U),
    }
    assert len(expected) == 9
    for pair in itertools.product(Verdict, repeat=2):
        assert classify(*pair) == expected[pair]


def test_fig1_golden_judgment(fig1, fig1_target, fig1_candidate, cfg8):
    j = decide(fig1, fig1_target, fig1_candidate, cfg8)
    assert j.outcome is Verdict.T
    assert j.rule == DEC_PROP
    assert j.candidate_check.verdict is Verdict.T
    assert j.target_check.verdict is Verdict.T
    assert baseline_solve(fig1, fig1_target, cfg8).verdict is Verdict.T


def test_dec_false_short_circuit(five_loop, cfg8):
    target = property_from_text("x == 6", "E", five_loop)
    q = property_from_text("x <= 5", "H", five_loop)
    j = decide(five_loop, target, q, cfg8)
    assert j.outcome is Verdict.F
    assert j.rule == DEC_FALSE
    assert j.target_check.verdict is Verdict.F


def test_dec_u_unproven_candidate_no_transfer(five_loop, cfg8):
    # assuming x < 5 at the head kills the exiting run, making the target
    # vacuously true under the assumption; an unproven candidate must not
    # transfer that T
    target = property_from_text("x == 5", "E", five_loop)
    q = property_from_text("x < 5", "H", five_loop)
    j = decide(five_loop, target, q, cfg8)
    assert j.candidate_check.verdict is Verdict.F
    assert j.target_check.verdict is Verdict.T
    assert j.outcome is Verdict.U
    assert j.rule == DEC_U


def test_neutral_candidate_passes_baseline_verdict(fig1, fig1_target, cfg8):
    q = property_from_text("true", "B", fig1)
    j = decide(fig1, fig1_target, q, cfg8)
    base = baseline_solve(fig1, fig1_target, cfg8)
    assert j.candidate_check.verdict is Verdict.T
    assert j.outcome == base.verdict is Verdict.T


def test_impure_candidate_rejected_before_verification(fig1, fig1_target, cfg8):
    from invh import Property
    from invh.lang import Assign, IntLit

    bogus = Property(Assign("x", IntLit(1)), "B")
    with pytest.raises(ImpureCandidateError):
        decide(fig1, fig1_target, bogus, cfg8)


def test_scheduling_independence(five_loop, cfg8):
    target = property_from_text("x == 6", "E", five_loop)
    q = property_from_text("x <= 5", "H", five_loop)
    seen = {(decide(five_loop, target, q, cfg8).outcome,
             decide(five_loop, target, q, cfg8).rule) for _ in range(10)}
    assert seen == {(Verdict.F, DEC_FALSE)}


def test_refutation_cancels_candidate_query():
    p = parse_program(
        "int a; int b; int c;\n"
        "@S: skip;\n"
        "@H: while (true) { a = nondet(); b = nondet(); c = nondet(); }\n"
    )
    cfg = VerifierConfig(width=8, budget=5_000_000, backends=("explicit",))
    target = property_from_text("false", "S", p)
    q = property_from_text("true", "H", p)
    t0 = time.perf_counter()
    j = decide(p, target, q, cfg)
    wall = time.perf_counter() - t0
    assert j.outcome is Verdict.F
    assert j.rule == DEC_FALSE
    assert j.candidate_check.cancelled
    assert j.candidate_check.verdict is Verdict.U
    assert wall < 5.0  # the candidate enumeration alone would take far longer


def test_external_cancel_token(fig1, fig1_target, fig1_candidate, cfg8):
    token = threading.Event()
    token.set()
    j = decide(fig1, fig1_target, fig1_candidate, cfg8, cancel=token)
    assert j.outcome is Verdict.U
    assert j.rule == DEC_U


def test_total_cost_is_sum(fig1, fig1_target, fig1_candidate, cfg8):
    j = decide(fig1, fig1_target, fig1_candidate, cfg8)
    assert j.total_cost == j.candidate_check.cost + j.target_check.cost
    assert j.decide_wall_time > 0


# -- Hoare while-rule checker -------------------------------------------------

def test_hoare_fig1_invariant_holds(fig1, cfg8):
    spec = make_loop_spec(
        fig1, "B",
        parse_predicate("x == 3", fig1),
        parse_predicate("x % 7 == 3", fig1),
        parse_predicate("x != 145", fig1),
    )
    report = check_hoare_while(spec, cfg8)
    assert report.holds


def test_hoare_weak_invariant_fails_consecution(fig1, cfg8):
    spec = make_loop_spec(
        fig1, "B",
        parse_predicate("x == 3", fig1),
        parse_predicate("x < 150", fig1),
        parse_predicate("x != 145", fig1),
    )
    report = check_hoare_while(spec, cfg8)
    assert not report.holds
    assert report.failed_premise == "consecution"
    # witness replays: one body execution from the witness violates the invariant
    witness = report.witness
    assert witness is not None
    body_prog = parse_program(f"int x = {witness['x']}; x = x + 7;")
    out = run_concrete(body_prog, resolver=lambda n: 0, width=8)
    assert not out.configs[-1].state["x"] < 150


def test_hoare_weakest_instance_holds(fig1, cfg8):
    spec = make_loop_spec(
        fig1, "B",
        parse_predicate("x == 3", fig1),
        parse_predicate("true", fig1),
        parse_predicate("true", fig1),
    )
    assert check_hoare_while(spec, cfg8).holds


def test_hoare_initiation_and_exit_failures(cfg8):
    p = parse_program("int x = 0; @H: while (x < 4) { x = x + 2; } @E: skip;")
    bad_init = make_loop_spec(p, "H",
                              parse_predicate("x == 1", p),
                              parse_predicate("x == 0", p),
                              parse_predicate("true", p))
    r = check_hoare_while(bad_init, cfg8)
    assert (r.failed_premise, r.witness["x"]) == ("initiation", 1)

    bad_exit = make_loop_spec(p, "H",
                              parse_predicate("x == 0", p),
                              parse_predicate("x % 2 == 0", p),
                              parse_predicate("x == 4", p))
    r2 = check_hoare_while(bad_exit, cfg8)
    assert r2.failed_premise == "exit"
    assert r2.witness["x"] % 2 == 0 and r2.witness["x"] >= 4


def test_hoare_budget_exceeded(fig1):
    cfg = VerifierConfig(width=8, budget=10)
    spec = make_loop_spec(fig1, "B",
                          parse_predicate("x == 3", fig1),
                          parse_predicate("x % 7 == 3", fig1),
                          parse_predicate("x != 145", fig1))
    with pytest.raises(BudgetExceeded):
        check_hoare_while(spec, cfg)


def test_hoare_label_must_be_while(fig1):
    from invh import ScopeError

    with pytest.raises(ScopeError):
        make_loop_spec(fig1, "E", parse_predicate("true", fig1),
                       parse_predicate("true", fig1), parse_predicate("true", fig1))


def test_hoare_consecution_resolves_nondet_over_all_values():
    cfg = VerifierConfig(width=4, budget=200_000)
    p = parse_program("int x; int y; @H: while (x < 4) { y = nondet(); x = x + 1; } @E: skip;")
    stable = make_loop_spec(p, "H",
                            parse_predicate("x == 0", p),
                            parse_predicate("x <= 4", p),
                            parse_predicate("x == 4", p))
    assert check_hoare_while(stable, cfg).holds
    # y is havocked each iteration, so no bound on y survives the body
    fragile = make_loop_spec(p, "H",
                             parse_predicate("x == 0 && y == 0", p),
                             parse_predicate("y < 8", p),
                             parse_predicate("true", p))
    report = check_hoare_while(fragile, cfg)
    assert report.failed_premise == "consecution"


def test_hoare_decide_coherence():
    cfg = VerifierConfig(width=8, budget=500_000, backends=("explicit",))
    cases = [(0, 2, 10), (1, 3, 40), (3, 7, 150), (2, 5, 99)]
    for init, step_, bound in cases:
        p = parse_program(
            f"int x = {init}; @H: while (x < {bound}) {{ x = x + {step_}; }} @E: skip;"
        )
        pre = parse_predicate(f"x == {init}", p)
        inv = parse_predicate(f"x % {step_} == {init % step_}", p)
        post = parse_predicate(f"x >= {bound}", p)
        report = check_hoare_while(make_loop_spec(p, "H", pre, inv, post), cfg)
        assert report.holds, (init, step_, bound)
        # initiation + consecution imply the location-based invariant check
        target = property_from_text(f"x >= {bound}", "E", p)
        from invh import Property

        j = decide(p, target, Property(inv, "H"), cfg)
        assert j.candidate_check.verdict is Verdict.T
        assert j.outcome is Verdict.T
