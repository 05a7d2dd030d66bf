import random

import pytest
from hypothesis import given, settings, strategies as st

from invh import ParseError, ScopeError, locations_of, parse_program, pretty_print
from invh.lang import Assign, If, IntLit, Skip, Var, While, iter_statements, print_expr
from invh.predicate import parse_predicate
from invh.randgen import gen_program

from conftest import FIG1_SRC


def test_parse_fig1_labels(fig1):
    assert set(fig1.labels) == {"B", "E"}
    assert fig1.var_names == ("x",)
    assert fig1.decls[0].init == 3


def test_parse_empty_program():
    p = parse_program("")
    assert p.decls == () and p.body == ()


def test_duplicate_label_rejected():
    with pytest.raises(ScopeError, match="duplicate label 'A'"):
        parse_program("int x; @A: skip; @A: skip;")


def test_undeclared_variable_rejected():
    with pytest.raises(ParseError, match="undeclared variable 'y'"):
        parse_program("int x; y = 1;")


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_program("int x;\nx = ;")
    assert info.value.line == 2
    assert info.value.col >= 4


def test_locations_in_source_order(fig1):
    assert locations_of(fig1) == ["B", "E"]
    assert locations_of(parse_program("int x; x = 1;")) == []
    nested = parse_program(
        "int x; int y;"
        "@H1: while (x < 3) { @H2: while (y < 3) { y = y + 1; } x = x + 1; }"
    )
    assert locations_of(nested) == ["H1", "H2"]


def test_label_map_matches_locations(fig1):
    assert set(fig1.labels) == set(locations_of(fig1))


def test_round_trip_fig1(fig1):
    assert parse_program(pretty_print(fig1)) == fig1


HAND_PROGRAMS = [
    "",
    "int x;",
    "int x = -3; x = x + 1;",
    "int a; int b = 2; if (a < b) { a = b; } else { skip; }",
    "int a; if (a == 0) { a = 1; }",
    "int n; n = nondet(); assume(n > 2); assert(n != 0);",
    "int x; @L: while (x < 5 && x != 3) { x = x + 1; }",
    "int x; x = -x + 2 * (x - 1);",
    "int x; assert(!(x < 1) || x == 0);",
    "int x; int y; x = y / 2 % 3;",
]


@pytest.mark.parametrize("src", HAND_PROGRAMS)
def test_round_trip_handwritten(src):
    p = parse_program(src)
    assert parse_program(pretty_print(p)) == p


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_round_trip_generated(seed):
    p = gen_program(random.Random(seed))
    assert parse_program(pretty_print(p)) == p


def test_expression_precedence_structure():
    p = parse_program("int x; int y; x = x + 2 * y;")
    expr = p.body[0].expr
    assert expr.op == "+" and expr.right.op == "*"
    p2 = parse_program("int x; int y; x = (x + 2) * y;")
    assert p2.body[0].expr.op == "*"
    assert print_expr(p2.body[0].expr) == "(x + 2) * y"


def test_left_associativity_preserved():
    p = parse_program("int x; x = x - 1 - 2;")
    expr = p.body[0].expr
    assert expr.op == "-" and expr.left.op == "-"
    assert parse_program(pretty_print(p)) == p
    # explicit right association survives the round trip too
    p2 = parse_program("int x; x = x - (1 - 2);")
    assert p2.body[0].expr.right.op == "-"
    assert parse_program(pretty_print(p2)) == p2


def test_boolean_arith_shape_checked():
    with pytest.raises(ParseError):
        parse_program("int x; if (x + 1) { skip; }")
    with pytest.raises(ParseError):
        parse_program("int x; x = x < 2;")
    with pytest.raises(ParseError):
        parse_program("int x; if (true == false) { skip; }")


def test_comments_and_whitespace():
    p = parse_program("int x; // declare\n// loop next\nx = 1; // set\n")
    assert len(p.body) == 1


def test_statement_at_resolves_paths():
    p = parse_program(
        "int x; if (x < 1) { @T: x = 1; } else { @F: skip; } @W: while (x < 2) { @I: x = x + 1; }"
    )
    assert isinstance(p.statement_at(p.resolve_label("T")), Assign)
    assert isinstance(p.statement_at(p.resolve_label("F")), Skip)
    assert isinstance(p.statement_at(p.resolve_label("W")), While)
    inner = p.statement_at(p.resolve_label("I"))
    assert isinstance(inner, Assign) and inner.label == "I"
    with pytest.raises(ScopeError):
        p.resolve_label("Z")


def test_iter_statements_source_order():
    p = parse_program(FIG1_SRC)
    kinds = [type(s).__name__ for s, _ in iter_statements(p)]
    assert kinds == ["While", "Assign", "Assert"]
