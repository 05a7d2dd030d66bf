"""Candidate-invariant predicates: parsing, purity screening, evaluation.

A predicate is a boolean expression over a program's declared variables.
The predicate grammar is the program's own boolean expression grammar, so a
parsed predicate cannot mutate state by construction; `validate_pure`
additionally screens raw candidate text that looks like a statement (e.g.
`a += 1`) and reports why it was rejected instead of a bare syntax error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .lang import (
    DEFAULT_WIDTH,
    BinArith,
    BoolBin,
    BoolExpr,
    BoolLit,
    Cmp,
    IntLit,
    Neg,
    Not,
    ParseError,
    Program,
    Var,
    check_width,
    mask_of,
    parse_expression,
    variables_of_expr,
)

Predicate = BoolExpr


class EvalFault(Exception):
    """Division or modulo by zero while evaluating an expression."""


@dataclass(frozen=True)
class Rejection:
    """Outcome of purity screening for an unusable candidate."""
    reason: str

    def __bool__(self) -> bool:
        return False


def parse_predicate(text: str, p: Program) -> Predicate:
    """Parse `text` as a boolean predicate scoped to `p`'s variables.

    Raises ParseError on bad syntax or unknown variables and when the text
    parses as an arithmetic (non-boolean) expression.
    """
    expr = parse_expression(text, set(p.var_names))
    if not isinstance(expr, (BoolLit, Cmp, Not, BoolBin)):
        raise ParseError("predicate must be a boolean expression", 1, 1)
    return expr


# Mutation-looking constructs that predicates must never contain. The bare
# `=` pattern must not match ==, !=, <=, >=.
_MUTATION_PATTERNS = [
    (re.compile(r"(\+=|-=|\*=|/=|%=)"), "compound assignment"),
    (re.compile(r"(\+\+|--)"), "increment/decrement"),
    (re.compile(r"(?<![=!<>])=(?!=)"), "assignment"),
    (re.compile(r"\bnondet\b"), "nondeterministic choice"),
]


def validate_pure(candidate: Union[str, Predicate], p: Optional[Program] = None):
    """Check that a candidate denotes a pure boolean condition.

    Accepts either raw candidate text (screened and parsed against `p`) or an
    already-parsed Predicate (walked defensively). Returns the Predicate when
    acceptable, else a `Rejection` naming the offending construct.
    """
    if isinstance(candidate, str):
        if p is None:
            raise ValueError("validating raw text requires the program scope")
        for pat, what in _MUTATION_PATTERNS:
            if pat.search(candidate):
                return Rejection(f"mutating construct: {what}")
        try:
            return parse_predicate(candidate, p)
        except ParseError as e:
            return Rejection(f"not a boolean condition: {e}")
    ok = _walk_pure(candidate)
    if ok is not True:
        return Rejection(ok)
    return candidate


def _walk_pure(node) -> Union[bool, str]:
    if isinstance(node, (BoolLit, IntLit, Var)):
        return True
    if isinstance(node, (Cmp, BoolBin, BinArith)):
        for side in (node.left, node.right):
            r = _walk_pure(side)
            if r is not True:
                return r
        return True
    if isinstance(node, (Not, Neg)):
        return _walk_pure(node.operand)
    return f"non-predicate node {type(node).__name__}"


def eval_arith(expr, state: Mapping, width: int = DEFAULT_WIDTH) -> int:
    """Evaluate an arithmetic expression to a residue in [0, 2**width)."""
    mask = mask_of(check_width(width))
    return _ea(expr, state, mask)


def _ea(e, s: Mapping, mask: int) -> int:
    if isinstance(e, IntLit):
        return e.value & mask
    if isinstance(e, Var):
        return s[e.name] & mask
    if isinstance(e, Neg):
        return (-_ea(e.operand, s, mask)) & mask
    if isinstance(e, BinArith):
        a = _ea(e.left, s, mask)
        b = _ea(e.right, s, mask)
        op = e.op
        if op == "+":
            return (a + b) & mask
        if op == "-":
            return (a - b) & mask
        if op == "*":
            return (a * b) & mask
        if b == 0:
            raise EvalFault(f"{op} by zero")
        return a // b if op == "/" else a % b
    raise TypeError(f"not an arithmetic node: {e!r}")


def eval_predicate(q: Predicate, s: Mapping, width: int = DEFAULT_WIDTH) -> bool:
    """Evaluate a predicate on a total state; deterministic and side-effect
    free. Raises EvalFault on division/modulo by zero (callers treat that as
    a property violation at the evaluation site).
    """
    mask = mask_of(check_width(width))
    return _eb(q, s, mask)


def _eb(e, s: Mapping, mask: int) -> bool:
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Not):
        return not _eb(e.operand, s, mask)
    if isinstance(e, BoolBin):
        if e.op == "&&":
            return _eb(e.left, s, mask) and _eb(e.right, s, mask)
        return _eb(e.left, s, mask) or _eb(e.right, s, mask)
    if isinstance(e, Cmp):
        a = _ea(e.left, s, mask)
        b = _ea(e.right, s, mask)
        op = e.op
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    raise TypeError(f"not a boolean node: {e!r}")


def predicate_vars(q: Predicate) -> set:
    return variables_of_expr(q)
