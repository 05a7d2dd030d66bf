"""Assumption insertion and check designation.

A Property pairs a predicate with a labeled location. `insert_assumes`
builds the assumption-restricted program: each property's predicate is
assumed on every arrival at its location. For a label on a `while` statement
the arrival point is the loop head, reached again on each iteration, so the
assume is inserted both immediately before the loop and at the end of the
loop body (covering the back edge); for any other statement a single assume
immediately before it covers all arrivals, since only loop heads are
back-edge targets in this structured language.

Checks are kept as data (`CheckSpec`) consulted by the built-in verifiers;
`export_program` materializes them as inline `assert` text for external
tools.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .lang import (
    Assert,
    Assume,
    If,
    Program,
    ScopeError,
    While,
    pretty_print,
    print_expr,
    variables_of_expr,
)
from .predicate import Predicate


@dataclass(frozen=True)
class Property:
    """Predicate asserted/assumed at every arrival to a labeled location."""

    predicate: Predicate
    label: str

    def __str__(self) -> str:
        return f"{print_expr(self.predicate)} @ {self.label}"


@dataclass(frozen=True)
class CheckSpec:
    """Instruction to verifiers: test `predicate` on every arrival at `label`."""

    predicate: Predicate
    label: str


def scope_check(p: Program, prop: Property) -> None:
    if prop.label not in p.labels:
        raise ScopeError(f"unknown label '{prop.label}'")
    unknown = variables_of_expr(prop.predicate) - set(p.var_names)
    if unknown:
        names = ", ".join(sorted(unknown))
        raise ScopeError(f"predicate references undeclared variable(s): {names}")


def property_from_text(pred_text: str, label: str, p: Program) -> Property:
    from .predicate import parse_predicate

    prop = Property(parse_predicate(pred_text, p), label)
    scope_check(p, prop)
    return prop


def _insert_at_labels(p: Program, by_label: dict, make_stmt) -> Program:
    """Insert make_stmt(pred) statements before each labeled target (and at
    the body end of labeled loops)."""

    def rebuild(block: tuple) -> tuple:
        out = []
        for stmt in block:
            if isinstance(stmt, If):
                stmt = replace(stmt, then_body=rebuild(stmt.then_body),
                               else_body=rebuild(stmt.else_body))
            elif isinstance(stmt, While):
                stmt = replace(stmt, body=rebuild(stmt.body))
            preds = by_label.get(stmt.label)
            if preds:
                out.extend(make_stmt(q) for q in preds)
                if isinstance(stmt, While):
                    stmt = replace(
                        stmt, body=stmt.body + tuple(make_stmt(q) for q in preds)
                    )
            out.append(stmt)
        return tuple(out)

    return Program(p.decls, rebuild(p.body))


def insert_assumes(p: Program, properties: Iterable) -> Program:
    """Build the assumption-restricted program for `properties`.

    Multiple properties at one label are assumed in their given order.
    Original labels are preserved and the result parses and scope-checks.
    """
    by_label: dict = {}
    for prop in properties:
        scope_check(p, prop)
        by_label.setdefault(prop.label, []).append(prop.predicate)
    if not by_label:
        return p
    return _insert_at_labels(p, by_label, Assume)


def make_check(p: Program, prop: Property) -> CheckSpec:
    """Designate `prop` as the assertion to check on every arrival at its
    location. Checking a candidate invariant is exactly this with the
    candidate as the property."""
    scope_check(p, prop)
    return CheckSpec(prop.predicate, prop.label)


def export_program(
    p: Program, properties: Iterable = (), check: Optional[CheckSpec] = None
) -> str:
    """Textual assumption-restricted program with the check as inline
    `assert`, for external verifiers. Assumes gate the location before the
    assert tests it."""
    asm = insert_assumes(p, properties)
    if check is not None:
        if check.label not in asm.labels:
            raise ScopeError(f"unknown label '{check.label}'")
        asm = _insert_at_labels(asm, {check.label: [check.predicate]}, Assert)
    return pretty_print(asm)
