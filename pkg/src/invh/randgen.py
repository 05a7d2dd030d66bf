"""Seeded random generation of MiniWhile programs and properties.

Used by the test suite to fuzz the verifiers and the decision procedure
against the brute-force oracle, and to build the constructed speedup family.
Generated programs are valid by construction (unique labels, declared
variables only) and always contain at least one labeled location and at
least one nondet assignment; loop heads are always labeled so candidates
have somewhere interesting to live.
"""

from __future__ import annotations

import random
from typing import Optional

from .lang import (
    Assert,
    Assign,
    Assume,
    BinArith,
    BoolBin,
    BoolLit,
    Cmp,
    Decl,
    If,
    IntLit,
    Neg,
    NondetAssign,
    Not,
    Program,
    Skip,
    Var,
    While,
    iter_statements,
    mask_of,
    parse_program,
)
from .instrument import Property

_VAR_POOL = ("a", "b", "c")
_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _Gen:
    def __init__(self, rng: random.Random, names, width: int,
                 max_stmts: int, max_loops: int):
        self.rng = rng
        self.names = names
        self.maxv = mask_of(width)
        self.stmts_left = max_stmts
        self.loops_left = max_loops
        self.nondets = 0
        self.label_counter = 0

    def fresh_label(self, prefix: str) -> str:
        self.label_counter += 1
        return f"{prefix}{self.label_counter}"

    def var(self) -> str:
        return self.rng.choice(self.names)

    def const(self, hi: Optional[int] = None) -> int:
        return self.rng.randint(0, hi if hi is not None else self.maxv)

    def arith(self, depth: int = 1):
        r = self.rng.random()
        if depth <= 0 or r < 0.3:
            return Var(self.var()) if self.rng.random() < 0.7 else IntLit(self.const())
        if r < 0.85:
            op = self.rng.choices("+-*/%", weights=(5, 3, 2, 1, 2))[0]
            right = (IntLit(self.rng.randint(1, 7))
                     if op in "/%" and self.rng.random() < 0.8
                     else self.arith(depth - 1))
            return BinArith(op, self.arith(depth - 1), right)
        return Neg(self.arith(depth - 1))

    def cmp(self) -> Cmp:
        return Cmp(self.rng.choice(_CMP_OPS), self.arith(1), self.arith(1))

    def predicate(self, depth: int = 1):
        r = self.rng.random()
        if depth <= 0 or r < 0.55:
            return self.cmp()
        if r < 0.65:
            return Not(self.predicate(depth - 1))
        if r < 0.7:
            return BoolLit(self.rng.random() < 0.7)
        op = self.rng.choice(("&&", "||"))
        return BoolBin(op, self.predicate(depth - 1), self.predicate(depth - 1))

    def block(self, depth: int, grow: float = 0.85) -> tuple:
        out = []
        while self.stmts_left > 0:
            stmt = self.stmt(depth)
            if stmt is not None:
                out.append(stmt)
            if self.rng.random() > grow:
                break
        return tuple(out)

    def stmt(self, depth: int):
        if self.stmts_left <= 0:
            return None
        roll = self.rng.random()
        self.stmts_left -= 1
        if roll < 0.34:
            return Assign(self.var(), self.arith(2))
        if roll < 0.52:
            self.nondets += 1
            return NondetAssign(self.var())
        if roll < 0.62 and depth < 2:
            then_body = self.block(depth + 1, grow=0.6)
            else_body = self.block(depth + 1, grow=0.4) if self.rng.random() < 0.4 else ()
            return If(self.cmp(), then_body, else_body)
        if roll < 0.86 and self.loops_left > 0 and depth < 2:
            self.loops_left -= 1
            return self.loop(depth)
        if roll < 0.91:
            return Assume(self.predicate(1))
        if roll < 0.96:
            return Assert(self.predicate(1))
        return Skip()

    def loop(self, depth: int) -> While:
        label = self.fresh_label("H")
        v = self.var()
        if self.rng.random() < 0.7:
            # bounded counter loop; extra statements ride along in the body
            bound = self.rng.randint(1, self.maxv)
            step = self.rng.randint(1, 3)
            guard = Cmp("<", Var(v), IntLit(bound))
            self.stmts_left -= 1
            extra = tuple(s for s in self.block(depth + 1, grow=0.6)
                          if not _assigns_to(s, v))
            body = extra + (Assign(v, BinArith("+", Var(v), IntLit(step))),)
        else:
            guard = self.cmp()
            body = self.block(depth + 1, grow=0.6)
            if not body:
                self.stmts_left -= 1
                body = (Assign(v, BinArith("+", Var(v), IntLit(1))),)
        return While(guard, body, label=label)


def _assigns_to(stmt, name: str) -> bool:
    return isinstance(stmt, (Assign, NondetAssign)) and stmt.var == name


def gen_program(
    rng: random.Random,
    max_vars: int = 3,
    width: int = 4,
    max_stmts: int = 20,
    max_loops: int = 2,
    require_nondet: bool = True,
) -> Program:
    """One random program within the given size bounds."""
    nvars = rng.randint(1, max_vars)
    names = _VAR_POOL[:nvars]
    maxv = mask_of(width)
    decls = tuple(
        Decl(n, rng.choice([None, 0, rng.randint(0, maxv)])) for n in names
    )
    # reserve one slot for the labeled end marker and one for the nondet
    # that may be inserted to honor `require_nondet`
    g = _Gen(rng, names, width, max_stmts - 2, max_loops)
    body = list(g.block(0, grow=0.9))
    has_nondet = any(
        isinstance(s, NondetAssign)
        for s, _ in iter_statements(Program(decls, tuple(body)))
    )
    if require_nondet and not has_nondet:
        body.insert(rng.randint(0, len(body)), NondetAssign(rng.choice(names)))
    body.append(Skip(label="E"))
    return Program(decls, tuple(body))


def gen_property(rng: random.Random, p: Program, trivial_bias: float = 0.25) -> Property:
    """A random property at a random label; with `trivial_bias` probability
    the predicate is an always-true bound, giving the fuzz some provable
    candidates."""
    labels = list(p.labels)
    label = rng.choice(labels)
    names = list(p.var_names)
    maxv = mask_of(4)
    if rng.random() < trivial_bias:
        v = rng.choice(names)
        pred = rng.choice([
            BoolLit(True),
            Cmp("<=", Var(v), IntLit(maxv)),
            Cmp(">=", Var(v), IntLit(0)),
        ])
        return Property(pred, label)
    g = _Gen(rng, names, 4, 0, 0)
    return Property(g.predicate(1), label)


def gen_property_set(rng: random.Random, p: Program, max_props: int = 2) -> list:
    return [gen_property(rng, p) for _ in range(rng.randint(1, max_props))]


# ---------------------------------------------------------------------------
# Constructed speedup family: the target is interval-provable only under the
# assumed invariant. The lagged copy `u = s` needs two narrowing passes to
# recover after widening, but the analysis does exactly one, so the baseline
# falls through to explicit enumeration whose cost is inflated by the nondet
# noise variable; assuming `u <= bound` at the head restores the bound and
# both queries conclude on intervals alone.

def speedup_family_member(bound: int, step: int) -> tuple:
    """Returns (program, target property, candidate property); width 8."""
    if not (8 <= bound <= 200 and 1 <= step <= 20 and bound + step < 256):
        raise ValueError("family parameters out of range")
    src = (
        "int s = 0;\n"
        "int u = 0;\n"
        "int t = 0;\n"
        "int n;\n"
        f"@H: while (s <= {bound}) {{\n"
        "  t = u + 1;\n"
        "  u = s;\n"
        f"  s = s + {step};\n"
        "  n = nondet();\n"
        "}\n"
        f"@E: assert(t <= {bound + 1});\n"
    )
    p = parse_program(src)
    target = Property(Cmp("<=", Var("t"), IntLit(bound + 1)), "E")
    candidate = Property(Cmp("<=", Var("u"), IntLit(bound)), "H")
    return p, target, candidate


def speedup_family(count: int = 10) -> list:
    """At least `count` members with varied loop bounds and strides."""
    members = []
    bounds = [80, 90, 100, 110, 120, 130, 140, 150, 96, 116, 126, 136]
    steps = [3, 5, 7]
    for i in range(count):
        members.append(speedup_family_member(bounds[i % len(bounds)],
                                             steps[i % len(steps)]))
    return members
