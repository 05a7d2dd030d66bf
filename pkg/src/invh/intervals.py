"""Interval abstract interpretation over MiniWhile.

A fast, sound, incomplete prover: it computes per-variable value intervals
at every labeled location and can certify that a predicate holds on every
arrival, but it can never refute (its only answers are "entailed" or
"unknown"). Soundness under wraparound arithmetic comes from a simple rule:
an operation's exact integer range is kept only when it maps into a single
2**W block, otherwise the result is the full domain.

Loops are solved by ascending iteration with widening after a configurable
delay and a single narrowing pass. Conditions from branch guards, assume and
assert statements refine intervals where they are expressible as constant or
single-variable bounds. A condition that is assumed both immediately before
a loop and at the end of its body holds on every arrival at the loop head,
so it is re-applied to the head invariant after each join/widen step; this
is how an assumed candidate invariant restores precision that widening
discards, and it is the mechanism that lets this prover conclude quickly
where an unassisted run must fall back to explicit enumeration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .lang import (
    DEFAULT_WIDTH,
    Assert,
    Assign,
    Assume,
    BoolBin,
    BoolLit,
    Cmp,
    If,
    IntLit,
    Neg,
    NondetAssign,
    Not,
    Program,
    Skip,
    Var,
    While,
    check_width,
    mask_of,
)
from .interp import Interrupted

# Abstract state: dict var -> (lo, hi) with 0 <= lo <= hi <= maxv,
# or None for the unreachable (bottom) state.
BOTTOM = None


class BudgetStop(Exception):
    """Analysis exceeded its transfer budget."""

    def __init__(self, cost: int):
        super().__init__(f"interval analysis budget exceeded after {cost}")
        self.cost = cost

# fault levels from abstract arithmetic
_F_NONE, _F_MAY, _F_SURE = 0, 1, 2

_NEG_CMP = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _join(a, b):
    if a is BOTTOM:
        return None if b is BOTTOM else dict(b)
    if b is BOTTOM:
        return dict(a)
    return {v: (min(a[v][0], b[v][0]), max(a[v][1], b[v][1])) for v in a}


def _leq(a, b) -> bool:
    if a is BOTTOM:
        return True
    if b is BOTTOM:
        return False
    return all(b[v][0] <= a[v][0] and a[v][1] <= b[v][1] for v in a)


def _meet(a, b):
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM
    out = {}
    for v in a:
        lo = max(a[v][0], b[v][0])
        hi = min(a[v][1], b[v][1])
        if lo > hi:
            return BOTTOM
        out[v] = (lo, hi)
    return out


@dataclass
class IntervalAnalysis:
    """Result of one analysis run: abstract states observed at each label
    (BOTTOM for unreachable labels) and the deterministic transfer count."""

    label_states: dict
    cost: int


class _Analyzer:
    def __init__(self, p: Program, width: int, widening_delay: int,
                 cancel=None, deadline: Optional[float] = None,
                 budget: Optional[int] = None):
        check_width(width)
        self.width = width
        self.maxv = mask_of(width)
        self.delay = widening_delay
        self.cancel = cancel
        self.deadline = deadline
        self.budget = budget
        self.cost = 0
        self.program = p
        self.label_states = {name: BOTTOM for name in p.labels}

    # -- bookkeeping --------------------------------------------------------

    def _tick(self) -> None:
        self.cost += 1
        if self.budget is not None and self.cost > self.budget:
            raise BudgetStop(self.cost - 1)
        if (self.cost & 255) == 0:
            if self.cancel is not None and self.cancel.is_set():
                raise Interrupted(self.cost, "cancelled")
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise Interrupted(self.cost, "timeout")

    # -- abstract arithmetic -------------------------------------------------

    def _wrap(self, lo: int, hi: int):
        if hi - lo > self.maxv:
            return (0, self.maxv)
        w = self.width
        if lo >> w == hi >> w:
            m = self.maxv
            return (lo & m, hi & m)
        return (0, self.maxv)

    def aeval(self, e, st):
        """Abstract value of an arithmetic expression: (lo, hi, fault)."""
        if isinstance(e, IntLit):
            v = e.value & self.maxv
            return (v, v, _F_NONE)
        if isinstance(e, Var):
            lo, hi = st[e.name]
            return (lo, hi, _F_NONE)
        if isinstance(e, Neg):
            lo, hi, f = self.aeval(e.operand, st)
            rlo, rhi = self._wrap(-hi, -lo)
            return (rlo, rhi, f)
        l1, h1, f1 = self.aeval(e.left, st)
        l2, h2, f2 = self.aeval(e.right, st)
        f = max(f1, f2)
        op = e.op
        if op == "+":
            lo, hi = self._wrap(l1 + l2, h1 + h2)
        elif op == "-":
            lo, hi = self._wrap(l1 - h2, h1 - l2)
        elif op == "*":
            corners = (l1 * l2, l1 * h2, h1 * l2, h1 * h2)
            lo, hi = self._wrap(min(corners), max(corners))
        else:  # / or %
            if h2 == 0:
                return (0, self.maxv, _F_SURE)
            dlo = max(l2, 1)
            if l2 == 0:
                f = max(f, _F_MAY)
            if op == "/":
                lo, hi = l1 // h2, h1 // dlo
            else:
                lo, hi = (l1, h1) if h1 < dlo else (0, h2 - 1)
        return (lo, hi, f)

    def beval(self, e, st) -> str:
        """Four-valued truth tracking evaluation order: 'T' definitely true,
        'F' definitely false (both fault-free), '?' unknown but fault-free,
        '!' possibly faulting. Short-circuit matters: a faulting left operand
        poisons the whole condition even when the right side would decide it.
        """
        if isinstance(e, BoolLit):
            return "T" if e.value else "F"
        if isinstance(e, Not):
            r = self.beval(e.operand, st)
            return {"T": "F", "F": "T", "?": "?", "!": "!"}[r]
        if isinstance(e, BoolBin):
            a = self.beval(e.left, st)
            if a == "!":
                return "!"
            b = self.beval(e.right, st)
            if e.op == "&&":
                if a == "F":
                    return "F"
                if a == "T":
                    return b
                return "F" if b == "F" else ("!" if b == "!" else "?")
            if a == "T":
                return "T"
            if a == "F":
                return b
            return "T" if b == "T" else ("!" if b == "!" else "?")
        l1, h1, f1 = self.aeval(e.left, st)
        l2, h2, f2 = self.aeval(e.right, st)
        if f1 != _F_NONE or f2 != _F_NONE:
            return "!"
        op = e.op
        if op == "==":
            if l1 == h1 == l2 == h2:
                return "T"
            if h1 < l2 or h2 < l1:
                return "F"
            return "?"
        if op == "!=":
            if h1 < l2 or h2 < l1:
                return "T"
            if l1 == h1 == l2 == h2:
                return "F"
            return "?"
        if op == "<":
            return "T" if h1 < l2 else ("F" if l1 >= h2 else "?")
        if op == "<=":
            return "T" if h1 <= l2 else ("F" if l1 > h2 else "?")
        if op == ">":
            return "T" if l1 > h2 else ("F" if h1 <= l2 else "?")
        return "T" if l1 >= h2 else ("F" if h1 < l2 else "?")

    # -- refinement -----------------------------------------------------------

    def refine(self, st, cond, value: bool):
        """Shrink `st` to the states where `cond` evaluates to `value`,
        where expressible as constant or single-variable bounds; identity
        otherwise. Sound: never removes a state satisfying the condition."""
        if st is BOTTOM:
            return BOTTOM
        if isinstance(cond, BoolLit):
            return st if cond.value == value else BOTTOM
        if isinstance(cond, Not):
            return self.refine(st, cond.operand, not value)
        if isinstance(cond, BoolBin):
            both = (cond.op == "&&") == value
            if both:
                return self.refine(self.refine(st, cond.left, value),
                                   cond.right, value)
            return _join(self.refine(st, cond.left, value),
                         self.refine(st, cond.right, value))
        if isinstance(cond, Cmp):
            op = cond.op if value else _NEG_CMP[cond.op]
            return self._refine_cmp(st, op, cond.left, cond.right)
        return st

    def _refine_cmp(self, st, op, left, right):
        maxv = self.maxv

        def simple(e):
            if isinstance(e, Var):
                return e.name
            if isinstance(e, IntLit):
                return e.value & maxv
            return None

        a, b = simple(left), simple(right)
        if a is None or b is None:
            return st
        if isinstance(a, int) and isinstance(b, int):
            concrete = {"==": a == b, "!=": a != b, "<": a < b,
                        "<=": a <= b, ">": a > b, ">=": a >= b}[op]
            return st if concrete else BOTTOM
        # normalize to: var op other
        if isinstance(a, int):
            flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<=",
                    "==": "==", "!=": "!="}
            a, b, op = b, a, flip[op]
        lo, hi = st[a]
        if isinstance(b, int):
            blo = bhi = b
        else:
            blo, bhi = st[b]
        out = dict(st)
        if op == "==":
            nlo, nhi = max(lo, blo), min(hi, bhi)
            if nlo > nhi:
                return BOTTOM
            out[a] = (nlo, nhi)
            if not isinstance(b, int):
                out[b] = (nlo, nhi)
            return out
        if op == "!=":
            if isinstance(b, int):
                if lo == hi == b:
                    return BOTTOM
                if b == lo:
                    out[a] = (lo + 1, hi)
                elif b == hi:
                    out[a] = (lo, hi - 1)
            elif blo == bhi:
                return self._refine_cmp(st, "!=", Var(a), IntLit(blo))
            return out
        if op == "<":
            nhi = min(hi, bhi - 1)
            if lo > nhi:
                return BOTTOM
            out[a] = (lo, nhi)
            if not isinstance(b, int):
                nblo = max(blo, lo + 1)
                if nblo > bhi:
                    return BOTTOM
                out[b] = (nblo, bhi)
            return out
        if op == "<=":
            nhi = min(hi, bhi)
            if lo > nhi:
                return BOTTOM
            out[a] = (lo, nhi)
            if not isinstance(b, int):
                nblo = max(blo, lo)
                if nblo > bhi:
                    return BOTTOM
                out[b] = (nblo, bhi)
            return out
        if op == ">":
            nlo = max(lo, blo + 1)
            if nlo > hi:
                return BOTTOM
            out[a] = (nlo, hi)
            if not isinstance(b, int):
                nbhi = min(bhi, hi - 1)
                if blo > nbhi:
                    return BOTTOM
                out[b] = (blo, nbhi)
            return out
        # >=
        nlo = max(lo, blo)
        if nlo > hi:
            return BOTTOM
        out[a] = (nlo, hi)
        if not isinstance(b, int):
            nbhi = min(bhi, hi)
            if blo > nbhi:
                return BOTTOM
            out[b] = (blo, nbhi)
        return out

    def entails(self, st, pred) -> bool:
        """Does every state in `st` satisfy `pred` without faulting?
        Vacuously true for the unreachable state."""
        if st is BOTTOM:
            return True
        return self.beval(pred, st) == "T"

    # -- transfer -------------------------------------------------------------

    def _clamp(self, st, facts):
        for cond in facts:
            st = self.refine(st, cond, True)
        return st

    def block(self, stmts, st, record: bool):
        for i, stmt in enumerate(stmts):
            if isinstance(stmt, While):
                st = self.ai_while(stmt, st, record,
                                   self._head_facts(stmts, i, stmt))
            else:
                st = self.stmt(stmt, st, record)
        return st

    @staticmethod
    def _head_facts(stmts, i: int, loop: While) -> tuple:
        """Conditions assumed both immediately before the loop and at the
        end of its body: they hold on every arrival at the loop head."""
        tail = set()
        for s in reversed(loop.body):
            if isinstance(s, Assume):
                tail.add(s.cond)
            else:
                break
        if not tail:
            return ()
        facts = []
        for j in range(i - 1, -1, -1):
            s = stmts[j]
            if isinstance(s, Assume) and s.cond in tail:
                facts.append(s.cond)
            else:
                break
        return tuple(facts)

    def stmt(self, s, st, record: bool):
        self._tick()
        if record and s.label is not None:
            self.label_states[s.label] = None if st is BOTTOM else dict(st)
        if st is BOTTOM:
            # still walk nested blocks so inner labels are recorded
            if record and isinstance(s, If):
                self.block(s.then_body, BOTTOM, record)
                self.block(s.else_body, BOTTOM, record)
            return BOTTOM
        if isinstance(s, Assign):
            lo, hi, f = self.aeval(s.expr, st)
            if f == _F_SURE:
                return BOTTOM  # every execution faults here; no continuation
            out = dict(st)
            out[s.var] = (lo, hi)
            return out
        if isinstance(s, NondetAssign):
            out = dict(st)
            out[s.var] = (0, self.maxv)
            return out
        if isinstance(s, (Assume, Assert)):
            # survivors of either satisfy the condition
            return self.refine(st, s.cond, True)
        if isinstance(s, Skip):
            return st
        if isinstance(s, If):
            t = self.block(s.then_body, self.refine(st, s.cond, True), record)
            e = self.block(s.else_body, self.refine(st, s.cond, False), record)
            return _join(t, e)
        raise TypeError(f"not a statement node: {s!r}")

    def ai_while(self, s: While, st, record: bool, head_facts: tuple):
        self._tick()
        inv = self._clamp(st, head_facts)
        i = 0
        while True:
            entry = self.refine(inv, s.cond, True)
            out = self.block(s.body, entry, False)
            nxt = self._clamp(_join(inv, out), head_facts)
            if _leq(nxt, inv):
                break
            if i >= self.delay:
                inv = self._clamp(self._widen(inv, nxt), head_facts)
            else:
                inv = nxt
            i += 1
        # single narrowing pass: meet the stabilized invariant with one more
        # non-widened round trip; sound since both sides over-approximate
        entry = self.refine(inv, s.cond, True)
        out = self.block(s.body, entry, False)
        better = self._clamp(_join(st, out), head_facts)
        inv = _meet(inv, better)
        if record:
            if s.label is not None:
                self.label_states[s.label] = None if inv is BOTTOM else dict(inv)
            self.block(s.body, self.refine(inv, s.cond, True), True)
        return self.refine(inv, s.cond, False)

    def _widen(self, old, new):
        if old is BOTTOM:
            return new
        if new is BOTTOM:
            return old
        out = {}
        for v in old:
            olo, ohi = old[v]
            nlo, nhi = new[v]
            out[v] = (0 if nlo < olo else olo, self.maxv if nhi > ohi else ohi)
        return out

    def run(self) -> IntervalAnalysis:
        init = {}
        for d in self.program.decls:
            v = (d.init or 0) & self.maxv
            init[d.name] = (v, v)
        self.block(self.program.body, init, True)
        return IntervalAnalysis(self.label_states, self.cost)


def analyze(
    p: Program,
    width: int = DEFAULT_WIDTH,
    widening_delay: int = 3,
    cancel=None,
    deadline: Optional[float] = None,
    budget: Optional[int] = None,
) -> IntervalAnalysis:
    """Run the interval analysis and return per-label abstract states.
    Raises BudgetStop when the transfer count exceeds `budget`."""
    return _Analyzer(p, width, widening_delay, cancel, deadline, budget).run()


def state_entails(st, pred, width: int = DEFAULT_WIDTH) -> bool:
    """Does the abstract state entail `pred` (fault-free) on every arrival?"""
    return _Analyzer(Program((), ()), width, 3).entails(st, pred)


def entails_at(
    analysis: IntervalAnalysis, label: str, pred, width: int = DEFAULT_WIDTH
) -> bool:
    """Does the abstract state recorded at `label` entail `pred`?"""
    return state_entails(analysis.label_states.get(label, BOTTOM), pred, width)
