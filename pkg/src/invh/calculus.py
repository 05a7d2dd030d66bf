"""The decision procedure for candidate invariants, and the classic
while-rule checker.

`decide` evaluates a candidate against a target property with two concurrent
verifier queries: one checks the candidate itself (no assumptions), the
other checks the target under the assumed candidate. The outcome follows
three mutually exclusive rules over the two verdicts:

  DEC-FALSE  target refuted under the assumption   -> F
  DEC-PROP   candidate proved                      -> target query's T or U
  DEC-U      candidate unproved, target unrefuted  -> U

A refutation of the target under the assumption short-circuits: the
candidate query is cancelled (recorded as cancelled-U), which is sound
because DEC-FALSE has no premise on it. When both verdicts land as (T, F),
DEC-FALSE is reported.

`check_hoare_while` checks the three premises of the while rule —
initiation, consecution, exit — by bounded enumeration over all width-W
states of the loop's variables (not just reachable ones), executing the body
once per consecution state with nondet resolved over all values.
"""

from __future__ import annotations

import itertools
import threading
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Optional

from .lang import Program, ScopeError, While, variables_of_expr
from .instrument import Property, scope_check
from .interp import (
    BudgetExceeded,
    State,
    _explore,
    compile_program,
    pack_state,
    unpack_state,
)
from .predicate import EvalFault, Predicate, Rejection, eval_predicate, validate_pure
from .verifier import Verdict, VerifierConfig, VerifierResult, verify

DEC_FALSE = "DEC-FALSE"
DEC_PROP = "DEC-PROP"
DEC_U = "DEC-U"


class ImpureCandidateError(Exception):
    """Candidate rejected by purity screening; no verifier call was made."""


@dataclass(frozen=True)
class Judgment:
    outcome: Verdict
    rule: str
    candidate_check: VerifierResult  # query with no assumptions, on the candidate
    target_check: VerifierResult     # query on the target under the candidate
    decide_wall_time: float          # wall time of the parallel composition
    total_cost: int                  # sum of both queries' backend costs


def classify(candidate_verdict: Verdict, target_verdict: Verdict):
    """Map the two query verdicts to the unique applicable (rule, outcome)."""
    if target_verdict is Verdict.F:
        return DEC_FALSE, Verdict.F
    if candidate_verdict is Verdict.T:
        return DEC_PROP, target_verdict
    return DEC_U, Verdict.U


def decide(
    p: Program,
    target: Property,
    candidate: Property,
    cfg: VerifierConfig,
    cancel=None,
) -> Judgment:
    """Run the two verifier queries in parallel and derive the judgment.

    Both queries are completed or cancelled before returning. Raises
    ImpureCandidateError for a candidate that fails purity screening, before
    any verifier work starts.
    """
    checked = validate_pure(candidate.predicate)
    if isinstance(checked, Rejection):
        raise ImpureCandidateError(checked.reason)
    scope_check(p, candidate)
    scope_check(p, target)

    cancel_a = threading.Event()
    cancel_b = threading.Event()
    if cancel is not None and cancel.is_set():
        cancel_a.set()
        cancel_b.set()
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=2) as pool:
        fut_a = pool.submit(verify, p, (), candidate, cfg, cancel_a)
        fut_b = pool.submit(verify, p, (candidate,), target, cfg, cancel_b)
        pending = {fut_a, fut_b}
        while pending:
            done, pending = wait(pending, timeout=0.05,
                                 return_when=FIRST_COMPLETED)
            if cancel is not None and cancel.is_set():
                cancel_a.set()
                cancel_b.set()
            if fut_b in done and fut_b.result().verdict is Verdict.F:
                cancel_a.set()
        result_a = fut_a.result()
        result_b = fut_b.result()
    wall = time.perf_counter() - t0
    rule, outcome = classify(result_a.verdict, result_b.verdict)
    return Judgment(outcome, rule, result_a, result_b, wall,
                    result_a.cost + result_b.cost)


# ---------------------------------------------------------------------------
# Hoare while-rule checking

@dataclass(frozen=True)
class LoopSpec:
    """A while loop with its precondition, invariant, and postcondition."""

    program: Program
    label: str
    pre: Predicate
    guard: object
    body: tuple
    inv: Predicate
    post: Predicate


def make_loop_spec(
    p: Program, label: str, pre: Predicate, inv: Predicate, post: Predicate
) -> LoopSpec:
    stmt = p.statement_at(p.resolve_label(label))
    if not isinstance(stmt, While):
        raise ScopeError(f"label '{label}' does not mark a while loop")
    declared = set(p.var_names)
    for name, pred in (("pre", pre), ("inv", inv), ("post", post)):
        extra = variables_of_expr(pred) - declared
        if extra:
            raise ScopeError(f"{name} references undeclared variable(s): "
                             + ", ".join(sorted(extra)))
    return LoopSpec(p, label, pre, stmt.cond, stmt.body, inv, post)


@dataclass(frozen=True)
class HoareReport:
    holds: bool
    failed_premise: Optional[str] = None  # initiation | consecution | exit
    witness: Optional[State] = None
    cost: int = 0

    def __str__(self) -> str:
        if self.holds:
            return "holds"
        return f"fails({self.failed_premise}) witness {self.witness}"


def _sat(pred, state, width: int) -> bool:
    # An evaluation fault counts as "not satisfied": a faulting hypothesis
    # obliges nothing, a faulting conclusion is a violation.
    try:
        return eval_predicate(pred, state, width)
    except EvalFault:
        return False


def check_hoare_while(spec: LoopSpec, cfg: VerifierConfig) -> HoareReport:
    """Enumerate all width-W states of the loop's variables and check
    initiation, consecution, and exit in that order; the first failing
    premise is reported with the first witness state in enumeration order.
    """
    width = cfg.width
    p = spec.program
    relevant = (
        variables_of_expr(spec.pre)
        | variables_of_expr(spec.inv)
        | variables_of_expr(spec.post)
        | variables_of_expr(spec.guard)
        | _block_vars(spec.body)
    )
    names = tuple(n for n in p.var_names if n in relevant)
    cost = 0
    budget = cfg.budget

    def states():
        for vals in itertools.product(range(1 << width), repeat=len(names)):
            full = dict.fromkeys(p.var_names, 0)
            full.update(zip(names, vals))
            yield State(p.var_names, tuple(full[n] for n in p.var_names))

    # initiation: pre => inv
    for s in states():
        cost += 1
        if cost > budget:
            raise BudgetExceeded(cost)
        if _sat(spec.pre, s, width) and not _sat(spec.inv, s, width):
            return HoareReport(False, "initiation", s, cost)

    # consecution: {inv && guard} body {inv}, nondet resolved over all values
    body_prog = Program(p.decls, spec.body)
    cp = compile_program(body_prog, width)
    for s in states():
        cost += 1
        if cost > budget:
            raise BudgetExceeded(cost)
        if not (_sat(spec.inv, s, width) and _sat(spec.guard, s, width)):
            continue
        reach = _explore(cp, max(budget - cost, 1),
                         init_packed=pack_state(cp, s))
        cost += reach.explored
        for packed in sorted(reach.exit_states):
            out = unpack_state(cp, packed)
            if not _sat(spec.inv, out, width):
                return HoareReport(False, "consecution", s, cost)

    # exit: inv && !guard => post
    for s in states():
        cost += 1
        if cost > budget:
            raise BudgetExceeded(cost)
        if (_sat(spec.inv, s, width) and not _sat(spec.guard, s, width)
                and not _sat(spec.post, s, width)):
            return HoareReport(False, "exit", s, cost)

    return HoareReport(True, cost=cost)


def _block_vars(block) -> set:
    out: set = set()
    for stmt in block:
        for attr in ("var",):
            if hasattr(stmt, attr):
                out.add(getattr(stmt, attr))
        if hasattr(stmt, "expr"):
            out |= variables_of_expr(stmt.expr)
        if hasattr(stmt, "cond"):
            out |= variables_of_expr(stmt.cond)
        if hasattr(stmt, "then_body"):
            out |= _block_vars(stmt.then_body)
            out |= _block_vars(stmt.else_body)
        if hasattr(stmt, "body") and not hasattr(stmt, "then_body"):
            out |= _block_vars(stmt.body)
    return out
