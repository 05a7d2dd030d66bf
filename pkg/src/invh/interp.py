"""Concrete semantics of MiniWhile: small-step execution, the brute-force
breadth-first reachability oracle, and counterexample traces.

Programs are compiled once to a flat instruction list (branch targets instead
of nested blocks); a configuration is (pc, state). For speed the engine packs
a whole state into one integer (variable i occupies bits [i*W, (i+1)*W)) and
keys the visited set on `state | pc << (nvars*W)`. Public entry points accept
and return unpacked State/Configuration values.

Exploration is exhaustive BFS with a visited set, so it terminates on the
bounded state space regardless of program loops; `budget` counts distinct
configurations inserted into the frontier, a deterministic cost measure.
"""

from __future__ import annotations

import functools
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .lang import (
    DEFAULT_WIDTH,
    Assert,
    Assign,
    Assume,
    BinArith,
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
    print_expr,
)
from .predicate import EvalFault, eval_predicate

# terminal kinds
EXIT = "exit"
ASSUME_STOP = "assume_stop"
VIOLATION = "violation"


class BudgetExceeded(Exception):
    """Raised when exploration would insert more configurations than allowed."""

    def __init__(self, explored: int):
        super().__init__(f"configuration budget exceeded after {explored}")
        self.explored = explored


class Interrupted(Exception):
    """Exploration stopped by cancellation or a wall-clock deadline."""

    def __init__(self, explored: int, reason: str):
        super().__init__(reason)
        self.explored = explored
        self.reason = reason


@dataclass(frozen=True)
class State:
    """Total assignment of width-W values to the program's variables."""

    names: tuple
    values: tuple

    def __getitem__(self, name: str) -> int:
        return self.values[self.names.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={v}" for n, v in zip(self.names, self.values))
        return "{" + inner + "}"


@dataclass(frozen=True)
class Configuration:
    pc: int
    state: State


@dataclass(frozen=True)
class Terminal:
    kind: str  # EXIT | ASSUME_STOP | VIOLATION
    pc: Optional[int] = None
    detail: str = ""


@dataclass(frozen=True)
class Trace:
    configs: tuple
    terminal: Terminal
    complete: bool = True  # False when truncated at a step limit


# ---------------------------------------------------------------------------
# Compilation to a flat instruction list

A_ASSIGN, A_NONDET, A_BRANCH, A_ASSUME, A_ASSERT, A_JUMP, A_NOP, A_HALT = range(8)


@dataclass
class CompiledProgram:
    program: Program
    width: int
    code: list
    label_pc: dict  # label name -> pc
    pc_label: dict  # pc -> label name
    src: list       # pc -> human-readable description
    var_index: dict
    init_state: int
    nvars: int

    @property
    def pc_shift(self) -> int:
        return self.nvars * self.width


def _compile_arith(e, idx: dict, width: int) -> Callable:
    mask = mask_of(width)
    if isinstance(e, IntLit):
        v = e.value & mask
        return lambda s: v
    if isinstance(e, Var):
        sh = idx[e.name] * width
        return lambda s: (s >> sh) & mask
    if isinstance(e, Neg):
        f = _compile_arith(e.operand, idx, width)
        return lambda s: (-f(s)) & mask
    if isinstance(e, BinArith):
        f = _compile_arith(e.left, idx, width)
        g = _compile_arith(e.right, idx, width)
        op = e.op
        if op == "+":
            return lambda s: (f(s) + g(s)) & mask
        if op == "-":
            return lambda s: (f(s) - g(s)) & mask
        if op == "*":
            return lambda s: (f(s) * g(s)) & mask
        if op == "/":
            return lambda s: f(s) // g(s)  # ZeroDivisionError = runtime fault
        return lambda s: f(s) % g(s)
    raise TypeError(f"not an arithmetic node: {e!r}")


def compile_bool(e, idx: dict, width: int) -> Callable:
    """Compile a boolean expression to a closure over a packed state."""
    if isinstance(e, BoolLit):
        v = e.value
        return lambda s: v
    if isinstance(e, Not):
        f = compile_bool(e.operand, idx, width)
        return lambda s: not f(s)
    if isinstance(e, BoolBin):
        f = compile_bool(e.left, idx, width)
        g = compile_bool(e.right, idx, width)
        if e.op == "&&":
            return lambda s: f(s) and g(s)
        return lambda s: f(s) or g(s)
    if isinstance(e, Cmp):
        f = _compile_arith(e.left, idx, width)
        g = _compile_arith(e.right, idx, width)
        op = e.op
        if op == "==":
            return lambda s: f(s) == g(s)
        if op == "!=":
            return lambda s: f(s) != g(s)
        if op == "<":
            return lambda s: f(s) < g(s)
        if op == "<=":
            return lambda s: f(s) <= g(s)
        if op == ">":
            return lambda s: f(s) > g(s)
        return lambda s: f(s) >= g(s)
    raise TypeError(f"not a boolean node: {e!r}")


@functools.lru_cache(maxsize=512)
def compile_program(p: Program, width: int = DEFAULT_WIDTH) -> CompiledProgram:
    check_width(width)
    idx = {name: i for i, name in enumerate(p.var_names)}
    mask = mask_of(width)
    code: list = []
    src: list = []
    label_pc: dict = {}

    def emit(instr, desc: str, label=None) -> int:
        pc = len(code)
        code.append(instr)
        src.append(desc)
        if label is not None:
            label_pc[label] = pc
        return pc

    def compile_block(block) -> None:
        for stmt in block:
            if isinstance(stmt, Assign):
                fn = _compile_arith(stmt.expr, idx, width)
                sh = idx[stmt.var] * width
                clear = ~(mask << sh)
                emit((A_ASSIGN, fn, sh, clear),
                     f"{stmt.var} = {print_expr(stmt.expr)}", stmt.label)
            elif isinstance(stmt, NondetAssign):
                sh = idx[stmt.var] * width
                clear = ~(mask << sh)
                emit((A_NONDET, sh, clear), f"{stmt.var} = nondet()", stmt.label)
            elif isinstance(stmt, Assume):
                fn = compile_bool(stmt.cond, idx, width)
                emit((A_ASSUME, fn), f"assume({print_expr(stmt.cond)})", stmt.label)
            elif isinstance(stmt, Assert):
                fn = compile_bool(stmt.cond, idx, width)
                emit((A_ASSERT, fn), f"assert({print_expr(stmt.cond)})", stmt.label)
            elif isinstance(stmt, Skip):
                emit((A_NOP,), "skip", stmt.label)
            elif isinstance(stmt, If):
                fn = compile_bool(stmt.cond, idx, width)
                bpc = emit((A_BRANCH, fn, -1, -1),
                           f"if ({print_expr(stmt.cond)})", stmt.label)
                compile_block(stmt.then_body)
                if stmt.else_body:
                    jpc = emit((A_JUMP, -1), "jump")
                    else_start = len(code)
                    compile_block(stmt.else_body)
                    code[bpc] = (A_BRANCH, fn, bpc + 1, else_start)
                    code[jpc] = (A_JUMP, len(code))
                else:
                    code[bpc] = (A_BRANCH, fn, bpc + 1, len(code))
            elif isinstance(stmt, While):
                fn = compile_bool(stmt.cond, idx, width)
                head = emit((A_BRANCH, fn, -1, -1),
                            f"while ({print_expr(stmt.cond)})", stmt.label)
                compile_block(stmt.body)
                emit((A_JUMP, head), "loop back-edge")
                code[head] = (A_BRANCH, fn, head + 1, len(code))
            else:
                raise TypeError(f"not a statement node: {stmt!r}")

    compile_block(p.body)
    emit((A_HALT,), "end of program")

    init = 0
    for i, d in enumerate(p.decls):
        init |= ((d.init or 0) & mask) << (i * width)

    return CompiledProgram(
        program=p, width=width, code=code, label_pc=label_pc,
        pc_label={pc: name for name, pc in label_pc.items()},
        src=src, var_index=idx, init_state=init, nvars=len(p.decls),
    )


def unpack_state(cp: CompiledProgram, packed: int) -> State:
    w, m = cp.width, mask_of(cp.width)
    vals = tuple((packed >> (i * w)) & m for i in range(cp.nvars))
    return State(cp.program.var_names, vals)


def pack_state(cp: CompiledProgram, values) -> int:
    if isinstance(values, State):
        values = values.as_dict()
    if isinstance(values, dict):
        values = [values[n] for n in cp.program.var_names]
    m = mask_of(cp.width)
    out = 0
    for i, v in enumerate(values):
        out |= (v & m) << (i * cp.width)
    return out


# ---------------------------------------------------------------------------
# BFS exploration

@dataclass
class ReachResult:
    """Everything the breadth-first closure observed.

    `label_states` maps each label to the packed states seen on arrival at
    that label; use `states_at` for unpacked values. Violations are
    in-program assertion failures (including runtime faults) plus, when a
    check was supplied, the first check violation found.
    """

    compiled: CompiledProgram
    completed: bool
    explored: int
    label_states: dict            # label -> set of packed states
    violation_keys: list          # (packed config key, pc, detail)
    check_violation_key: Optional[int]
    exit_states: set = field(default_factory=set)  # packed states at normal exit
    _parents: dict = field(repr=False, default_factory=dict)

    def states_at(self, label: str) -> frozenset:
        return frozenset(unpack_state(self.compiled, s)
                         for s in self.label_states.get(label, ()))

    def trace_to(self, key: int, terminal: Terminal) -> Trace:
        cp = self.compiled
        shift = cp.pc_shift
        smask = (1 << shift) - 1
        keys = []
        k = key
        while k != -1:
            keys.append(k)
            k = self._parents[k]
        keys.reverse()
        configs = tuple(
            Configuration(k >> shift, unpack_state(cp, k & smask)) for k in keys
        )
        return Trace(configs, terminal)

    def violation_traces(self) -> list:
        out = []
        for key, pc, detail in self.violation_keys:
            out.append(self.trace_to(key, Terminal(VIOLATION, pc, detail)))
        if self.check_violation_key is not None:
            key = self.check_violation_key
            pc = key >> self.compiled.pc_shift
            out.append(self.trace_to(key, Terminal(VIOLATION, pc, "check violated")))
        return out


def _explore(
    cp: CompiledProgram,
    budget: int,
    check_pc: int = -1,
    check_fn: Optional[Callable] = None,
    stop_on_check: bool = False,
    cancel=None,
    deadline: Optional[float] = None,
    init_packed: Optional[int] = None,
) -> ReachResult:
    if budget < 1:
        raise BudgetExceeded(0)
    code = cp.code
    pc_label = cp.pc_label
    shift = cp.pc_shift
    width = cp.width
    nvals = 1 << width

    init_key = cp.init_state if init_packed is None else init_packed  # pc 0
    visited = {init_key}
    parents = {init_key: -1}
    frontier = deque((init_key,))
    inserted = 1
    label_states: dict = {name: set() for name in cp.label_pc}
    violations: list = []
    exit_states: set = set()
    check_violation = None
    smask = (1 << shift) - 1

    pops = 0
    while frontier:
        key = frontier.popleft()
        pops += 1
        if (pops & 1023) == 0:
            if cancel is not None and cancel.is_set():
                raise Interrupted(inserted, "cancelled")
            if deadline is not None and time.monotonic() > deadline:
                raise Interrupted(inserted, "timeout")
        st = key & smask
        pc = key >> shift

        lbl = pc_label.get(pc)
        if lbl is not None:
            label_states[lbl].add(st)
        if pc == check_pc:
            try:
                ok = check_fn(st)
            except ZeroDivisionError:
                ok = False
            if not ok:
                if check_violation is None:
                    check_violation = key
                if stop_on_check:
                    return ReachResult(cp, False, inserted, label_states,
                                       violations, check_violation,
                                       exit_states, parents)

        ins = code[pc]
        kind = ins[0]
        if kind == A_ASSIGN:
            try:
                v = ins[1](st)
            except ZeroDivisionError:
                violations.append((key, pc, cp.src[pc] + ": division by zero"))
                continue
            nkey = (st & ins[3] | v << ins[2]) | (pc + 1) << shift
        elif kind == A_BRANCH:
            try:
                c = ins[1](st)
            except ZeroDivisionError:
                violations.append((key, pc, cp.src[pc] + ": division by zero"))
                continue
            nkey = st | (ins[2] if c else ins[3]) << shift
        elif kind == A_ASSUME:
            try:
                c = ins[1](st)
            except ZeroDivisionError:
                violations.append((key, pc, cp.src[pc] + ": division by zero"))
                continue
            if not c:
                continue  # assumption violated: execution stops silently
            nkey = st | (pc + 1) << shift
        elif kind == A_ASSERT:
            try:
                c = ins[1](st)
            except ZeroDivisionError:
                violations.append((key, pc, cp.src[pc] + ": division by zero"))
                continue
            if not c:
                violations.append((key, pc, cp.src[pc] + " failed"))
                continue
            nkey = st | (pc + 1) << shift
        elif kind == A_NONDET:
            sh, clear = ins[1], ins[2]
            base = (st & clear) | (pc + 1) << shift
            for v in range(nvals):
                nkey = base | v << sh
                if nkey not in visited:
                    if inserted >= budget:
                        raise BudgetExceeded(inserted)
                    visited.add(nkey)
                    parents[nkey] = key
                    frontier.append(nkey)
                    inserted += 1
            continue
        elif kind == A_JUMP:
            nkey = st | ins[1] << shift
        elif kind == A_NOP:
            nkey = st | (pc + 1) << shift
        else:  # A_HALT: normal exit
            exit_states.add(st)
            continue

        if nkey not in visited:
            if inserted >= budget:
                raise BudgetExceeded(inserted)
            visited.add(nkey)
            parents[nkey] = key
            frontier.append(nkey)
            inserted += 1

    return ReachResult(cp, True, inserted, label_states, violations,
                       check_violation, exit_states, parents)


def enumerate_reachable(
    p: Program,
    budget: int,
    width: int = DEFAULT_WIDTH,
    cancel=None,
    deadline: Optional[float] = None,
) -> ReachResult:
    """Exhaustive BFS closure from the initial state.

    Returns the exact per-label arrival state sets and all in-program
    assertion-violation traces. Raises BudgetExceeded when the closure does
    not fit in `budget` frontier insertions.
    """
    cp = compile_program(p, width)
    return _explore(cp, budget, cancel=cancel, deadline=deadline)


# ---------------------------------------------------------------------------
# Single-configuration stepping and concrete runs

def initial_configuration(p: Program, width: int = DEFAULT_WIDTH) -> Configuration:
    cp = compile_program(p, width)
    return Configuration(0, unpack_state(cp, cp.init_state))


def step(p: Program, c: Configuration, width: int = DEFAULT_WIDTH):
    """One small step from configuration `c`.

    Returns either a set of successor Configurations (singleton except for
    nondet assignment, which fans out over all 2**width values) or a Terminal
    tag: normal exit, assumption-violated stop, or assertion violation at the
    current position. Expression faults (division by zero) terminate as an
    assertion violation at that position.
    """
    cp = compile_program(p, width)
    st = pack_state(cp, c.state)
    pc = c.pc
    ins = cp.code[pc]
    kind = ins[0]

    def conf(npc: int, nst: int) -> Configuration:
        return Configuration(npc, unpack_state(cp, nst))

    try:
        if kind == A_ASSIGN:
            v = ins[1](st)
            return {conf(pc + 1, st & ins[3] | v << ins[2])}
        if kind == A_BRANCH:
            return {conf(ins[2] if ins[1](st) else ins[3], st)}
        if kind == A_ASSUME:
            if not ins[1](st):
                return Terminal(ASSUME_STOP, pc, cp.src[pc])
            return {conf(pc + 1, st)}
        if kind == A_ASSERT:
            if not ins[1](st):
                return Terminal(VIOLATION, pc, cp.src[pc] + " failed")
            return {conf(pc + 1, st)}
        if kind == A_NONDET:
            sh, clear = ins[1], ins[2]
            return {conf(pc + 1, (st & clear) | v << sh)
                    for v in range(1 << cp.width)}
        if kind == A_JUMP:
            return {conf(ins[1], st)}
        if kind == A_NOP:
            return {conf(pc + 1, st)}
        return Terminal(EXIT, pc)
    except ZeroDivisionError:
        return Terminal(VIOLATION, pc, cp.src[pc] + ": division by zero")


def run_concrete(
    p: Program,
    resolver: Callable,
    step_limit: int = 100_000,
    width: int = DEFAULT_WIDTH,
) -> Trace:
    """Run the unique execution induced by `resolver`, which supplies one
    value per nondet occurrence (called with the variable name). The trace is
    truncated (and flagged incomplete) at `step_limit`.
    """
    cp = compile_program(p, width)
    mask = mask_of(cp.width)
    st = cp.init_state
    pc = 0
    configs = [Configuration(0, unpack_state(cp, st))]
    for _ in range(step_limit):
        ins = cp.code[pc]
        kind = ins[0]
        try:
            if kind == A_ASSIGN:
                st = st & ins[3] | ins[1](st) << ins[2]
                pc += 1
            elif kind == A_BRANCH:
                pc = ins[2] if ins[1](st) else ins[3]
            elif kind == A_ASSUME:
                if not ins[1](st):
                    return Trace(tuple(configs), Terminal(ASSUME_STOP, pc, cp.src[pc]))
                pc += 1
            elif kind == A_ASSERT:
                if not ins[1](st):
                    return Trace(tuple(configs),
                                 Terminal(VIOLATION, pc, cp.src[pc] + " failed"))
                pc += 1
            elif kind == A_NONDET:
                var = cp.program.var_names[ins[1] // cp.width]
                st = (st & ins[2]) | (resolver(var) & mask) << ins[1]
                pc += 1
            elif kind == A_JUMP:
                pc = ins[1]
            elif kind == A_NOP:
                pc += 1
            else:
                return Trace(tuple(configs), Terminal(EXIT, pc))
        except ZeroDivisionError:
            return Trace(tuple(configs),
                         Terminal(VIOLATION, pc, cp.src[pc] + ": division by zero"))
        configs.append(Configuration(pc, unpack_state(cp, st)))
    return Trace(tuple(configs), Terminal(EXIT, pc), complete=False)


def trace_nondet_choices(p: Program, trace: Trace, width: int = DEFAULT_WIDTH) -> list:
    """Recover the nondet values a trace took, for replay."""
    cp = compile_program(p, width)
    choices = []
    for cur, nxt in zip(trace.configs, trace.configs[1:]):
        ins = cp.code[cur.pc]
        if ins[0] == A_NONDET:
            var = cp.program.var_names[ins[1] // cp.width]
            choices.append(nxt.state[var])
    return choices


def replay_trace(p: Program, trace: Trace, width: int = DEFAULT_WIDTH) -> Trace:
    """Re-run a trace's execution via run_concrete with its recovered nondet
    choices; the replay passes through the same configurations. Steps beyond
    the recorded trace (where no choices exist) resolve nondet to 0.
    """
    choices = iter(trace_nondet_choices(p, trace, width))

    def resolver(_name: str) -> int:
        return next(choices, 0)

    return run_concrete(p, resolver, step_limit=len(trace.configs) + 16, width=width)


def property_violation(
    reach: ReachResult, label: str, pred, width: Optional[int] = None
) -> Optional[Trace]:
    """Oracle-side check of a property against a completed closure.

    Scans the recorded arrival states at `label` with the plain recursive
    predicate evaluator (independent of the compiled closures the verifier
    uses); returns a violating trace, or None when every arrival satisfies
    the predicate. Evaluation faults count as violations.
    """
    w = width if width is not None else reach.compiled.width
    cp = reach.compiled
    pc = cp.label_pc.get(label)
    if pc is None:
        return None
    shift = cp.pc_shift
    for packed in sorted(reach.label_states.get(label, ())):
        st = unpack_state(cp, packed)
        try:
            ok = eval_predicate(pred, st, w)
        except EvalFault:
            ok = False
        if not ok:
            key = packed | pc << shift
            return reach.trace_to(key, Terminal(VIOLATION, pc, "property violated"))
    return None
