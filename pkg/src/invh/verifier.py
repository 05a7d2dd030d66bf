"""The verifier contract: V(program, assumptions, property) in {T, F, U}.

Two built-in backends share the contract and are sound on conclusive
verdicts: the explicit-state engine (exact on the bounded domain; answers T,
F with a replayable counterexample, or U on budget/timeout) and the interval
prover (fast and incomplete; answers T or U, never F). `verify` runs the
configured pipeline, interval prover first so cheap conclusions short-circuit
the expensive enumeration. An adapter shells out to external tools speaking a
one-line VERDICT protocol; their answers are marked untrusted and every
anomaly maps to U.

Both a deterministic cost budget (configurations for the explicit engine,
transfer applications for the interval prover) and an optional wall-clock
timeout are enforced; whichever trips first yields U. Every entry point takes
an optional cancellation event and returns U promptly when it fires.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path as FsPath
from typing import Iterable, Optional

from .lang import DEFAULT_WIDTH, MAX_WIDTH, MIN_WIDTH, Program
from .instrument import Property, insert_assumes, make_check, export_program, scope_check
from .interp import (
    VIOLATION,
    BudgetExceeded,
    Interrupted,
    Terminal,
    Trace,
    _explore,
    compile_bool,
    compile_program,
)
from . import intervals


class Verdict(str, Enum):
    T = "T"  # proved
    F = "F"  # refuted
    U = "U"  # inconclusive

    def __str__(self) -> str:
        return self.value

    @property
    def conclusive(self) -> bool:
        return self is not Verdict.U


@dataclass(frozen=True)
class VerifierResult:
    verdict: Verdict
    wall_time: float
    cost: int
    counterexample: Optional[Trace]
    backend: str
    cancelled: bool = False
    trusted: bool = True
    reason: str = ""


@dataclass(frozen=True)
class VerifierConfig:
    width: int = DEFAULT_WIDTH
    budget: int = 1_000_000
    timeout_s: Optional[float] = None
    backends: tuple = ("intervals", "explicit")
    widening_delay: int = 3

    def __post_init__(self):
        if not (MIN_WIDTH <= self.width <= MAX_WIDTH):
            raise ValueError(f"width must be in [{MIN_WIDTH}, {MAX_WIDTH}]")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.timeout_s is not None and self.timeout_s <= 0:
            raise ValueError("timeout must be positive")
        bad = set(self.backends) - {"intervals", "explicit"}
        if bad or not self.backends:
            raise ValueError(f"unknown backends: {sorted(bad)}")

    def deadline(self) -> Optional[float]:
        if self.timeout_s is None:
            return None
        return time.monotonic() + self.timeout_s


def _result_from_interrupt(
    e: Interrupted, backend: str, t0: float
) -> VerifierResult:
    return VerifierResult(
        Verdict.U, time.perf_counter() - t0, e.explored, None, backend,
        cancelled=(e.reason == "cancelled"), reason=e.reason,
    )


def verify_explicit(
    p: Program,
    assumptions: Iterable,
    prop: Property,
    cfg: VerifierConfig,
    cancel=None,
    deadline: Optional[float] = None,
    budget: Optional[int] = None,
) -> VerifierResult:
    """Exact check by exhaustive enumeration of the assumption-restricted
    program: F with a counterexample on the first arrival violating the
    property, T when the closure completes clean, U on budget/timeout."""
    t0 = time.perf_counter()
    asm = insert_assumes(p, list(assumptions))
    chk = make_check(asm, prop)
    cp = compile_program(asm, cfg.width)
    check_pc = cp.label_pc[chk.label]
    check_fn = compile_bool(chk.predicate, cp.var_index, cfg.width)
    if deadline is None:
        deadline = cfg.deadline()
    try:
        reach = _explore(
            cp,
            budget if budget is not None else cfg.budget,
            check_pc=check_pc,
            check_fn=check_fn,
            stop_on_check=True,
            cancel=cancel,
            deadline=deadline,
        )
    except BudgetExceeded as e:
        return VerifierResult(Verdict.U, time.perf_counter() - t0, e.explored,
                              None, "explicit", reason="budget")
    except Interrupted as e:
        return _result_from_interrupt(e, "explicit", t0)
    if reach.check_violation_key is not None:
        key = reach.check_violation_key
        pc = key >> cp.pc_shift
        trace = reach.trace_to(key, Terminal(VIOLATION, pc, "check violated"))
        return VerifierResult(Verdict.F, time.perf_counter() - t0,
                              reach.explored, trace, "explicit")
    return VerifierResult(Verdict.T, time.perf_counter() - t0,
                          reach.explored, None, "explicit")


def verify_intervals(
    p: Program,
    assumptions: Iterable,
    prop: Property,
    cfg: VerifierConfig,
    cancel=None,
    deadline: Optional[float] = None,
    budget: Optional[int] = None,
) -> VerifierResult:
    """Interval-prover check: T when the abstract state at the property's
    location entails the predicate, U otherwise. Never answers F."""
    t0 = time.perf_counter()
    asm = insert_assumes(p, list(assumptions))
    scope_check(asm, prop)
    if deadline is None:
        deadline = cfg.deadline()
    try:
        analysis = intervals.analyze(asm, cfg.width, cfg.widening_delay,
                                     cancel=cancel, deadline=deadline,
                                     budget=budget if budget is not None
                                     else cfg.budget)
    except intervals.BudgetStop as e:
        return VerifierResult(Verdict.U, time.perf_counter() - t0, e.cost,
                              None, "intervals", reason="budget")
    except Interrupted as e:
        return _result_from_interrupt(e, "intervals", t0)
    if intervals.entails_at(analysis, prop.label, prop.predicate, cfg.width):
        return VerifierResult(Verdict.T, time.perf_counter() - t0,
                              analysis.cost, None, "intervals")
    return VerifierResult(Verdict.U, time.perf_counter() - t0,
                          analysis.cost, None, "intervals",
                          reason="not entailed by intervals")


def verify(
    p: Program,
    assumptions: Iterable,
    prop: Property,
    cfg: VerifierConfig,
    cancel=None,
) -> VerifierResult:
    """Run the configured backend pipeline; cost and wall time aggregate
    across backends, the verdict is the first conclusive one."""
    assumptions = list(assumptions)
    scope_check(insert_assumes(p, assumptions), prop)
    t0 = time.perf_counter()
    deadline = cfg.deadline()
    total_cost = 0
    result = None
    for backend in cfg.backends:
        if cancel is not None and cancel.is_set():
            result = VerifierResult(Verdict.U, 0.0, 0, None, backend,
                                    cancelled=True, reason="cancelled")
            break
        remaining = cfg.budget - total_cost
        if remaining < 1:
            result = VerifierResult(Verdict.U, 0.0, 0, None, backend,
                                    reason="budget")
            break
        if backend == "intervals":
            result = verify_intervals(p, assumptions, prop, cfg, cancel=cancel,
                                      deadline=deadline, budget=remaining)
        else:
            result = verify_explicit(p, assumptions, prop, cfg, cancel=cancel,
                                     deadline=deadline, budget=remaining)
        total_cost += result.cost
        if result.verdict.conclusive or result.cancelled:
            break
    return replace(result, cost=total_cost,
                   wall_time=time.perf_counter() - t0)


_VERDICT_RE = re.compile(r"VERDICT:(TRUE|FALSE|UNKNOWN)\s*$")


def verify_external(
    cmd: str,
    p: Program,
    assumptions: Iterable,
    prop: Property,
    timeout: float,
    cancel=None,
) -> VerifierResult:
    """Run an external verifier on the exported program text.

    The command template's `{program_path}` placeholder is substituted with
    the exported file; the verdict is the last stdout line matching
    `VERDICT:TRUE|FALSE|UNKNOWN`. Timeouts, nonzero exits, and unparseable
    output all map to U, and every result is flagged untrusted.
    """
    t0 = time.perf_counter()
    text = export_program(p, list(assumptions), make_check(p, prop))
    with tempfile.TemporaryDirectory(prefix="invh-") as tmp:
        path = FsPath(tmp) / "program.mw"
        path.write_text(text, encoding="utf-8")
        argv = [a.replace("{program_path}", str(path)) for a in shlex.split(cmd)]
        if "{program_path}" not in cmd:
            argv.append(str(path))
        try:
            proc = subprocess.Popen(
                argv, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as e:
            return VerifierResult(Verdict.U, time.perf_counter() - t0, 0, None,
                                  "external", trusted=False,
                                  reason=f"spawn failed: {e}")
        deadline = time.monotonic() + timeout
        while True:
            try:
                out, _ = proc.communicate(timeout=0.05)
                break
            except subprocess.TimeoutExpired:
                timed_out = time.monotonic() > deadline
                cancelled = cancel is not None and cancel.is_set()
                if timed_out or cancelled:
                    proc.kill()
                    proc.wait()
                    return VerifierResult(
                        Verdict.U, time.perf_counter() - t0, 0, None,
                        "external", cancelled=cancelled, trusted=False,
                        reason="cancelled" if cancelled else "timeout",
                    )
    wall = time.perf_counter() - t0
    if proc.returncode != 0:
        return VerifierResult(Verdict.U, wall, 0, None, "external",
                              trusted=False, reason=f"exit {proc.returncode}")
    verdict = None
    for line in out.splitlines():
        m = _VERDICT_RE.search(line.strip())
        if m:
            verdict = m.group(1)
    if verdict is None:
        return VerifierResult(Verdict.U, wall, 0, None, "external",
                              trusted=False, reason="no VERDICT line")
    mapped = {"TRUE": Verdict.T, "FALSE": Verdict.F, "UNKNOWN": Verdict.U}[verdict]
    return VerifierResult(mapped, wall, 0, None, "external", trusted=False)
