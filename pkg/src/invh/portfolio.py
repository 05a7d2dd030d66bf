"""Best-of-N candidate racing.

Candidates are deduplicated structurally, then decided concurrently; the
first conclusive judgment wins and every other run is cancelled. Wall-clock
completion order is inherently nondeterministic, so the race also has a
deterministic mode (the default) that runs every candidate to completion and
simulates completion order by total backend cost, with ties broken by the
lower candidate index. The `INVH_SEED` environment variable (or an explicit
seed) randomizes submission order in deterministic mode, which is what the
scheduling-independence tests shake.
"""

from __future__ import annotations

import os
import random
import threading
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Optional, Sequence

from .lang import Program
from .calculus import ImpureCandidateError, Judgment, decide
from .instrument import Property
from .verifier import VerifierConfig, VerifierResult, verify


@dataclass(frozen=True)
class Candidate:
    prop: Property
    gen_time: float = 0.0
    source: str = ""


@dataclass(frozen=True)
class RaceResult:
    # (index into the candidate list, Judgment); None when nothing conclusive
    winner: Optional[tuple]
    # per-candidate Judgment; None for candidates cancelled before starting
    judgments: tuple
    race_wall_time: float

    @property
    def winner_index(self) -> Optional[int]:
        return None if self.winner is None else self.winner[0]

    @property
    def winner_judgment(self) -> Optional[Judgment]:
        return None if self.winner is None else self.winner[1]


def dedup_candidates(candidates: Sequence) -> tuple:
    """Structural dedup on (predicate AST, label), keeping the earliest
    occurrence; order otherwise preserved."""
    seen = set()
    out = []
    for c in candidates:
        key = (c.prop.predicate, c.prop.label)
        if key not in seen:
            seen.add(key)
            out.append(c)
    return tuple(out)


def baseline_solve(p: Program, target: Property, cfg: VerifierConfig,
                   cancel=None) -> VerifierResult:
    """Solve the target with no candidate assistance; its time is the
    reference for speedup."""
    return verify(p, (), target, cfg, cancel=cancel)


def _race_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    return int(os.environ.get("INVH_SEED", "0"))


def race_best_of_n(
    p: Program,
    target: Property,
    candidates: Sequence,
    cfg: VerifierConfig,
    workers: Optional[int] = None,
    deterministic: bool = True,
    seed: Optional[int] = None,
    cancel=None,
) -> RaceResult:
    """Race all candidates; the earliest conclusive judgment wins.

    In deterministic mode every candidate runs to completion and "earliest"
    is simulated as lowest total cost (ties to the lower index); in
    wall-clock mode the first conclusive completion wins and all other
    decides are cancelled. Either way no verifier work survives the return.
    """
    n = len(candidates)
    if n == 0:
        return RaceResult(None, (), 0.0)
    max_workers = workers or n
    order = list(range(n))
    random.Random(_race_seed(seed)).shuffle(order)
    t0 = time.perf_counter()

    judgments: list = [None] * n
    if deterministic:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futs = {
                pool.submit(_safe_decide, p, target, candidates[i].prop, cfg,
                            cancel): i
                for i in order
            }
            for fut, i in futs.items():
                judgments[i] = fut.result()
        conclusive = [
            (j.total_cost, i)
            for i, j in enumerate(judgments)
            if j is not None and j.outcome.conclusive
        ]
        if not conclusive:
            walls = [j.decide_wall_time for j in judgments if j is not None]
            return RaceResult(None, tuple(judgments), max(walls, default=0.0))
        _, win = min(conclusive)
        # simulated parallel wall time: the winner finishes first
        return RaceResult((win, judgments[win]), tuple(judgments),
                          judgments[win].decide_wall_time)

    tokens = [threading.Event() for _ in range(n)]
    if cancel is not None and cancel.is_set():
        for tok in tokens:
            tok.set()
    winner = None
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futs = {
            pool.submit(_safe_decide, p, target, candidates[i].prop, cfg,
                        tokens[i]): i
            for i in order
        }
        pending = set(futs)
        while pending:
            done, pending = wait(pending, timeout=0.05,
                                 return_when=FIRST_COMPLETED)
            if cancel is not None and cancel.is_set():
                for tok in tokens:
                    tok.set()
            for fut in done:
                i = futs[fut]
                judgments[i] = fut.result()
                j = judgments[i]
                if winner is None and j is not None and j.outcome.conclusive:
                    winner = (i, j)
                    for k, tok in enumerate(tokens):
                        if k != i:
                            tok.set()
    return RaceResult(winner, tuple(judgments), time.perf_counter() - t0)


def _safe_decide(p, target, prop, cfg, cancel) -> Optional[Judgment]:
    try:
        return decide(p, target, prop, cfg, cancel=cancel)
    except ImpureCandidateError:
        return None
