"""Task ingestion, run orchestration, speedup metrics, report emission.

A task file is a JSON object:

    {
      "id": "fig1",
      "program": "fig1.mw",                   // path relative to the task file
      "width": 8,                             // optional, default 8
      "target": {"pred": "x != 145", "label": "E"},
      "candidates": [
        {"pred": "x % 7 == 3", "label": "B", "gen_time_s": 0.0, "source": "human"}
      ],
      "generator_cmd": "mygen {program_path}",  // optional candidate source
      "verifier": {"budget": 200000, "timeout_s": 30.0, ...}  // optional overrides
    }

For each task the harness measures the unassisted baseline first, grants the
candidate evaluation a wall timeout of `timeout_multiplier` times the
baseline solving time (default 1.0, matching the idea that assistance only
counts if it beats the solver's own time), runs the decision procedure (one
candidate) or a Best-of-N race, and derives the speedup. A speedup is only
recorded when the assisted outcome is conclusive and agrees with a
conclusive baseline; the charged generation time is added to the assisted
time. Unusable candidates (impure, unparseable, out of scope) are kept as
rejected entries so every task yields exactly one record.
"""

from __future__ import annotations

import csv
import json
import shlex
import subprocess
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .lang import DEFAULT_WIDTH, MiniWhileError, Program, parse_program
from .calculus import ImpureCandidateError, Judgment, decide
from .instrument import Property, property_from_text, scope_check
from .portfolio import Candidate, RaceResult, baseline_solve, dedup_candidates, race_best_of_n
from .predicate import Rejection, validate_pure
from .verifier import Verdict, VerifierConfig, VerifierResult

EASY_THRESHOLD_S = 30.0
MAX_THRESHOLD_S = 600.0

_CSV_COLUMNS = [
    "task_id", "split", "baseline_verdict", "baseline_time_s",
    "baseline_cost", "outcome", "rule", "d_a", "d_b", "gen_time_s",
    "assisted_time_s", "speedup", "correct_invariant", "winner_index",
]


class TaskError(Exception):
    """A task file failed validation; the message names the task."""


@dataclass
class Task:
    id: str
    program_path: str
    program: Program
    width: int
    target: Property
    candidates: list
    rejected: list              # (raw candidate dict, reason)
    generator_cmd: Optional[str] = None
    overrides: dict = field(default_factory=dict)


@dataclass
class RunRecord:
    task_id: str
    split: str
    baseline_verdict: str
    baseline_time_s: float
    baseline_cost: int
    outcome: str
    rule: str
    d_a: str
    d_b: str
    gen_time_s: float
    assisted_time_s: Optional[float]
    speedup: Optional[float]
    correct_invariant: bool
    winner_index: Optional[int]
    error: Optional[str] = None


@dataclass
class MetricsSummary:
    pct_correct_invariant: float
    pct_speedup: float
    speedup_gt1: float   # mean speedup over >1 cases; 1.0 when there are none
    speedup_all: float   # mean with absent-or-<=1 speedups counted as 1
    split_counts: dict


def load_task(path) -> Task:
    """Load and validate one task file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise TaskError(f"{path}: unreadable task file: {e}") from e
    task_id = raw.get("id") or path.stem
    try:
        program_rel = raw["program"]
        target_spec = raw["target"]
    except KeyError as e:
        raise TaskError(f"task {task_id}: missing key {e}") from e

    program_path = (path.parent / program_rel).resolve()
    try:
        program = parse_program(program_path.read_text(encoding="utf-8"))
    except (OSError, MiniWhileError) as e:
        raise TaskError(f"task {task_id}: bad program: {e}") from e

    width = int(raw.get("width", DEFAULT_WIDTH))
    try:
        target = property_from_text(target_spec["pred"], target_spec["label"],
                                    program)
    except (KeyError, MiniWhileError) as e:
        raise TaskError(f"task {task_id}: bad target: {e}") from e

    candidates, rejected = _parse_candidates(raw.get("candidates", []),
                                             program)
    return Task(
        id=task_id,
        program_path=str(program_path),
        program=program,
        width=width,
        target=target,
        candidates=candidates,
        rejected=rejected,
        generator_cmd=raw.get("generator_cmd"),
        overrides=dict(raw.get("verifier", {})),
    )


def _parse_candidates(entries, program) -> tuple:
    candidates, rejected = [], []
    for entry in entries:
        pred_text = entry.get("pred", "")
        label = entry.get("label", "")
        checked = validate_pure(pred_text, program)
        if isinstance(checked, Rejection):
            rejected.append((entry, checked.reason))
            continue
        prop = Property(checked, label)
        try:
            scope_check(program, prop)
        except MiniWhileError as e:
            rejected.append((entry, str(e)))
            continue
        candidates.append(Candidate(
            prop=prop,
            gen_time=float(entry.get("gen_time_s", 0.0)),
            source=str(entry.get("source", "")),
        ))
    return candidates, rejected


def task_config(task: Task, base: Optional[VerifierConfig] = None) -> VerifierConfig:
    """Apply a task's verifier overrides on top of a base config."""
    base = base or VerifierConfig()
    known = {"budget", "timeout_s", "backends", "widening_delay"}
    kwargs = {k: v for k, v in task.overrides.items() if k in known}
    if "backends" in kwargs:
        kwargs["backends"] = tuple(kwargs["backends"])
    return replace(base, width=task.width, **kwargs)


def classify_split(t_baseline: float,
                   thresholds: tuple = (EASY_THRESHOLD_S, MAX_THRESHOLD_S)) -> str:
    """easy: solved within the first threshold; hard: within the second;
    unsolved otherwise."""
    t_easy, t_max = thresholds
    if not 0 < t_easy < t_max:
        raise ValueError("thresholds must satisfy 0 < t_easy < t_max")
    if t_baseline <= t_easy:
        return "easy"
    if t_baseline <= t_max:
        return "hard"
    return "unsolved"


def _generated_candidates(task: Task) -> tuple:
    """Run the task's external generator command; one JSON candidate per
    stdout line (blank lines and # comments ignored)."""
    cmd = task.generator_cmd
    argv = [a.replace("{program_path}", task.program_path)
            for a in shlex.split(cmd)]
    proc = subprocess.run(argv, capture_output=True, text=True, timeout=600)
    if proc.returncode != 0:
        raise TaskError(f"task {task.id}: generator exited {proc.returncode}")
    entries = []
    for line in proc.stdout.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise TaskError(f"task {task.id}: bad generator line: {e}") from e
    return _parse_candidates(entries, task.program)


def run_task(
    task: Task,
    base_cfg: Optional[VerifierConfig] = None,
    timeout_multiplier: float = 1.0,
    thresholds: tuple = (EASY_THRESHOLD_S, MAX_THRESHOLD_S),
    gen_time_mode: str = "winner",
    deterministic_race: bool = True,
    workers: Optional[int] = None,
) -> RunRecord:
    """Measure the baseline, evaluate the task's candidates under the
    per-task timeout, and assemble one record (always, even on errors)."""
    cfg = task_config(task, base_cfg)

    baseline = baseline_solve(task.program, task.target, cfg)
    t_baseline = baseline.wall_time
    if baseline.verdict is Verdict.U:
        split = "unsolved"
    else:
        split = classify_split(t_baseline, thresholds)

    record = RunRecord(
        task_id=task.id,
        split=split,
        baseline_verdict=str(baseline.verdict),
        baseline_time_s=t_baseline,
        baseline_cost=baseline.cost,
        outcome="",
        rule="",
        d_a="",
        d_b="",
        gen_time_s=0.0,
        assisted_time_s=None,
        speedup=None,
        correct_invariant=False,
        winner_index=None,
    )

    candidates = list(task.candidates)
    rejected = list(task.rejected)
    if task.generator_cmd:
        try:
            gen_ok, gen_rej = _generated_candidates(task)
            candidates.extend(gen_ok)
            rejected.extend(gen_rej)
        except (TaskError, subprocess.SubprocessError, OSError) as e:
            record.error = str(e)
            return record

    if rejected and not record.error:
        record.error = "; ".join(f"rejected: {reason}" for _, reason in rejected)
    if not candidates:
        if rejected:
            record.outcome = "U"
        return record

    if baseline.verdict.conclusive:
        per_task_timeout = max(timeout_multiplier * t_baseline, 1e-6)
        cand_cfg = replace(cfg, timeout_s=per_task_timeout)
    else:
        cand_cfg = cfg

    candidates = dedup_candidates(candidates)
    winner_gen_time = 0.0
    if len(candidates) == 1:
        try:
            judgment = decide(task.program, task.target, candidates[0].prop,
                              cand_cfg)
        except ImpureCandidateError as e:  # pre-validated; defensive
            record.outcome = "U"
            record.error = f"rejected: {e}"
            return record
        assisted_wall = judgment.decide_wall_time
        winner_gen_time = candidates[0].gen_time
        record.correct_invariant = (
            judgment.candidate_check.verdict is Verdict.T)
        _fill_judgment(record, judgment)
    else:
        race = race_best_of_n(task.program, task.target, candidates, cand_cfg,
                              workers=workers,
                              deterministic=deterministic_race)
        assisted_wall = race.race_wall_time
        record.winner_index = race.winner_index
        record.correct_invariant = any(
            j is not None and j.candidate_check.verdict is Verdict.T
            for j in race.judgments
        )
        if race.winner is not None:
            _fill_judgment(record, race.winner_judgment)
            winner_gen_time = candidates[race.winner_index].gen_time
        else:
            record.outcome = "U"

    if gen_time_mode == "max":
        record.gen_time_s = max((c.gen_time for c in candidates), default=0.0)
    else:
        record.gen_time_s = winner_gen_time
    record.assisted_time_s = assisted_wall + record.gen_time_s

    if (baseline.verdict.conclusive and record.outcome in ("T", "F")
            and record.outcome == str(baseline.verdict)):
        record.speedup = t_baseline / max(record.assisted_time_s, 1e-12)
    return record


def _fill_judgment(record: RunRecord, judgment: Judgment) -> None:
    record.outcome = str(judgment.outcome)
    record.rule = judgment.rule
    record.d_a = str(judgment.candidate_check.verdict)
    record.d_b = str(judgment.target_check.verdict)


def compute_metrics(records: Sequence) -> MetricsSummary:
    """Aggregate records into the headline metrics.

    Percentage fields are fractions over all records. The conditional mean
    covers only speedups above 1 (reported as 1.0 when there are none); the
    overall mean counts every absent-or-not-above-1 speedup as exactly 1.
    """
    if not records:
        raise ValueError("compute_metrics requires at least one record")
    n = len(records)
    gt1 = [r.speedup for r in records if r.speedup is not None and r.speedup > 1]
    split_counts: dict = {}
    for r in records:
        split_counts[r.split] = split_counts.get(r.split, 0) + 1
    return MetricsSummary(
        pct_correct_invariant=sum(r.correct_invariant for r in records) / n,
        pct_speedup=len(gt1) / n,
        speedup_gt1=sum(gt1) / len(gt1) if gt1 else 1.0,
        speedup_all=sum(
            r.speedup if (r.speedup is not None and r.speedup > 1) else 1.0
            for r in records
        ) / n,
        split_counts=split_counts,
    )


def emit_report(records: Sequence, summary: Optional[MetricsSummary],
                path, fmt: str = "csv") -> Path:
    """Write the run report; CSV column set is fixed, JSON mirrors the same
    fields (plus the error note) and round-trips numerics bit-exactly."""
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(_CSV_COLUMNS)
            for r in records:
                d = asdict(r)
                w.writerow(["" if d[c] is None else d[c] for c in _CSV_COLUMNS])
    elif fmt == "json":
        payload = {
            "records": [asdict(r) for r in records],
            "summary": None if summary is None else asdict(summary),
        }
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path


def load_report(path) -> tuple:
    """Load a JSON report back into (records, summary)."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    records = [RunRecord(**entry) for entry in raw["records"]]
    summary = None
    if raw.get("summary") is not None:
        summary = MetricsSummary(**raw["summary"])
    return records, summary


def run_task_dir(
    task_dir,
    base_cfg: Optional[VerifierConfig] = None,
    **run_kwargs,
) -> list:
    """Run every *.json task in a directory, sorted by name; errors become
    per-task records rather than aborting the sweep."""
    records = []
    for path in sorted(Path(task_dir).glob("*.json")):
        try:
            task = load_task(path)
        except TaskError as e:
            records.append(RunRecord(
                task_id=path.stem, split="unsolved", baseline_verdict="U",
                baseline_time_s=0.0, baseline_cost=0, outcome="", rule="",
                d_a="", d_b="", gen_time_s=0.0, assisted_time_s=None,
                speedup=None, correct_invariant=False, winner_index=None,
                error=str(e),
            ))
            continue
        records.append(run_task(task, base_cfg, **run_kwargs))
    return records
