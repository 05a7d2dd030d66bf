"""Command-line surface.

Subcommands: verify, decide, race, hoare, bench, report. Properties are
written PRED@LABEL (quote the predicate: `"x != 145"@E`). Exit codes:
0 conclusive result, 1 inconclusive, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .lang import DEFAULT_WIDTH, MiniWhileError, parse_program
from . import bench as bench_mod
from .calculus import ImpureCandidateError, check_hoare_while, decide, make_loop_spec
from .instrument import property_from_text
from .interp import BudgetExceeded
from .portfolio import Candidate, dedup_candidates, race_best_of_n
from .predicate import parse_predicate
from .verifier import Verdict, VerifierConfig, verify, verify_external

EXIT_CONCLUSIVE = 0
EXIT_INCONCLUSIVE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _split_prop(text: str) -> tuple:
    if "@" not in text:
        raise UsageError(f"property {text!r} must be PRED@LABEL")
    pred, label = text.rsplit("@", 1)
    pred, label = pred.strip(), label.strip()
    if not pred or not label:
        raise UsageError(f"property {text!r} must be PRED@LABEL")
    return pred, label


def _load_program(path: str):
    try:
        return parse_program(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e


def _config(args) -> VerifierConfig:
    backends = ("intervals", "explicit")
    backend = getattr(args, "backend", "pipeline")
    if backend == "explicit":
        backends = ("explicit",)
    elif backend == "intervals":
        backends = ("intervals",)
    return VerifierConfig(
        width=args.width,
        budget=args.budget,
        timeout_s=args.timeout,
        backends=backends,
        widening_delay=args.widening_delay,
    )


def _result_dict(r) -> dict:
    return {
        "verdict": str(r.verdict),
        "backend": r.backend,
        "wall_time_s": r.wall_time,
        "cost": r.cost,
        "cancelled": r.cancelled,
        "trusted": r.trusted,
        "reason": r.reason,
    }


def _judgment_dict(j) -> dict:
    return {
        "outcome": str(j.outcome),
        "rule": j.rule,
        "d_a": _result_dict(j.candidate_check),
        "d_b": _result_dict(j.target_check),
        "decide_wall_time_s": j.decide_wall_time,
        "total_cost": j.total_cost,
    }


def _print_trace(trace) -> None:
    for c in trace.configs:
        print(f"    pc={c.pc} {c.state}")
    print(f"    terminal: {trace.terminal.kind} ({trace.terminal.detail})")


def _cmd_verify(args) -> int:
    p = _load_program(args.file)
    pred, label = _split_prop(args.prop)
    prop = property_from_text(pred, label, p)
    assumptions = []
    for a in args.assume or ():
        apred, alabel = _split_prop(a)
        assumptions.append(property_from_text(apred, alabel, p))
    if args.backend.startswith("external:"):
        cmd = args.backend.split(":", 1)[1]
        r = verify_external(cmd, p, assumptions, prop,
                            timeout=args.timeout or 60.0)
    else:
        r = verify(p, assumptions, prop, _config(args))
    if args.json:
        print(json.dumps(_result_dict(r)))
    else:
        print(f"verdict: {r.verdict}")
        print(f"backend: {r.backend}  wall: {r.wall_time:.4f}s  cost: {r.cost}")
        if r.reason:
            print(f"reason: {r.reason}")
        if r.counterexample is not None:
            print("counterexample:")
            _print_trace(r.counterexample)
    return EXIT_CONCLUSIVE if r.verdict.conclusive else EXIT_INCONCLUSIVE


def _cmd_decide(args) -> int:
    p = _load_program(args.file)
    tpred, tlabel = _split_prop(args.target)
    cpred, clabel = _split_prop(args.candidate)
    target = property_from_text(tpred, tlabel, p)
    candidate = property_from_text(cpred, clabel, p)
    j = decide(p, target, candidate, _config(args))
    if args.json:
        print(json.dumps(_judgment_dict(j)))
    else:
        print(f"outcome: {j.outcome}  rule: {j.rule}")
        a, b = j.candidate_check, j.target_check
        print(f"d_a: {a.verdict} ({a.backend}, {a.wall_time:.4f}s, cost {a.cost})")
        print(f"d_b: {b.verdict} ({b.backend}, {b.wall_time:.4f}s, cost {b.cost})")
        print(f"wall: {j.decide_wall_time:.4f}s  total cost: {j.total_cost}")
    return EXIT_CONCLUSIVE if j.outcome.conclusive else EXIT_INCONCLUSIVE


def _load_candidates(path: str, program) -> list:
    text = Path(path).read_text(encoding="utf-8")
    out = []
    if path.endswith(".json"):
        for entry in json.loads(text):
            prop = property_from_text(entry["pred"], entry["label"], program)
            out.append(Candidate(prop, float(entry.get("gen_time_s", 0.0)),
                                 str(entry.get("source", ""))))
        return out
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        pred, label = _split_prop(line)
        out.append(Candidate(property_from_text(pred, label, program)))
    return out


def _cmd_race(args) -> int:
    p = _load_program(args.file)
    tpred, tlabel = _split_prop(args.target)
    target = property_from_text(tpred, tlabel, p)
    candidates = dedup_candidates(_load_candidates(args.candidates, p))
    result = race_best_of_n(p, target, candidates, _config(args),
                            workers=args.workers,
                            deterministic=not args.wall_clock)
    if args.json:
        print(json.dumps({
            "winner_index": result.winner_index,
            "winner": (None if result.winner is None
                       else _judgment_dict(result.winner_judgment)),
            "race_wall_time_s": result.race_wall_time,
            "candidates": len(candidates),
        }))
    elif result.winner is None:
        print("no conclusive candidate")
    else:
        idx, j = result.winner
        print(f"winner: candidate {idx} ({candidates[idx].prop})")
        print(f"outcome: {j.outcome}  rule: {j.rule}  "
              f"wall: {result.race_wall_time:.4f}s")
    return EXIT_CONCLUSIVE if result.winner is not None else EXIT_INCONCLUSIVE


def _cmd_hoare(args) -> int:
    p = _load_program(args.file)
    spec = make_loop_spec(
        p, args.loop,
        parse_predicate(args.pre, p),
        parse_predicate(args.inv, p),
        parse_predicate(args.post, p),
    )
    try:
        report = check_hoare_while(spec, _config(args))
    except BudgetExceeded as e:
        if args.json:
            print(json.dumps({"holds": None, "error": "budget exceeded",
                              "cost": e.explored}))
        else:
            print(f"inconclusive: enumeration budget exceeded ({e.explored})")
        return EXIT_INCONCLUSIVE
    if args.json:
        print(json.dumps({
            "holds": report.holds,
            "failed_premise": report.failed_premise,
            "witness": (None if report.witness is None
                        else report.witness.as_dict()),
            "cost": report.cost,
        }))
    else:
        print(str(report))
    return EXIT_CONCLUSIVE


def _cmd_bench(args) -> int:
    records = bench_mod.run_task_dir(
        args.taskdir,
        base_cfg=_config(args),
        timeout_multiplier=args.timeout_multiplier,
        gen_time_mode=args.gen_time_mode,
        deterministic_race=not args.wall_clock,
        workers=args.workers,
    )
    if not records:
        raise UsageError(f"no *.json tasks found in {args.taskdir}")
    summary = bench_mod.compute_metrics(records)
    bench_mod.emit_report(records, summary, args.out, args.format)
    _print_summary(summary, len(records))
    print(f"report written to {args.out}")
    return EXIT_CONCLUSIVE


def _cmd_report(args) -> int:
    records, summary = bench_mod.load_report(args.records)
    if summary is None or args.summary:
        summary = bench_mod.compute_metrics(records)
    if args.json:
        print(json.dumps(asdict(summary)))
    else:
        _print_summary(summary, len(records))
    return EXIT_CONCLUSIVE


def _print_summary(s, n: int) -> None:
    print(f"tasks: {n}  splits: {s.split_counts}")
    print(f"% correct invariant: {100 * s.pct_correct_invariant:.1f}%")
    print(f"% speedup:           {100 * s.pct_speedup:.1f}%")
    print(f"speedup (>1 cases):  {s.speedup_gt1:.2f}x")
    print(f"speedup (all):       {s.speedup_all:.2f}x")


def _add_common(sp, backend: bool = True) -> None:
    sp.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    sp.add_argument("--budget", type=int, default=1_000_000)
    sp.add_argument("--timeout", type=float, default=None,
                    help="wall timeout in seconds")
    sp.add_argument("--widening-delay", type=int, default=3)
    sp.add_argument("--json", action="store_true", help="machine output")
    if backend:
        sp.add_argument("--backend", default="pipeline",
                        help="explicit | intervals | pipeline | external:CMD")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="invh",
        description="Evaluate candidate loop invariants on MiniWhile programs.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify", help="run one verifier query")
    sp.add_argument("file")
    sp.add_argument("--prop", required=True, help='e.g. "x != 145"@E')
    sp.add_argument("--assume", action="append", default=[])
    _add_common(sp)
    sp.set_defaults(fn=_cmd_verify)

    sp = sub.add_parser("decide", help="evaluate one candidate invariant")
    sp.add_argument("file")
    sp.add_argument("--target", required=True)
    sp.add_argument("--candidate", required=True)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_decide)

    sp = sub.add_parser("race", help="Best-of-N candidate race")
    sp.add_argument("file")
    sp.add_argument("--target", required=True)
    sp.add_argument("--candidates", required=True,
                    help="JSON list or PRED@LABEL lines")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--wall-clock", action="store_true",
                    help="race by wall clock instead of deterministic cost")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_race)

    sp = sub.add_parser("hoare", help="check the while-rule premises")
    sp.add_argument("file")
    sp.add_argument("--loop", required=True, help="label of the while loop")
    sp.add_argument("--pre", required=True)
    sp.add_argument("--inv", required=True)
    sp.add_argument("--post", required=True)
    _add_common(sp, backend=False)
    sp.set_defaults(fn=_cmd_hoare)

    sp = sub.add_parser("bench", help="run a directory of task files")
    sp.add_argument("taskdir")
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--timeout-multiplier", type=float, default=1.0)
    sp.add_argument("--gen-time-mode", choices=("winner", "max"),
                    default="winner")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--wall-clock", action="store_true")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_bench)

    sp = sub.add_parser("report", help="summarize a JSON report")
    sp.add_argument("records")
    sp.add_argument("--summary", action="store_true")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=_cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (UsageError, MiniWhileError, ImpureCandidateError,
            bench_mod.TaskError, ValueError, OSError,
            json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
