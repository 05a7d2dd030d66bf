"""Why strong invariants speed verification up.

Each family member pairs a loop the interval prover cannot summarize on its
own (widening wipes out the bound on the lagged copy, and the single
narrowing pass cannot bring it back) with a nondet noise variable that makes
exhaustive enumeration expensive. Assuming the candidate bound at the loop
head re-narrows the widened interval, so both decision queries finish on the
cheap prover while the baseline pays for the full enumeration.
"""

from invh import VerifierConfig, baseline_solve, decide
from invh.lang import print_expr
from invh.randgen import speedup_family

cfg = VerifierConfig(width=8)

print(f"{'member':>8} {'baseline':>10} {'assisted':>9} {'cost ratio':>11} "
      f"{'wall speedup':>13}")
ratios, speedups = [], []
for i, (program, target, candidate) in enumerate(speedup_family(10)):
    baseline = baseline_solve(program, target, cfg)
    judgment = decide(program, target, candidate, cfg)
    assert baseline.verdict.value == "T" and judgment.outcome.value == "T"
    ratio = judgment.total_cost / baseline.cost
    speedup = baseline.wall_time / judgment.decide_wall_time
    ratios.append(ratio)
    speedups.append(speedup)
    print(f"{i:>8} {baseline.cost:>10} {judgment.total_cost:>9} "
          f"{ratio:>11.4f} {speedup:>12.1f}x")

print(f"\ncandidate shape: {print_expr(candidate.predicate)} at the loop head")
print(f"worst cost ratio: {max(ratios):.4f} (assisted work vs baseline work)")
print(f"members with wall speedup > 1: {sum(s > 1 for s in speedups)}/10")
