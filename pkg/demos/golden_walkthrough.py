"""End-to-end walkthrough on the running example.

A counter steps by 7 from 3; the interesting fact is that x stays congruent
to 3 mod 7, which is exactly strong enough to prove the final assertion.
We look at the ground truth first (exhaustive enumeration), then judge a
strong, a weak, and a wrong candidate invariant, and finally check the
classic while-rule premises for the same loop.
"""

from invh import (
    VerifierConfig,
    baseline_solve,
    check_hoare_while,
    decide,
    enumerate_reachable,
    make_loop_spec,
    parse_predicate,
    parse_program,
    property_from_text,
)

SRC = """\
int x = 3;
@B: while (x < 150) {
  x = x + 7;
}
@E: assert(x != 145);
"""

program = parse_program(SRC)
cfg = VerifierConfig(width=8)

print(SRC)

print("== ground truth by exhaustive enumeration ==")
reach = enumerate_reachable(program, budget=100_000, width=8)
xs = sorted(s["x"] for s in reach.states_at("B"))
print(f"states on arrival at B: {xs[:4]} ... {xs[-3:]}  ({len(xs)} values)")
print(f"assertion violations found: {len(reach.violation_traces())}")

target = property_from_text("x != 145", "E", program)
baseline = baseline_solve(program, target, cfg)
print(f"\nbaseline (no candidate): {baseline.verdict} "
      f"via {baseline.backend}, cost {baseline.cost}")

print("\n== judging candidates ==")
for text in ("x % 7 == 3", "x > 0", "x < 150"):
    candidate = property_from_text(text, "B", program)
    judgment = decide(program, target, candidate, cfg)
    a, b = judgment.candidate_check, judgment.target_check
    print(f"candidate {text!r:14} -> outcome {judgment.outcome} "
          f"[{judgment.rule}]  (candidate query {a.verdict}, "
          f"target-under-assumption {b.verdict})")

print("\n== while-rule premises for the same loop ==")
for inv_text in ("x % 7 == 3", "x < 150"):
    spec = make_loop_spec(
        program, "B",
        parse_predicate("x == 3", program),
        parse_predicate(inv_text, program),
        parse_predicate("x != 145", program),
    )
    print(f"invariant {inv_text!r:14} -> {check_hoare_while(spec, cfg)}")
