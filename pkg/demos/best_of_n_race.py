"""Best-of-N racing over a batch of candidate invariants.

Sixteen raw samples collapse to eight distinct candidates after structural
dedup. Only one of them is both correct and strong enough to settle the
target; the race runs all decisions concurrently and keeps the candidate
whose conclusive judgment costs least, cancelling the rest.
"""

from invh import (
    Candidate,
    VerifierConfig,
    dedup_candidates,
    parse_program,
    property_from_text,
    race_best_of_n,
)

SRC = """\
int x = 3;
@B: while (x < 150) {
  x = x + 7;
}
@E: assert(x % 5 == 0);
"""

program = parse_program(SRC)
# modulo facts are outside the interval domain, so conclusive answers must
# come from the explicit engine; most of these candidates die as DEC-U
sample_texts = ["x % 9 == 3", "x % 10 == 3", "x % 11 == 3", "x % 12 == 3",
                "x % 13 == 3", "x % 4 == 3", "x % 6 == 3", "x % 7 == 3"]
samples = [Candidate(property_from_text(t, "B", program))
           for t in sample_texts for _ in (0, 1)]  # duplicated, as if sampled

candidates = dedup_candidates(samples)
print(f"{len(samples)} samples -> {len(candidates)} candidates after dedup")

target = property_from_text("x % 5 == 0", "E", program)
result = race_best_of_n(program, target, candidates,
                        VerifierConfig(width=8), workers=4)

for i, judgment in enumerate(result.judgments):
    mark = "<- winner" if i == result.winner_index else ""
    print(f"  [{i}] {sample_texts[i]:12} outcome {judgment.outcome} "
          f"({judgment.rule}, cost {judgment.total_cost}) {mark}")

winner = result.winner_judgment
print(f"\nwinner: {candidates[result.winner_index].prop} -> {winner.outcome} "
      f"in {result.race_wall_time * 1000:.1f} ms (simulated parallel wall)")
