"""invh: a sound harness for evaluating candidate loop invariants.

The pipeline: parse a MiniWhile program, state a target property and a
candidate invariant as predicate@label pairs, and let the decision procedure
judge the candidate with two parallel verifier queries. Verifier backends
are exact explicit-state enumeration and an interval prover; Best-of-N
racing, benchmark orchestration, and speedup metrics sit on top.
"""

from .lang import (
    DEFAULT_WIDTH,
    MiniWhileError,
    ParseError,
    Program,
    ScopeError,
    locations_of,
    parse_program,
    pretty_print,
)
from .predicate import EvalFault, Predicate, Rejection, eval_predicate, parse_predicate, validate_pure
from .interp import (
    BudgetExceeded,
    Configuration,
    Interrupted,
    State,
    Terminal,
    Trace,
    enumerate_reachable,
    replay_trace,
    run_concrete,
    step,
)
from .instrument import CheckSpec, Property, export_program, insert_assumes, make_check, property_from_text
from .verifier import (
    Verdict,
    VerifierConfig,
    VerifierResult,
    verify,
    verify_explicit,
    verify_external,
    verify_intervals,
)
from .calculus import (
    DEC_FALSE,
    DEC_PROP,
    DEC_U,
    HoareReport,
    ImpureCandidateError,
    Judgment,
    LoopSpec,
    check_hoare_while,
    decide,
    make_loop_spec,
)
from .portfolio import Candidate, RaceResult, baseline_solve, dedup_candidates, race_best_of_n
from .bench import (
    MetricsSummary,
    RunRecord,
    Task,
    TaskError,
    classify_split,
    compute_metrics,
    emit_report,
    load_report,
    load_task,
    run_task,
    run_task_dir,
)

__version__ = "0.1.0"
