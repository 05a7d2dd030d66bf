import os
import random

import pytest

from invh import VerifierConfig, parse_program, property_from_text
from invh.randgen import gen_program, gen_property

FIG1_SRC = """\
int x = 3;
@B: while (x < 150) {
  x = x + 7;
}
@E: assert(x != 145);
"""

FUZZ_SEED = int(os.environ.get("INVH_SEED", "20260810"))


@pytest.fixture(scope="session")
def fig1():
    return parse_program(FIG1_SRC)


@pytest.fixture(scope="session")
def fig1_target(fig1):
    return property_from_text("x != 145", "E", fig1)


@pytest.fixture(scope="session")
def fig1_candidate(fig1):
    return property_from_text("x % 7 == 3", "B", fig1)


@pytest.fixture(scope="session")
def cfg8():
    return VerifierConfig(width=8, budget=1_000_000)


@pytest.fixture(scope="session")
def fuzz_corpus():
    """1000 random programs with random target and candidate properties:
    <= 3 variables, width 4, <= 20 statements, <= 2 loops, >= 1 nondet."""
    rng = random.Random(FUZZ_SEED)
    corpus = []
    for _ in range(1000):
        p = gen_program(rng, max_vars=3, width=4, max_stmts=20, max_loops=2,
                        require_nondet=True)
        corpus.append((p, gen_property(rng, p), gen_property(rng, p)))
    return corpus
