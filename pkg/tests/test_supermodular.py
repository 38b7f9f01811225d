import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import all_subsets, supermodular_case, supermodular_table
from mdx.asc_supermodular import (
    PowerSetFamily,
    SupermodularAsc,
    SupermodularOracle,
    max_violated,
    next_asc,
    supermodular_instance,
    tight_union,
)
from mdx.core import GroundSet, ResidualState, asc_violations, iteration_bound, run_engine
from mdx.errors import OracleFailure, ScaleExceeded, ValidationError
from oracles import check_decomposition, max_gap

AB = GroundSet(["a", "b"])
PI_AB = {frozenset(): F(0), frozenset("a"): F(3, 10), frozenset("b"): F(4, 10), frozenset("ab"): F(8, 10)}


def test_tight_union_and_next_asc_example():
    oracle = SupermodularOracle(AB, PI_AB)
    state = ResidualState({"a": F(4, 10), "b": F(4, 10)})
    assert tight_union(oracle, state) == frozenset("ab")
    assert next_asc(oracle, state) == frozenset("a")


def test_next_asc_without_tight_sets_beyond_the_empty_set():
    oracle = SupermodularOracle(AB, PI_AB)
    state = ResidualState({"a": F(1), "b": F(1)})
    assert tight_union(oracle, state) == frozenset()
    assert next_asc(oracle, state) == frozenset("ab")


def test_supermodular_example_decomposes():
    oracle = SupermodularOracle(AB, PI_AB)
    run = run_engine(supermodular_instance(oracle), {"a": F(4, 10), "b": F(4, 10)}, SupermodularAsc(oracle))
    assert run.decomposition == {frozenset(): F(1, 5), frozenset("a"): F(2, 5), frozenset("b"): F(2, 5)}


def test_missing_values_and_values_above_one_are_rejected():
    with pytest.raises(ValidationError):
        SupermodularOracle(AB, {frozenset(): 0})(frozenset("a"))
    with pytest.raises(ValidationError):
        SupermodularOracle(AB, {}, default=F(3, 2))(frozenset("a"))


def test_non_supermodular_tables_are_detected():
    bad = SupermodularOracle(AB, {frozenset(): 0, frozenset("a"): F(1, 2), frozenset("b"): F(1, 2), frozenset("ab"): F(1, 2)})
    assert bad.check_supermodular() is not None
    state = ResidualState({"a": F(1, 2), "b": F(1, 2)})
    with pytest.raises(OracleFailure):
        tight_union(bad, state)


def test_enumeration_cap():
    g = GroundSet([f"e{i}" for i in range(6)])
    with pytest.raises(ScaleExceeded):
        SupermodularOracle(g, {}, default=0, cap=5).table()
    with pytest.raises(ScaleExceeded):
        list(PowerSetFamily(g, cap=5).members())


@given(st.integers(0, 10**6), st.integers(1, 5))
def test_generated_tables_are_supermodular(seed, n):
    g = GroundSet([f"e{i}" for i in range(n)])
    table = supermodular_table(random.Random(seed), g)
    subsets = list(all_subsets(g))
    for A in subsets:
        for B in subsets:
            assert table[A | B] + table[A & B] >= table[A] + table[B]


@given(st.integers(0, 10**6), st.integers(1, 5))
def test_max_violated_matches_enumeration(seed, n):
    oracle, rho = supermodular_case(random.Random(seed), n, feasible=False)
    rows = [(S, oracle(S)) for S in all_subsets(oracle.ground)]
    gap, _ = max_gap(rows, rho)
    worst = max_violated(oracle, rho)
    if gap > 0:
        assert worst.gap == gap and oracle(worst.member) - sum(rho[e] for e in worst.member) == gap
    else:
        assert worst is None


@given(st.integers(0, 10**6), st.integers(1, 5))
def test_tight_sets_uncross_along_the_run(seed, n):
    # every residual state of a run is reachable; at each of them the tight union is tight
    # and the chosen set satisfies the ASC conditions
    oracle, rho = supermodular_case(random.Random(seed), n)
    inst = supermodular_instance(oracle)
    run = run_engine(inst, rho, SupermodularAsc(oracle))
    assert run.iterations <= iteration_bound(n)
    for step in run.steps:
        state = ResidualState(dict(step.rho_before), step.offset_before)
        tight = [S for S in all_subsets(oracle.ground) if state.is_tight(inst, S)]
        Q = tight_union(oracle, state)
        assert Q == frozenset().union(*tight)
        if tight:
            assert state.is_tight(inst, Q)
        assert asc_violations(inst, state, step.asc) == []
    rows = [(S, oracle(S)) for S in all_subsets(oracle.ground)]
    assert not check_decomposition(run.decomposition.weights, list(oracle.ground), rows, rho)
