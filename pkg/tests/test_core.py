import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import all_subsets
from mdx.core import (
    BruteForceAsc,
    Decomposition,
    ExplicitFamily,
    GroundSet,
    Instance,
    Marginals,
    ResidualState,
    TableRequirements,
    asc_violations,
    check_star,
    decompose,
    dominates,
    epsilon,
    iteration_bound,
    lift_marginals,
    run_engine,
    sample,
    verify,
)
from mdx.core.types import as_fraction, fraction_str
from mdx.errors import DeficitNegative, EmptySupport, InfeasibleMarginals, OracleFailure, ValidationError
from oracles import check_decomposition, hitting, in_polytope, max_gap

AB = GroundSet(["a", "b"])
PI_AB = {frozenset(): F(0), frozenset("a"): F(3, 10), frozenset("b"): F(4, 10), frozenset("ab"): F(8, 10)}


def power_instance(ground, table):
    return Instance(ground, ExplicitFamily(ground, table), TableRequirements(table))


def test_as_fraction_is_exact():
    assert as_fraction("0.3") == F(3, 10)
    assert as_fraction("3/10") == F(3, 10)
    assert as_fraction(0.1) == F(1, 10)
    assert fraction_str(F(6, 4)) == "3/2"
    assert fraction_str(F(2)) == "2"
    with pytest.raises(ValidationError):
        as_fraction("abc")
    with pytest.raises(ValidationError):
        as_fraction(True)


def test_ground_set_rejects_duplicates_and_orders_subsets():
    g = GroundSet(["b", "a", "c"])
    assert g.ordered({"a", "b"}) == ["b", "a"]
    assert g.from_mask(g.mask({"a", "c"})) == frozenset("ac")
    with pytest.raises(ValidationError):
        GroundSet(["a", "a"])


def test_marginals_outside_unit_interval_rejected():
    with pytest.raises(ValidationError):
        Marginals(AB, {"a": F(3, 2), "b": 0})


# dominance examples


def test_dominance_examples():
    P, Q = frozenset({"e1"}), frozenset({"e1", "e2"})
    rho = {"e1": F(0), "e2": F(2, 10)}
    assert dominates(P, Q, F(3, 10), F(6, 10), rho)
    assert dominates(P, P, F(1, 2), F(1, 2), rho)
    assert not dominates(frozenset({"e1"}), frozenset({"e2"}), F(1, 2), F(1, 2), rho)


@st.composite
def dominance_data(draw):
    n = draw(st.integers(1, 4))
    elements = [f"e{i}" for i in range(n)]
    subsets = list(all_subsets(elements))
    pi = {S: F(draw(st.integers(-2, 6)), 6) for S in subsets}
    rho = {e: F(draw(st.integers(0, 6)), 6) for e in elements}
    return subsets, pi, rho


@given(dominance_data())
def test_dominance_is_a_partial_order(data):
    subsets, pi, rho = data

    def d(P, Q):
        return dominates(P, Q, pi[P], pi[Q], rho)

    for P in subsets:
        assert d(P, P)
        for Q in subsets:
            if P != Q:
                assert not (d(P, Q) and d(Q, P))
            for R in subsets:
                if d(P, Q) and d(Q, R):
                    assert d(P, R)


# epsilon


def test_epsilon_example():
    inst = power_instance(AB, PI_AB)
    state = ResidualState({"a": F(4, 10), "b": F(4, 10)})
    assert epsilon(frozenset("a"), state, inst) == F(4, 10)
    assert epsilon(frozenset("a"), state, inst, "newton") == F(4, 10)


def test_epsilon_without_crossing_members_uses_first_two_terms():
    table = {frozenset("a"): F(1, 2), frozenset("b"): F(1, 5)}
    inst = power_instance(AB, table)
    state = ResidualState({"a": F(3, 4), "b": F(1, 4)})
    assert epsilon(frozenset("ab"), state, inst) == F(1, 4)


def test_epsilon_of_empty_set_is_an_error():
    inst = power_instance(AB, PI_AB)
    with pytest.raises(EmptySupport):
        epsilon(frozenset(), ResidualState({"a": F(1), "b": F(1)}), inst)


# decompose


def test_decompose_core_example():
    inst = power_instance(AB, PI_AB)
    z = decompose(inst, {"a": F(4, 10), "b": F(4, 10)}, BruteForceAsc(inst))
    assert z == {frozenset(): F(1, 5), frozenset("a"): F(2, 5), frozenset("b"): F(2, 5)}
    assert in_polytope(["a", "b"], list(PI_AB.items()), {"a": F(4, 10), "b": F(4, 10)})


def test_nonpositive_requirements_give_the_empty_set_before_lifting():
    table = {frozenset("a"): F(0), frozenset("ab"): F(-1, 2)}
    inst = power_instance(AB, table)
    rho = {"a": F(1, 3), "b": F(1, 2)}
    run = run_engine(inst, rho, BruteForceAsc(inst))
    assert run.iterations == 0
    assert run.raw == {frozenset(): F(1)}
    assert run.decomposition.marginals() == rho


def test_infeasible_marginals_are_rejected_with_the_worst_member():
    inst = power_instance(AB, PI_AB)
    with pytest.raises(InfeasibleMarginals) as exc:
        decompose(inst, {"a": F(2, 10), "b": F(2, 10)}, BruteForceAsc(inst))
    assert exc.value.member == frozenset("ab")
    assert exc.value.gap == F(2, 5)


def test_iteration_bound():
    assert [iteration_bound(n) for n in range(5)] == [0, 1, 3, 6, 10]


@st.composite
def explicit_cases(draw):
    n = draw(st.integers(1, 4))
    elements = [f"e{i}" for i in range(n)]
    ground = GroundSet(elements)
    subsets = list(all_subsets(elements))
    members = draw(st.lists(st.sampled_from(subsets[1:]), min_size=1, max_size=5, unique=True))
    table = {P: F(draw(st.integers(-1, 4)), 4) for P in members}
    rho = {e: F(draw(st.integers(0, 4)), 4) for e in elements}
    return ground, table, rho


@given(explicit_cases())
def test_brute_force_engine_is_exact_whenever_it_finishes(case):
    ground, table, rho = case
    inst = power_instance(ground, table)
    rows = list(table.items())
    if max_gap(rows, rho)[0] > 0:
        with pytest.raises(InfeasibleMarginals):
            run_engine(inst, rho, BruteForceAsc(inst))
        return
    try:
        run = run_engine(inst, rho, BruteForceAsc(inst), debug=True)
    except OracleFailure:
        # arbitrary families need not admit an ASC; the contract covers finished runs
        return
    assert run.iterations <= iteration_bound(len(ground))
    assert not check_decomposition(run.decomposition.weights, list(ground), rows, rho)


def test_asc_violations_reports_each_condition():
    inst = power_instance(AB, PI_AB)
    state = ResidualState({"a": F(4, 10), "b": F(4, 10)})
    assert asc_violations(inst, state, frozenset("a")) == []
    assert any(p.startswith("tight") for p in asc_violations(inst, state, frozenset("ab")))
    state0 = ResidualState({"a": F(0), "b": F(4, 10)})
    assert any(p.startswith("support") for p in asc_violations(inst, state0, frozenset("a")))


# lift_marginals


def test_lift_single_element():
    g = GroundSet(["a"])
    z = lift_marginals(Decomposition(g, {frozenset(): 1}), {"a": F(1, 2)})
    assert z == {frozenset(): F(1, 2), frozenset("a"): F(1, 2)}


def test_lift_is_identity_on_matching_marginals():
    z = Decomposition(AB, {frozenset("a"): F(1, 2), frozenset("b"): F(1, 2)})
    assert lift_marginals(z, {"a": F(1, 2), "b": F(1, 2)}) == z


def test_lift_example():
    z = Decomposition(AB, {frozenset("a"): F(1, 2), frozenset(): F(1, 2)})
    lifted = lift_marginals(z, {"a": F(1, 2), "b": F(1, 4)})
    assert lifted.marginals() == {"a": F(1, 2), "b": F(1, 4)}
    assert lifted.total() == 1


def test_lift_refuses_to_lower_marginals():
    z = Decomposition(AB, {frozenset("a"): F(1)})
    with pytest.raises(DeficitNegative):
        lift_marginals(z, {"a": F(1, 2), "b": F(0)})


@st.composite
def lift_cases(draw):
    n = draw(st.integers(1, 4))
    elements = [f"e{i}" for i in range(n)]
    subsets = list(all_subsets(elements))
    chosen = draw(st.lists(st.sampled_from(subsets), min_size=1, max_size=5, unique=True))
    raw = [draw(st.integers(1, 5)) for _ in chosen]
    z = {S: F(r, sum(raw)) for S, r in zip(chosen, raw)}
    marg = {e: sum((w for S, w in z.items() if e in S), F(0)) for e in elements}
    rho = {e: marg[e] + (1 - marg[e]) * F(draw(st.integers(0, 4)), 4) for e in elements}
    return GroundSet(elements), z, rho, subsets


@given(lift_cases())
def test_lift_fixes_deficits_and_never_lowers_hitting(case):
    ground, z, rho, subsets = case
    lifted = lift_marginals(Decomposition(ground, z), rho)
    assert lifted.marginals() == rho
    assert lifted.total() == 1
    for P in subsets:
        assert hitting(lifted.weights, P) >= hitting(z, P)


# verify / check_star / sample


def test_verify_examples():
    inst = power_instance(AB, PI_AB)
    rho = {"a": F(4, 10), "b": F(4, 10)}
    z = decompose(inst, rho, BruteForceAsc(inst))
    report = verify(inst, rho, z)
    assert report.ok and report.worst_violation <= 0

    g = GroundSet(["a"])
    single = Instance(g, ExplicitFamily(g, [{"a"}]), TableRequirements({frozenset("a"): F(1, 2)}))
    report = verify(single, {"a": F(0)}, Decomposition(g, {frozenset(): 1}))
    assert not report.hitting_ok and report.worst_violation == F(1, 2)

    short = Decomposition(AB, {frozenset(): F(9, 10)})
    assert not verify(power_instance(AB, {}), {"a": 0, "b": 0}, short).normalized


def test_check_star_examples():
    inst = power_instance(AB, PI_AB)
    assert check_star(inst, {"a": F(1), "b": F(1)}) is None
    g = GroundSet(["e1", "e2"])
    path = Instance(g, ExplicitFamily(g, [{"e1", "e2"}]), TableRequirements({frozenset(g): F(6, 10)}))
    worst = check_star(path, {"e1": F(2, 10), "e2": F(2, 10)})
    assert worst.member == frozenset(g) and worst.gap == F(1, 5)


@given(explicit_cases())
def test_check_star_matches_brute_force(case):
    ground, table, rho = case
    worst = check_star(power_instance(ground, table), rho)
    gap, _ = max_gap(list(table.items()), rho)
    if gap > 0:
        assert worst is not None and worst.gap == gap
    else:
        assert worst is None


def test_sample_examples():
    g = GroundSet(["a", "b"])
    assert sample(Decomposition(g, {frozenset(): 1}), 3) == frozenset()
    assert sample(Decomposition(g, {frozenset("a"): 1}), 9) == frozenset("a")
    z = Decomposition(g, {frozenset("a"): F(1, 2), frozenset("b"): F(1, 2)})
    rng = random.Random(0)
    draws = [sample(z, rng) for _ in range(100_000)]
    assert abs(draws.count(frozenset("a")) / len(draws) - 0.5) < 0.01
