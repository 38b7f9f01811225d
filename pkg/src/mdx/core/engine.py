"""The generic decomposition engine and the dominance machinery it relies on."""
from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Protocol

from ..errors import (
    EmptySupport,
    InfeasibleMarginals,
    IterationOverflow,
    OracleFailure,
    ScaleExceeded,
)
from .lift import lift_marginals
from .types import EMPTY, ONE, ZERO, Decomposition, Instance, Marginals

log = logging.getLogger(__name__)


def dominates(P: frozenset, Q: frozenset, pi_P: Fraction, pi_Q: Fraction, rho: Mapping) -> bool:
    """True iff P is dominated by Q (P ⊑ Q) for requirements pi and marginals rho."""
    if P == Q:
        return True
    return pi_P < pi_Q and pi_P <= pi_Q - sum((rho[e] for e in Q - P), ZERO)


@dataclass
class ResidualState:
    """Residual marginals and the constant by which every requirement has been lowered."""

    rho_bar: dict[str, Fraction]
    offset: Fraction = ZERO
    iteration: int = 0

    def pi_bar(self, inst: Instance, member: frozenset) -> Fraction:
        return inst.pi(member) - self.offset

    def support(self) -> frozenset:
        return frozenset(e for e, v in self.rho_bar.items() if v > 0)

    def total(self, member: Iterable[str]) -> Fraction:
        return sum((self.rho_bar[e] for e in member), ZERO)

    def is_tight(self, inst: Instance, member: frozenset) -> bool:
        return self.total(member) == self.pi_bar(inst, member)


class AscOracle(Protocol):
    def next_asc(self, state: ResidualState) -> frozenset: ...


@dataclass(frozen=True)
class Step:
    asc: frozenset
    epsilon: Fraction
    rho_before: dict
    offset_before: Fraction


@dataclass
class EngineRun:
    steps: list[Step] = field(default_factory=list)
    raw: Decomposition | None = None
    decomposition: Decomposition | None = None

    @property
    def iterations(self) -> int:
        return len(self.steps)


def iteration_bound(n: int) -> int:
    return comb(n, 2) + n


def epsilon(S: frozenset, state: ResidualState, inst: Instance, mode: str = "auto") -> Fraction:
    """Largest mass that can be moved onto S while the residual stays feasible.

    ``mode`` is ``"enumerate"`` (scan all members), ``"newton"`` (discrete
    Newton on the family's most-violated-inequality oracle) or ``"auto"``
    (enumerate when the family is enumerable).
    """
    if not S:
        raise EmptySupport("epsilon of the empty set is undefined")
    max_pi = inst.max_requirement()
    bound = min(min(state.rho_bar[e] for e in S), max_pi - state.offset)
    if mode == "auto":
        mode = "enumerate" if inst.enumerable else "newton"
    if mode == "enumerate":
        delta = None
        for P in inst.members():
            k = len(P & S)
            if k > 1:
                r = (state.pi_bar(inst, P) - state.total(P)) / (1 - k)
                if delta is None or r < delta:
                    delta = r
        return bound if delta is None else min(bound, delta)
    if mode != "newton":
        raise ValueError(f"unknown epsilon mode {mode!r}")
    return _newton_epsilon(S, state, inst, bound)


def _newton_epsilon(S, state, inst, upper):
    # g(lam) = max_P pi_bar_P - lam - (rho_bar - lam 1_S)(P); find the largest lam <= upper with g <= 0
    lam = upper
    for _ in range(len(S) + 2):
        shifted = {e: v - lam if e in S else v for e, v in state.rho_bar.items()}
        try:
            worst = inst.most_violated(shifted, state.offset + lam)
        except Exception as exc:  # noqa: BLE001 - any oracle error is an oracle failure here
            raise OracleFailure(f"violated-inequality oracle failed: {exc}") from exc
        if worst is None or worst.gap <= 0:
            return lam
        k = len(worst.member & S)
        if k <= 1:
            raise InfeasibleMarginals(
                "residual marginals violate the covering condition", worst.member, worst.gap
            )
        P = worst.member
        lam = (state.pi_bar(inst, P) - state.total(P)) / (1 - k)
    raise OracleFailure("discrete Newton did not converge within |S| steps")


def asc_violations(inst: Instance, state: ResidualState, S: frozenset) -> list[str]:
    """Check the three ASC conditions by enumeration.

    Failures are tagged "support" (S leaves the residual support), "tight"
    (a tight member meets S twice or more) and "cover" (a non-dominated
    member with positive requirement misses S).  Empty means S is an ASC.
    """
    problems = []
    if not S <= state.support():
        problems.append(f"support: {sorted(S - state.support())} have zero residual marginal")
    members = list(inst.members())
    pib = {P: state.pi_bar(inst, P) for P in members}
    for P in members:
        if len(P & S) > 1 and state.total(P) == pib[P]:
            problems.append(f"tight: member {sorted(P)} meets S {len(P & S)} times")
    positive = [P for P in members if pib[P] > 0]
    for P in positive:
        if P & S:
            continue
        if not any(Q != P and dominates(P, Q, pib[P], pib[Q], state.rho_bar) for Q in positive):
            problems.append(f"cover: non-dominated member {sorted(P)} missed by S")
    return problems


def _check_residual(inst: Instance, state: ResidualState) -> None:
    for e, v in state.rho_bar.items():
        if v < 0:
            raise AssertionError(f"residual marginal of {e!r} became {v}")
    for P in inst.members():
        if state.total(P) < state.pi_bar(inst, P):
            raise AssertionError(f"residual covering condition fails on {sorted(P)}")


def run_engine(
    inst: Instance,
    rho: Mapping[str, Fraction],
    oracle: AscOracle,
    *,
    epsilon_mode: str = "auto",
    debug: bool = False,
    precheck: bool = True,
) -> EngineRun:
    """Run the ASC-driven decomposition loop and lift the result to ``rho``.

    With ``debug`` the ASC conditions and the residual invariants are checked
    by enumeration in every iteration (explicit families only).
    """
    ground = inst.ground
    rho = Marginals(ground, rho) if not isinstance(rho, Marginals) else rho
    if precheck:
        worst = inst.most_violated(rho)
        if worst is not None and worst.gap > 0:
            raise InfeasibleMarginals(
                f"covering condition violated on {ground.ordered(worst.member)} by {worst.gap}",
                worst.member,
                worst.gap,
            )
    max_pi = inst.max_requirement()
    max_pi = ZERO if max_pi is None else max_pi
    state = ResidualState(dict(rho.items()))
    run = EngineRun()
    raw: dict[frozenset, Fraction] = {}
    limit = iteration_bound(len(ground))
    debug = debug and inst.enumerable
    while max_pi - state.offset > 0:
        if state.iteration >= limit:
            raise IterationOverflow(f"more than {limit} iterations; the ASC oracle is defective")
        S = frozenset(oracle.next_asc(state))
        if not S:
            raise OracleFailure("ASC oracle returned the empty set while requirements remain")
        if debug:
            problems = asc_violations(inst, state, S)
            if problems:
                raise OracleFailure("oracle returned a non-ASC: " + "; ".join(problems))
        eps = epsilon(S, state, inst, epsilon_mode)
        if eps <= 0:
            if eps < 0:
                raise InfeasibleMarginals("residual marginals violate the covering condition")
            raise OracleFailure(f"zero step on {ground.ordered(S)}")
        run.steps.append(Step(S, eps, dict(state.rho_bar), state.offset))
        raw[S] = raw.get(S, ZERO) + eps
        for e in S:
            state.rho_bar[e] -= eps
        state.offset += eps
        state.iteration += 1
        if debug:
            _check_residual(inst, state)
    raw[EMPTY] = raw.get(EMPTY, ZERO) + ONE - state.offset
    run.raw = Decomposition(ground, raw)
    run.decomposition = lift_marginals(run.raw, rho)
    log.debug("engine finished after %d iterations", run.iterations)
    return run


def decompose(inst: Instance, rho, oracle: AscOracle, **kwargs) -> Decomposition:
    return run_engine(inst, rho, oracle, **kwargs).decomposition


class BruteForceAsc:
    """ASC oracle for small explicit families: first subset of the residual support
    (by size, then lexicographically) that passes :func:`asc_violations`."""

    def __init__(self, inst: Instance, cap: int = 14):
        self.inst = inst
        self.cap = cap

    def next_asc(self, state: ResidualState) -> frozenset:
        ground = self.inst.ground
        support = ground.ordered(state.support())
        if len(support) > self.cap:
            raise ScaleExceeded(f"brute-force ASC search over {len(support)} > {self.cap} elements")
        for k in range(1, len(support) + 1):
            for combo in combinations(support, k):
                S = frozenset(combo)
                if not asc_violations(self.inst, state, S):
                    return S
        raise OracleFailure("no admissible support candidate exists for this residual state")
