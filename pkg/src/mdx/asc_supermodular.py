"""ASC oracle for the full power set with a supermodular requirement function.

The requirement values are tabulated once over all ``2^|E|`` subsets
(indexed by bitmask), so tight-set detection and separation are plain
enumerations.  This is meant for small ground sets; the caps guard against
accidental blow-ups.
"""
from __future__ import annotations

import random
from collections.abc import Callable, Mapping
from fractions import Fraction

from .core.engine import ResidualState
from .core.types import (
    ONE,
    ZERO,
    GroundSet,
    Instance,
    Requirements,
    SetFamily,
    Violation,
    as_fraction,
)
from .errors import OracleFailure, ScaleExceeded, ValidationError

SINGLE_QUERY_CAP = 20
ENGINE_CAP = 12


class SupermodularOracle(Requirements):
    """Value oracle for a set function on all subsets of ``ground``.

    ``values`` is either a callable on frozensets or a mapping from subsets
    to values (missing subsets default to ``default``).  Evaluations are
    cached per bitmask.
    """

    mode = "supermodular"

    def __init__(
        self,
        ground: GroundSet,
        values: Callable[[frozenset], object] | Mapping,
        default=None,
        cap: int = SINGLE_QUERY_CAP,
        engine_cap: int = ENGINE_CAP,
    ):
        self.ground = ground
        self.cap = cap
        self.engine_cap = engine_cap
        if callable(values):
            self._fn = values
        else:
            table = {ground.mask(k): as_fraction(v) for k, v in values.items()}
            dflt = None if default is None else as_fraction(default)

            def lookup(s, table=table, dflt=dflt):
                m = ground.mask(s)
                if m in table:
                    return table[m]
                if dflt is None:
                    raise ValidationError(f"no requirement given for {ground.ordered(s)}")
                return dflt

            self._fn = lookup
        self._cache: dict[int, Fraction] = {}
        self._table: list[Fraction] | None = None

    def value_mask(self, mask: int) -> Fraction:
        try:
            return self._cache[mask]
        except KeyError:
            v = as_fraction(self._fn(self.ground.from_mask(mask)))
            if v > ONE:
                raise ValidationError(
                    f"requirement {v} of {self.ground.ordered(self.ground.from_mask(mask))} exceeds 1"
                )
            self._cache[mask] = v
            return v

    def __call__(self, member) -> Fraction:
        return self.value_mask(self.ground.mask(member))

    def table(self, cap: int | None = None) -> list[Fraction]:
        """pi on every bitmask 0 .. 2^n - 1."""
        n = len(self.ground)
        cap = self.cap if cap is None else cap
        if n > cap:
            raise ScaleExceeded(f"enumerating 2^{n} subsets exceeds the cap of {cap} elements")
        if self._table is None:
            self._table = [self.value_mask(m) for m in range(1 << n)]
        return self._table

    def check_supermodular(self, rng: random.Random | int = 0, pairs: int | None = None):
        """Spot-check supermodularity on random pairs; returns a violating pair or None."""
        rng = rng if isinstance(rng, random.Random) else random.Random(rng)
        n = len(self.ground)
        pairs = min(500, 4**n) if pairs is None else pairs
        for _ in range(pairs):
            a, b = rng.getrandbits(n) if n else 0, rng.getrandbits(n) if n else 0
            lhs = self.value_mask(a & b) + self.value_mask(a | b)
            if lhs < self.value_mask(a) + self.value_mask(b):
                return self.ground.from_mask(a), self.ground.from_mask(b)
        return None


def _subset_sums(rho_list: list[Fraction]) -> list[Fraction]:
    sums = [ZERO] * (1 << len(rho_list))
    for m in range(1, len(sums)):
        low = m & -m
        sums[m] = sums[m ^ low] + rho_list[low.bit_length() - 1]
    return sums


class PowerSetFamily(SetFamily):
    """All subsets of the ground set, with enumeration-backed separation hooks."""

    def __init__(self, ground: GroundSet, cap: int = SINGLE_QUERY_CAP):
        self.ground = ground
        self.cap = cap

    def members(self):
        n = len(self.ground)
        if n > self.cap:
            raise ScaleExceeded(f"enumerating 2^{n} subsets exceeds the cap of {self.cap} elements")
        return (self.ground.from_mask(m) for m in range(1 << n))

    def _table(self, requirements) -> list[Fraction]:
        if isinstance(requirements, SupermodularOracle):
            return requirements.table(self.cap)
        return [requirements(s) for s in self.members()]

    def max_requirement(self, requirements) -> Fraction:
        return max(self._table(requirements))

    def most_violated(self, requirements, rho, offset=ZERO) -> Violation:
        table = self._table(requirements)
        sums = _subset_sums([rho[e] for e in self.ground])
        best_mask, best = 0, None
        for m, (p, s) in enumerate(zip(table, sums)):
            gap = p - offset - s
            if best is None or gap > best or (gap == best and _lex_less(self.ground, m, best_mask)):
                best, best_mask = gap, m
        return Violation(self.ground.from_mask(best_mask), best)


def _lex_less(ground: GroundSet, a: int, b: int) -> bool:
    return ground.key(ground.from_mask(a)) < ground.key(ground.from_mask(b))


def supermodular_instance(oracle: SupermodularOracle) -> Instance:
    return Instance(oracle.ground, PowerSetFamily(oracle.ground, oracle.cap), oracle)


def _tight_masks(oracle: SupermodularOracle, state: ResidualState, cap: int) -> list[int]:
    table = oracle.table(cap)
    sums = _subset_sums([state.rho_bar[e] for e in oracle.ground])
    return [m for m, (p, s) in enumerate(zip(table, sums)) if s == p - state.offset]


def tight_union(oracle: SupermodularOracle, state: ResidualState, cap: int | None = None) -> frozenset:
    """Union of all tight subsets; by uncrossing it is tight itself (asserted)."""
    cap = oracle.cap if cap is None else cap
    tight = _tight_masks(oracle, state, cap)
    union = 0
    for m in tight:
        union |= m
    if tight and union not in set(tight):
        raise OracleFailure(
            "union of tight sets is not tight; the requirement function is not supermodular"
        )
    return oracle.ground.from_mask(union)


def next_asc(oracle: SupermodularOracle, state: ResidualState, cap: int | None = None) -> frozenset:
    """E_rho minus the tight union Q, plus the first element of Q in E_rho if there is one."""
    ground = oracle.ground
    Q = tight_union(oracle, state, cap)
    support = state.support()
    S = support - Q
    inside = ground.ordered(Q & support)
    if inside:
        S = S | {inside[0]}
    return S


def max_violated(oracle: SupermodularOracle, rho: Mapping) -> Violation | None:
    """Most violated covering inequality over all subsets, or None when rho satisfies all of them."""
    worst = PowerSetFamily(oracle.ground, oracle.cap).most_violated(oracle, rho)
    return worst if worst.gap > 0 else None


class SupermodularAsc:
    """Engine-facing ASC oracle (uses the tighter in-loop enumeration cap)."""

    def __init__(self, oracle: SupermodularOracle):
        self.oracle = oracle

    def next_asc(self, state: ResidualState) -> frozenset:
        return next_asc(self.oracle, state, self.oracle.engine_cap)
